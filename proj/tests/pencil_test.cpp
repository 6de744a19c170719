#include <gtest/gtest.h>

#include <phr/phr.hpp>

#include "test_systems.hpp"

namespace phr {
namespace {

const ToleranceConfig kCfg{};

TEST(Regularity, DiagonalPencilIsRegular) {
  const auto sys = testing::two_state_example();
  const auto rep = check_regular(sys, kCfg);
  EXPECT_TRUE(rep.regular);
}

TEST(Regularity, SharedKernelIsSingular) {
  Matrix e = Matrix::Zero(2, 2);
  Matrix a = Matrix::Zero(2, 2);
  e(0, 0) = 1.0;
  a(0, 0) = -1.0;
  const DescriptorSystem sys(e, a, Matrix::Zero(2, 1), Matrix::Zero(1, 2),
                             Matrix::Zero(1, 1));
  EXPECT_FALSE(check_regular(sys, kCfg).regular);
}

TEST(Regularity, EmptySystemIsRegular) {
  const DescriptorSystem sys(Matrix(0, 0), Matrix(0, 0), Matrix(0, 1),
                             Matrix(1, 0), Matrix::Zero(1, 1));
  EXPECT_TRUE(check_regular(sys, kCfg).regular);
}

TEST(GeneralizedEigenvalues, TwoStateExample) {
  const auto sys = testing::two_state_example();
  const auto eigs = generalized_eigenvalues(sys.E, sys.A, kCfg);
  ASSERT_EQ(eigs.size(), 2u);
  int finite = 0, infinite = 0;
  for (const auto& ev : eigs) {
    if (ev.finite) {
      ++finite;
      EXPECT_NEAR(ev.value.real(), -1.0, 1e-12);
      EXPECT_NEAR(ev.value.imag(), 0.0, 1e-12);
    } else {
      ++infinite;
    }
  }
  EXPECT_EQ(finite, 1);
  EXPECT_EQ(infinite, 1);
}

TEST(GeneralizedEigenvalues, SingularPencilThrows) {
  EXPECT_THROW(generalized_eigenvalues(Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                                       kCfg),
               PencilSingularError);
}

TEST(PencilIndex, NonsingularEIsIndexZero) {
  EXPECT_EQ(pencil_index(Matrix::Identity(3, 3), -Matrix::Identity(3, 3), kCfg),
            0);
}

TEST(PencilIndex, TwoStateExampleIsIndexOne) {
  const auto sys = testing::two_state_example();
  EXPECT_EQ(pencil_index(sys.E, sys.A, kCfg), 1);
}

TEST(PencilIndex, ThreeStateExampleIsIndexTwo) {
  const auto sys = testing::three_state_example();
  EXPECT_EQ(pencil_index(sys.E, sys.A, kCfg), 2);
}

TEST(PencilIndex, NilpotentChainOfLengthThree) {
  Matrix e = Matrix::Zero(3, 3);
  e(0, 1) = 1.0;
  e(1, 2) = 1.0;
  EXPECT_EQ(pencil_index(e, -Matrix::Identity(3, 3), kCfg), 3);
}

TEST(FiniteInfiniteSplit, TwoStateExample) {
  const auto sys = testing::two_state_example();
  const auto split = finite_infinite_split(sys.E, sys.A, kCfg);
  EXPECT_EQ(split.n_finite, 1);
  EXPECT_TRUE(is_nonsingular(split.E11(), kCfg));
  const double finite_ev = split.A11()(0, 0) / split.E11()(0, 0);
  EXPECT_NEAR(finite_ev, -1.0, 1e-12);
}

TEST(FiniteInfiniteSplit, ReassemblesInput) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 9);
    Matrix e(n, n), a(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        e(i, j) = dist(rng);
        a(i, j) = dist(rng);
      }
    }
    if (rng() % 2 == 0) e.row(0).setZero();
    DescriptorSystem sys(e, a, Matrix::Zero(n, 1), Matrix::Zero(1, n),
                         Matrix::Zero(1, 1));
    if (!check_regular(sys, kCfg).regular) continue;
    const auto split = finite_infinite_split(e, a, kCfg);
    const Matrix e_back = split.U.transpose() * split.tE * split.V.transpose();
    const Matrix a_back = split.U.transpose() * split.tA * split.V.transpose();
    EXPECT_LE((e_back - e).norm(), 1e-10 * std::max(1.0, e.norm()));
    EXPECT_LE((a_back - a).norm(), 1e-10 * std::max(1.0, a.norm()));
    EXPECT_LE(orthogonality_defect(split.U), 1e-12 * n);
    EXPECT_LE(orthogonality_defect(split.V), 1e-12 * n);
  }
}

TEST(EvalTransfer, TwoStateExampleClosedForm) {
  const auto sys = testing::two_state_example();
  // T(s) = 1/(s+1) + 1 - 1 = 1/(s+1).
  for (const std::complex<double> s :
       {std::complex<double>(1.0, 0.0), std::complex<double>(0.5, 2.0),
        std::complex<double>(3.0, -1.0)}) {
    const ComplexMatrix t = eval_transfer(sys, s);
    ASSERT_EQ(t.rows(), 1);
    EXPECT_LE(std::abs(t(0, 0) - 1.0 / (s + 1.0)), 1e-12);
  }
}

TEST(EvalTransfer, PoleThrows) {
  const auto sys = testing::two_state_example();
  EXPECT_THROW(eval_transfer(sys, std::complex<double>(-1.0, 0.0)),
               SingularEvaluationError);
}

TEST(TfEquivalent, DetectsEquality) {
  const auto sys = testing::two_state_example();
  const auto cmp = tf_equivalent(sys, sys, kCfg);
  EXPECT_TRUE(cmp.equivalent);
  EXPECT_LE(cmp.max_rel_err, 1e-14);
}

TEST(TfEquivalent, DetectsDifference) {
  const auto sys = testing::two_state_example();
  DescriptorSystem other = sys;
  other.D(0, 0) += 0.5;
  EXPECT_FALSE(tf_equivalent(sys, other, kCfg).equivalent);
}

TEST(TfEquivalent, InvariantUnderLeftRightEquivalence) {
  std::mt19937_64 rng(11);
  const auto sys = testing::three_state_example();
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix u = phr::testing::random_orthogonal(rng, sys.n());
    const Matrix v = phr::testing::random_orthogonal(rng, sys.n());
    const DescriptorSystem other(u * sys.E * v, u * sys.A * v, u * sys.B,
                                 sys.C * v, sys.D);
    const auto cmp = tf_equivalent(sys, other, kCfg);
    EXPECT_TRUE(cmp.equivalent);
  }
}

TEST(Qz, OrthogonalFactorsAndTriangularForm) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.0, 1.0);
  const Eigen::Index n = 6;
  Matrix e(n, n), a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      e(i, j) = dist(rng);
      a(i, j) = dist(rng);
    }
  }
  const auto res = qz(e, a, false, 0.0);
  EXPECT_LE(orthogonality_defect(res.U), 1e-12 * n);
  EXPECT_LE(orthogonality_defect(res.V), 1e-12 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      EXPECT_LE(std::abs(res.T(i, j)), 1e-12 * e.norm());
    }
  }
}

}  // namespace
}  // namespace phr
