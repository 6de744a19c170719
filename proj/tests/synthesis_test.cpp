#include <gtest/gtest.h>

#include <phr/phr.hpp>

#include "test_systems.hpp"

namespace phr {
namespace {

const ToleranceConfig kCfg{};

TEST(PhEquivalence, IndefiniteFeedthroughIsNotDirectlyPh) {
  EXPECT_FALSE(is_ph_equivalent(testing::two_state_example(), kCfg));
  EXPECT_FALSE(is_ph_equivalent(testing::three_state_example(), kCfg));
}

TEST(PhEquivalence, StrictlyPassiveSystemIsPh) {
  ToleranceConfig cfg;
  const auto sys = random_strictly_passive(12, 4, 2, cfg);
  EXPECT_TRUE(is_ph_equivalent(sys, cfg));
}

TEST(PhEquivalence, NonMinimalInputRejected) {
  EXPECT_THROW(is_ph_equivalent(testing::behavioral_example(), kCfg),
               PreconditionViolationError);
}

TEST(FeedthroughShift, TwoStateGolden) {
  const auto sys = testing::two_state_example();
  const auto shift = compute_feedthrough_shift(sys, kCfg, 2.0);
  Matrix expect_w(2, 1);
  expect_w << 0, -2;
  EXPECT_LE((shift.W - expect_w).norm(), 1e-12);
  EXPECT_TRUE(shift.observable_after_shift);
  EXPECT_LE((sys.E.transpose() * shift.W).norm(), 1e-12);

  const Matrix c_shifted = sys.C - shift.W.transpose() * sys.A;
  const Matrix d_shifted = sys.D - shift.W.transpose() * sys.B;
  Matrix expect_c(1, 2), expect_d(1, 1);
  expect_c << 1, -1;
  expect_d << 1;
  EXPECT_LE((c_shifted - expect_c).norm(), 1e-12);
  EXPECT_LE((d_shifted - expect_d).norm(), 1e-12);
}

TEST(FeedthroughShift, ThreeStateGolden) {
  const auto sys = testing::three_state_example();
  const auto shift = compute_feedthrough_shift(sys, kCfg, 2.0, 2.0);
  Matrix expect_w(3, 2);
  expect_w << 0, 0, 2, 0, 0, -2;
  EXPECT_LE((shift.W - expect_w).norm(), 1e-12);

  const Matrix c_shifted = sys.C - shift.W.transpose() * sys.A;
  const Matrix d_shifted = sys.D - shift.W.transpose() * sys.B;
  Matrix expect_c(2, 3);
  expect_c << 3, 1, -1, 0, 0, -1;
  EXPECT_LE((c_shifted - expect_c).norm(), 1e-12);
  EXPECT_LE((d_shifted - Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(FeedthroughShift, DefaultParametersProduceNonnegativeFeedthrough) {
  for (const auto& sys :
       {testing::two_state_example(), testing::three_state_example()}) {
    const auto shift = compute_feedthrough_shift(sys, kCfg);
    const Matrix d_shifted = sys.D - shift.W.transpose() * sys.B;
    EXPECT_TRUE(is_psd(sym(d_shifted + d_shifted.transpose()), kCfg));
    EXPECT_LE((sys.E.transpose() * shift.W).norm(), 1e-10);
  }
}

TEST(FeedthroughShift, NoShiftNeededForNonnegativeFeedthrough) {
  ToleranceConfig cfg;
  const auto sys = random_strictly_passive(33, 4, 2, cfg);
  const auto shift = compute_feedthrough_shift(sys, cfg);
  EXPECT_LE(shift.W.norm(), 1e-14);
}

TEST(FeedthroughShift, PreservesTransferFunction) {
  ToleranceConfig cfg;
  for (const auto& sys :
       {testing::two_state_example(), testing::three_state_example()}) {
    const auto shift = compute_feedthrough_shift(sys, cfg);
    const DescriptorSystem shifted(sys.E, sys.A, sys.B,
                                   Matrix(sys.C - shift.W.transpose() * sys.A),
                                   Matrix(sys.D - shift.W.transpose() * sys.B));
    const auto cmp = tf_equivalent(sys, shifted, cfg);
    EXPECT_TRUE(cmp.equivalent);
    EXPECT_LE(cmp.max_rel_err, 1e-9);
  }
}

TEST(CertificateConstruction, ShiftedTwoStateExample) {
  const auto sys = testing::two_state_example();
  const auto shift = compute_feedthrough_shift(sys, kCfg, 2.0);
  const DescriptorSystem shifted(sys.E, sys.A, sys.B,
                                 Matrix(sys.C - shift.W.transpose() * sys.A),
                                 Matrix(sys.D - shift.W.transpose() * sys.B));
  const Matrix q = construct_ph_certificate(shifted, kCfg);
  EXPECT_TRUE(verify_kyp(shifted, q, kCfg).valid);
}

TEST(CertificateConstruction, StrictlyPassiveSystems) {
  ToleranceConfig cfg;
  for (int trial = 0; trial < 6; ++trial) {
    const auto sys = random_strictly_passive(2200 + trial, 4, 2, cfg);
    const Matrix q = construct_ph_certificate(sys, cfg);
    EXPECT_TRUE(verify_kyp(sys, q, cfg).valid);
  }
}

TEST(Realization, TwoStateEndToEnd) {
  const auto sys = testing::two_state_example();
  RealizeOptions opts;
  opts.alpha = 2.0;
  const auto result = realize_ph(sys, kCfg, opts);
  EXPECT_EQ(result.provenance.path, "shift");
  EXPECT_TRUE(result.certificate.valid);
  EXPECT_TRUE(validate_ph(result.ph, kCfg).all_passed);
  EXPECT_LE(result.provenance.tf_max_rel_err, 1e-10);
  EXPECT_TRUE(tf_equivalent(sys, result.system, kCfg).equivalent);
}

TEST(Realization, ThreeStateEndToEnd) {
  const auto sys = testing::three_state_example();
  RealizeOptions opts;
  opts.alpha = 2.0;
  opts.beta = 2.0;
  const auto result = realize_ph(sys, kCfg, opts);
  EXPECT_TRUE(result.certificate.valid);
  EXPECT_TRUE(validate_ph(result.ph, kCfg).all_passed);
  EXPECT_LE(result.provenance.tf_max_rel_err, 1e-10);
}

TEST(Realization, DirectPathForNonnegativeFeedthrough) {
  ToleranceConfig cfg;
  const auto sys = random_strictly_passive(51, 4, 1, cfg);
  const auto result = realize_ph(sys, cfg);
  EXPECT_EQ(result.provenance.path, "direct");
  EXPECT_TRUE(result.certificate.valid);
  EXPECT_TRUE(validate_ph(result.ph, cfg).all_passed);
}

TEST(Realization, RejectsNonPositiveRealInput) {
  Matrix a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  a << -1.0;
  b << 1.0;
  c << -1.0;  // T(s) = -1/(s+1), not positive real
  d << 0.0;
  const DescriptorSystem sys(Matrix::Identity(1, 1), a, b, c, d);
  EXPECT_THROW(realize_ph(sys, kCfg), NotPositiveRealError);
}

TEST(Realization, RejectsSingularPencil) {
  const DescriptorSystem sys(Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                             Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                             Matrix::Ones(1, 1));
  EXPECT_THROW(realize_ph(sys, kCfg), PencilSingularError);
}

TEST(Realization, StripsNonMinimalPadding) {
  const auto core = testing::two_state_example();
  Matrix e = Matrix::Zero(3, 3), a = Matrix::Zero(3, 3);
  e.topLeftCorner(2, 2) = core.E;
  a.topLeftCorner(2, 2) = core.A;
  e(2, 2) = 1.0;
  a(2, 2) = -2.0;
  Matrix b = Matrix::Zero(3, 1), c = Matrix::Zero(1, 3);
  b.topRows(2) = core.B;
  c.leftCols(2) = core.C;
  const DescriptorSystem sys(e, a, b, c, core.D);
  const auto result = realize_ph(sys, kCfg);
  EXPECT_EQ(result.system.n(), 2);
  EXPECT_TRUE(tf_equivalent(sys, result.system, kCfg).equivalent);
}

TEST(InfinitySplitRealization, TwoStateExample) {
  const auto sys = testing::two_state_example();
  const auto result = realize_infinity_split(sys, kCfg);
  EXPECT_EQ(result.provenance.path, "infinity-split");
  EXPECT_TRUE(result.certificate.valid);
  EXPECT_TRUE(validate_ph(result.ph, kCfg).all_passed);
  EXPECT_LE(result.provenance.tf_max_rel_err, 1e-10);
  // T(s) = 1/(s+1) is proper with T(infinity) = 0.
  EXPECT_LE(result.provenance.M0.norm(), 1e-10);
  EXPECT_LE(result.provenance.M1.norm(), 1e-10);
}

TEST(InfinitySplitRealization, RecoversPolynomialPart) {
  ToleranceConfig cfg;
  std::mt19937_64 rng(61);
  const auto proper = random_strictly_passive(613, 3, 2, cfg);
  Matrix m1(2, 2);
  m1 << 2, 1, 1, 2;
  // Append the polynomial part s*M1 in composite coordinates, then scramble
  // with orthogonal transformations.
  const Eigen::Index n = proper.n() + 2 * proper.m();
  Matrix e = Matrix::Zero(n, n), a = Matrix::Zero(n, n);
  Matrix b = Matrix::Zero(n, proper.m()), c = Matrix::Zero(proper.m(), n);
  e.topLeftCorner(3, 3) = proper.E;
  e.block(3, 3, 2, 2) = m1;
  a.topLeftCorner(3, 3) = proper.A;
  a.block(3, 5, 2, 2) = -Matrix::Identity(2, 2);
  a.block(5, 3, 2, 2) = Matrix::Identity(2, 2);
  b.topRows(3) = proper.B;
  b.bottomRows(2) = Matrix::Identity(2, 2);
  c.leftCols(3) = proper.C;
  c.rightCols(2) = Matrix::Identity(2, 2);
  const Matrix u = phr::testing::random_orthogonal(rng, n);
  const Matrix v = phr::testing::random_orthogonal(rng, n);
  const DescriptorSystem sys(u * e * v, u * a * v, u * b, c * v, proper.D);

  const auto result = realize_infinity_split(sys, cfg);
  EXPECT_TRUE(result.certificate.valid);
  EXPECT_LE((result.provenance.M1 - m1).norm(), 1e-8 * m1.norm());
  EXPECT_LE(result.provenance.tf_max_rel_err, 1e-9);
}

TEST(Generators, RespectsRequestedRank) {
  ToleranceConfig cfg;
  GeneratorOptions opt;
  opt.n = 6;
  opt.m = 2;
  opt.rank_e = 4;
  const auto ph = random_ph_form(99, opt, cfg);
  EXPECT_EQ(svd_rank(ph.E, cfg), 4);
}

}  // namespace
}  // namespace phr
