#pragma once

#include <complex>
#include <random>
#include <vector>

#include "phr/config.hpp"
#include "phr/errors.hpp"
#include "phr/numeric.hpp"
#include "phr/qz.hpp"
#include "phr/system.hpp"

namespace phr {

struct GeneralizedEigenvalue {
  std::complex<double> alpha;
  std::complex<double> beta;
  bool finite = true;
  std::complex<double> value;  // alpha / beta when finite
};

struct RegularityReport {
  bool regular = false;
  bool has_witness = false;
  double witness_alpha = 0.0;  // det(alpha*E - beta*A) != 0 at the witness
  double witness_beta = 0.0;
};

namespace detail {

inline double qz_beta_tol(const Matrix& E, const ToleranceConfig& cfg) {
  return cfg.rank_rtol * std::max<double>(E.rows(), 1) * E.norm();
}

inline double qz_alpha_tol(const Matrix& A, const ToleranceConfig& cfg) {
  return cfg.rank_rtol * std::max<double>(A.rows(), 1) * A.norm();
}

inline bool qz_is_regular(const QzResult& qz, double alpha_tol, double beta_tol) {
  for (Eigen::Index j = 0; j < qz.beta.size(); ++j) {
    const double a = std::hypot(qz.alphar(j), qz.alphai(j));
    if (a <= alpha_tol && std::abs(qz.beta(j)) <= beta_tol) return false;
  }
  return true;
}

}  // namespace detail

inline RegularityReport check_regular(const DescriptorSystem& sys,
                                      const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  RegularityReport rep;
  if (sys.n() == 0) {
    rep.regular = true;
    rep.has_witness = true;
    rep.witness_alpha = 1.0;
    rep.witness_beta = 1.0;
    return rep;
  }
  const auto qz = detail::qz(sys.E, sys.A, false, 0.0);
  rep.regular = detail::qz_is_regular(qz, detail::qz_alpha_tol(sys.A, cfg),
                                      detail::qz_beta_tol(sys.E, cfg));
  if (rep.regular) {
    // det(alpha*E - A) != 0 whenever alpha clears every finite eigenvalue.
    double max_abs_finite = 0.0;
    const double beta_tol = detail::qz_beta_tol(sys.E, cfg);
    for (Eigen::Index j = 0; j < qz.beta.size(); ++j) {
      if (std::abs(qz.beta(j)) > beta_tol) {
        const double lam =
            std::hypot(qz.alphar(j), qz.alphai(j)) / std::abs(qz.beta(j));
        max_abs_finite = std::max(max_abs_finite, lam);
      }
    }
    rep.has_witness = true;
    rep.witness_alpha = 1.0 + 2.0 * max_abs_finite;
    rep.witness_beta = 1.0;
  }
  return rep;
}

inline std::vector<GeneralizedEigenvalue> generalized_eigenvalues(
    const Matrix& E, const Matrix& A, const ToleranceConfig& cfg) {
  cfg.validate();
  if (E.rows() != E.cols() || A.rows() != E.rows() || A.cols() != E.rows()) {
    throw InvalidInputError("generalized_eigenvalues: E, A must be square of equal size");
  }
  const auto qz = detail::qz(E, A, false, 0.0);
  const double alpha_tol = detail::qz_alpha_tol(A, cfg);
  const double beta_tol = detail::qz_beta_tol(E, cfg);
  if (!detail::qz_is_regular(qz, alpha_tol, beta_tol)) {
    throw PencilSingularError("generalized_eigenvalues: pencil (E, A) is singular");
  }
  std::vector<GeneralizedEigenvalue> out;
  out.reserve(E.rows());
  for (Eigen::Index j = 0; j < qz.beta.size(); ++j) {
    GeneralizedEigenvalue ev;
    ev.alpha = {qz.alphar(j), qz.alphai(j)};
    ev.beta = {qz.beta(j), 0.0};
    const double a = std::abs(ev.alpha);
    const double b = std::abs(ev.beta);
    ev.finite = b > cfg.rank_rtol * std::max<double>(E.rows(), 1) * (a + b);
    ev.value = ev.finite ? ev.alpha / ev.beta
                         : std::complex<double>(std::numeric_limits<double>::infinity(), 0.0);
    out.push_back(ev);
  }
  return out;
}

/// Orthogonal deflation separating the finite spectrum into the leading
/// block: U*(lambda*E - A)*V is block upper triangular, the leading
/// n_finite x n_finite block has nonsingular E part and carries all finite
/// eigenvalues, the trailing pencil has only the eigenvalue infinity.
struct FiniteInfiniteSplit {
  Matrix U, V;      // orthogonal
  Matrix tE, tA;    // U*E*V, U*A*V (block upper triangular)
  Eigen::Index n_finite = 0;

  Matrix E11() const { return tE.topLeftCorner(n_finite, n_finite); }
  Matrix A11() const { return tA.topLeftCorner(n_finite, n_finite); }
  Matrix E22() const {
    const auto q = tE.rows() - n_finite;
    return tE.bottomRightCorner(q, q);
  }
  Matrix A22() const {
    const auto q = tA.rows() - n_finite;
    return tA.bottomRightCorner(q, q);
  }
};

inline FiniteInfiniteSplit finite_infinite_split(const Matrix& E, const Matrix& A,
                                                 const ToleranceConfig& cfg) {
  cfg.validate();
  const auto qz = detail::qz(E, A, true, detail::qz_beta_tol(E, cfg));
  if (!detail::qz_is_regular(qz, detail::qz_alpha_tol(A, cfg),
                             detail::qz_beta_tol(E, cfg))) {
    throw PencilSingularError("finite_infinite_split: pencil (E, A) is singular");
  }
  FiniteInfiniteSplit split;
  split.U = qz.U;
  split.V = qz.V;
  split.tE = qz.T;
  split.tA = qz.S;
  split.n_finite = qz.n_finite;
  return split;
}

/// ind(E, A): 0 when E is nonsingular, else the nilpotency degree of the
/// infinite part of the Weierstrass form.
inline int pencil_index(const Matrix& E, const Matrix& A, const ToleranceConfig& cfg) {
  cfg.validate();
  if (E.rows() == 0) return 0;
  const auto split = finite_infinite_split(E, A, cfg);
  const Eigen::Index q = E.rows() - split.n_finite;
  if (q == 0) return 0;
  const Matrix& a22 = split.A22();
  const Matrix N = a22.lu().solve(split.E22());
  // Entries of N below this level are roundoff inherited from the split, not
  // structure; without an absolute floor a numerically zero N never reaches
  // rank zero under a purely relative rank test.
  const double sigma_min =
      Eigen::JacobiSVD<Matrix>(a22).singularValues().minCoeff();
  const double noise = cfg.rank_rtol * std::max(E.norm(), 1.0) /
                       std::max(sigma_min, std::numeric_limits<double>::min());
  Matrix power = Matrix::Identity(q, q);
  double growth = 1.0;
  for (int k = 1; k <= static_cast<int>(q); ++k) {
    power = N * power;
    growth *= std::max(N.norm(), 1.0);
    if (power.norm() <= noise * growth) return k;
  }
  throw InternalError("pencil_index: infinite block is not numerically nilpotent");
}

/// T(s) = C (sE - A)^{-1} B + D via a linear solve.
inline ComplexMatrix eval_transfer(const DescriptorSystem& sys,
                                   std::complex<double> s) {
  sys.check_dimensions();
  if (sys.n() == 0) return sys.D.cast<std::complex<double>>();
  ComplexMatrix pencil = s * sys.E.cast<std::complex<double>>() -
                         sys.A.cast<std::complex<double>>();
  Eigen::FullPivLU<ComplexMatrix> lu(pencil);
  lu.setThreshold(Eigen::Default);
  if (!lu.isInvertible()) {
    throw SingularEvaluationError("eval_transfer: sE - A is singular at the sample point");
  }
  return sys.C.cast<std::complex<double>>() * lu.solve(sys.B.cast<std::complex<double>>()) +
         sys.D.cast<std::complex<double>>();
}

struct TfComparison {
  bool equivalent = false;
  double max_rel_err = 0.0;
  std::vector<std::complex<double>> samples;
};

namespace detail {

/// Deterministic sample set in the closed right half plane: points on the
/// vertical line Re(s) = 1 plus seeded random points, all kept away from the
/// finite eigenvalues of the supplied systems.
inline std::vector<std::complex<double>> tf_sample_points(
    const std::vector<const DescriptorSystem*>& systems, const ToleranceConfig& cfg) {
  std::vector<std::complex<double>> eigs;
  for (const auto* sys : systems) {
    for (const auto& ev : generalized_eigenvalues(sys->E, sys->A, cfg)) {
      if (ev.finite) eigs.push_back(ev.value);
    }
  }
  auto far_from_spectrum = [&](std::complex<double> s) {
    for (const auto& lam : eigs) {
      if (std::abs(s - lam) < 1e-6 * (1.0 + std::abs(lam))) return false;
    }
    return true;
  };

  const int total = std::max(cfg.sample_count, 1);
  const int n_random = std::min(20, total / 2);
  const int n_line = total - n_random;
  std::vector<std::complex<double>> samples;
  samples.reserve(total);
  for (int k = 0; k < n_line; ++k) {
    const double t = n_line > 1 ? -3.0 + 6.0 * k / (n_line - 1) : 0.0;
    const double omega = (k % 2 == 0 ? 1.0 : -1.0) * std::pow(10.0, t);
    std::complex<double> s(1.0, omega);
    while (!far_from_spectrum(s)) s += std::complex<double>(0.5, 0.0);
    samples.push_back(s);
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> log_re(-1.0, 1.0), im(-10.0, 10.0);
  while (static_cast<int>(samples.size()) < total) {
    std::complex<double> s(std::pow(10.0, log_re(rng)), im(rng));
    if (far_from_spectrum(s)) samples.push_back(s);
  }
  return samples;
}

}  // namespace detail

/// Sampled rational-function identity test for realizations.
inline TfComparison tf_equivalent(const DescriptorSystem& sys1,
                                  const DescriptorSystem& sys2,
                                  const ToleranceConfig& cfg) {
  cfg.validate();
  if (sys1.m() != sys2.m()) {
    throw InvalidInputError("tf_equivalent: port dimensions differ");
  }
  if (!check_regular(sys1, cfg).regular || !check_regular(sys2, cfg).regular) {
    throw PencilSingularError("tf_equivalent: both pencils must be regular");
  }
  TfComparison cmp;
  cmp.samples = detail::tf_sample_points({&sys1, &sys2}, cfg);
  int evaluated = 0;
  for (const auto& s : cmp.samples) {
    ComplexMatrix t1, t2;
    try {
      t1 = eval_transfer(sys1, s);
      t2 = eval_transfer(sys2, s);
    } catch (const SingularEvaluationError&) {
      continue;  // sample sits on hidden spectrum; remaining samples decide
    }
    ++evaluated;
    const double denom = std::max({t1.norm(), t2.norm(), 1.0});
    cmp.max_rel_err = std::max(cmp.max_rel_err, (t1 - t2).norm() / denom);
  }
  if (evaluated == 0) {
    throw InconclusiveError("tf_equivalent: every sample point failed to evaluate");
  }
  cmp.equivalent = cmp.max_rel_err <= cfg.tf_rtol;
  return cmp;
}

}  // namespace phr
