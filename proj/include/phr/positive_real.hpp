#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "phr/config.hpp"
#include "phr/errors.hpp"
#include "phr/numeric.hpp"
#include "phr/pencil.hpp"
#include "phr/ph_form.hpp"
#include "phr/qz.hpp"
#include "phr/system.hpp"

namespace phr {

/// Result of checking a (Q, W) pair against the linear matrix inequality
///   [[A^T Q + Q^T A,  Q^T B - C^T + A^T W],
///    [B^T Q - C + W^T A,  W^T B + B^T W - D - D^T]]  negative semidefinite,
/// with E^T W = 0, Q^T E = E^T Q positive semidefinite.
struct Certificate {
  Matrix Q;
  Matrix W;               // zero columns mean the single-matrix variant
  double lmi_margin = 0.0;      // largest eigenvalue of the LMI block (want <= 0)
  double etq_psd_margin = 0.0;  // smallest eigenvalue of sym(E^T Q) (want >= 0)
  double etq_sym_residual = 0.0;
  double etw_residual = 0.0;
  double lmi_scale = 1.0;
  double etq_scale = 1.0;
  bool valid = false;
};

inline Certificate verify_pr_certificate(const DescriptorSystem& sys,
                                         const Matrix& Q, const Matrix& W,
                                         const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  if (Q.rows() != n || Q.cols() != n) {
    throw InvalidInputError("verify_pr_certificate: Q must be n x n");
  }
  const bool has_w = W.size() > 0;
  if (has_w && (W.rows() != n || W.cols() != m)) {
    throw InvalidInputError("verify_pr_certificate: W must be n x m");
  }
  Certificate cert;
  cert.Q = Q;
  cert.W = has_w ? W : Matrix::Zero(n, m);

  const Matrix lmi = detail::kyp_lmi_matrix(sys, Q, cert.W);
  cert.lmi_scale = psd_scale(lmi);
  cert.lmi_margin = lambda_max_sym(sym(lmi));

  const Matrix etq = sys.E.transpose() * Q;
  cert.etq_scale = psd_scale(etq);
  cert.etq_sym_residual = (etq - etq.transpose()).norm();
  cert.etq_psd_margin = lambda_min_sym(sym(etq));

  const Matrix etw = sys.E.transpose() * cert.W;
  cert.etw_residual = etw.norm();
  const double etw_scale =
      std::max(1.0, sys.E.norm() * std::max(1.0, cert.W.norm()));

  cert.valid = cert.lmi_margin <= cfg.psd_tol * cert.lmi_scale &&
               cert.etq_psd_margin >= -cfg.psd_tol * cert.etq_scale &&
               cert.etq_sym_residual <= cfg.residual_tol * cert.etq_scale &&
               cert.etw_residual <= cfg.residual_tol * etw_scale;
  return cert;
}

/// Single-matrix variant (W = 0).
inline Certificate verify_kyp(const DescriptorSystem& sys, const Matrix& Q,
                              const ToleranceConfig& cfg) {
  return verify_pr_certificate(sys, Q, Matrix::Zero(sys.n(), sys.m()), cfg);
}

enum class PrStatus { certified, sampled_pr, not_pr, unknown };

struct PRVerdict {
  PrStatus status = PrStatus::unknown;
  std::string detail;
  // Witness of a violation, when status == not_pr.
  std::complex<double> witness_point{0.0, 0.0};
  double witness_violation = 0.0;
  bool has_imaginary_axis_eigenvalues = false;
  int samples_evaluated = 0;
  // Smallest normalized eigenvalue of T(s) + T(s)^H over all samples.
  double worst_margin = 0.0;
};

/// Samples lambda_min(T(s) + T(s)^H) over the closed right half plane:
/// a log frequency grid on the imaginary axis, refinements next to
/// imaginary-axis eigenvalues, and random interior points.
inline PRVerdict check_pr_sampling(const DescriptorSystem& sys,
                                   const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  const auto reg = check_regular(sys, cfg);
  if (!reg.regular) {
    throw PencilSingularError("check_pr_sampling: pencil (E, A) is singular");
  }

  PRVerdict verdict;
  const auto eigs = generalized_eigenvalues(sys.E, sys.A, cfg);
  std::vector<double> axis_freqs;
  for (const auto& ev : eigs) {
    if (!ev.finite) continue;
    const double scale = 1.0 + std::abs(ev.value);
    if (ev.value.real() > cfg.psd_tol * scale) {
      verdict.status = PrStatus::not_pr;
      verdict.witness_point = ev.value;
      verdict.witness_violation = ev.value.real();
      verdict.detail = "finite eigenvalue in the open right half plane";
      return verdict;
    }
    if (std::abs(ev.value.real()) <= cfg.psd_tol * scale) {
      verdict.has_imaginary_axis_eigenvalues = true;
      axis_freqs.push_back(ev.value.imag());
    }
  }

  std::vector<std::complex<double>> points;
  const int n_grid = std::max(257, cfg.sample_count);
  for (int i = 0; i < n_grid; ++i) {
    const double t = -6.0 + 12.0 * static_cast<double>(i) / (n_grid - 1);
    points.emplace_back(0.0, std::pow(10.0, t));
    points.emplace_back(0.0, -std::pow(10.0, t));
  }
  for (double w0 : axis_freqs) {
    for (double rel : {1e-1, 1e-2, 1e-4}) {
      const double step = rel * (1.0 + std::abs(w0));
      points.emplace_back(0.0, w0 + step);
      points.emplace_back(0.0, w0 - step);
    }
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> expn(-3.0, 3.0);
  std::uniform_real_distribution<double> sgn(-1.0, 1.0);
  for (int i = 0; i < 24; ++i) {
    points.emplace_back(std::pow(10.0, expn(rng)),
                        sgn(rng) * std::pow(10.0, expn(rng)));
  }

  double worst = std::numeric_limits<double>::infinity();
  std::complex<double> worst_point{0.0, 0.0};
  for (const auto& s : points) {
    // Skip points that essentially sit on a pole.
    bool on_pole = false;
    for (const auto& ev : eigs) {
      if (ev.finite && std::abs(s - ev.value) < 1e-9 * (1.0 + std::abs(ev.value))) {
        on_pole = true;
        break;
      }
    }
    if (on_pole) continue;
    ComplexMatrix t;
    try {
      t = eval_transfer(sys, s);
    } catch (const SingularEvaluationError&) {
      continue;
    }
    const ComplexMatrix h = t + t.adjoint();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const double lmin = es.eigenvalues().minCoeff();
    const double hscale = std::max(1.0, h.norm());
    ++verdict.samples_evaluated;
    if (lmin / hscale < worst) {
      worst = lmin / hscale;
      worst_point = s;
    }
  }
  if (verdict.samples_evaluated == 0) {
    throw InconclusiveError("check_pr_sampling: no sample point was evaluable");
  }
  verdict.worst_margin = worst;
  if (worst < -cfg.psd_tol) {
    verdict.status = PrStatus::not_pr;
    verdict.witness_point = worst_point;
    verdict.witness_violation = worst;
    verdict.detail = "T(s) + T(s)^H has a negative eigenvalue at a sample point";
  } else {
    verdict.status = PrStatus::sampled_pr;
    verdict.detail = "no violation over the sampled right half plane";
  }
  return verdict;
}

struct NecessaryConditionsReport {
  bool index_ok = false;
  int index = 0;
  bool spectrum_ok = false;
  std::string spectrum_detail;
  bool range_ok = false;      // A ker(E) inside range(E)  (index <= 2 style check)
  bool feedthrough_ok = true; // D + D^T dominates the transfer function at 0
  bool feedthrough_applicable = false;
  bool all_ok() const {
    return index_ok && spectrum_ok && range_ok && feedthrough_ok;
  }
};

/// Structural conditions every positive real descriptor system satisfies:
/// index at most two, spectrum in the closed left half plane with semisimple
/// imaginary-axis eigenvalues, and a bounded feedthrough defect.
inline NecessaryConditionsReport check_necessary_conditions(
    const DescriptorSystem& sys, const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  NecessaryConditionsReport rep;
  rep.index = pencil_index(sys.E, sys.A, cfg);
  rep.index_ok = rep.index <= 2;

  const auto eigs = generalized_eigenvalues(sys.E, sys.A, cfg);
  rep.spectrum_ok = true;
  bool origin_is_pole = false;
  std::vector<std::complex<double>> axis;
  for (const auto& ev : eigs) {
    if (!ev.finite) continue;
    const double scale = 1.0 + std::abs(ev.value);
    if (ev.value.real() > cfg.psd_tol * scale) {
      rep.spectrum_ok = false;
      rep.spectrum_detail = "eigenvalue in the open right half plane";
    } else if (std::abs(ev.value.real()) <= cfg.psd_tol * scale) {
      if (std::abs(ev.value) <= cfg.psd_tol) origin_is_pole = true;
      if (ev.value.imag() >= 0.0) axis.push_back(ev.value);
    }
  }
  for (const auto& lam : axis) {
    if (!rep.spectrum_ok) break;
    Eigen::Index algebraic = 0;
    for (const auto& ev : eigs) {
      if (ev.finite && std::abs(ev.value - lam) <= 1e-6 * (1.0 + std::abs(lam))) {
        ++algebraic;
      }
    }
    const ComplexMatrix pen = lam * sys.E.cast<std::complex<double>>() -
                              sys.A.cast<std::complex<double>>();
    Eigen::JacobiSVD<ComplexMatrix> svd(pen);
    const auto& s = svd.singularValues();
    const double cut = cfg.rank_rtol * sys.n() * (s.size() ? s(0) : 0.0);
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    const Eigen::Index geometric = sys.n() - r;
    if (geometric != algebraic) {
      rep.spectrum_ok = false;
      rep.spectrum_detail = "imaginary-axis eigenvalue is not semisimple";
    }
  }

  const Matrix kerE = null_basis(sys.E, cfg);
  if (kerE.cols() == 0) {
    rep.range_ok = true;
  } else {
    const Matrix ak = sys.A * kerE;
    const Matrix rngE = range_basis(sys.E, cfg);
    const Matrix resid = ak - rngE * (rngE.transpose() * ak);
    rep.range_ok = resid.norm() <= cfg.residual_tol * std::max(1.0, ak.norm());
  }

  rep.feedthrough_applicable = !origin_is_pole;
  if (rep.feedthrough_applicable) {
    try {
      const ComplexMatrix t0 = eval_transfer(sys, std::complex<double>(0.0, 0.0));
      const Matrix t0_sym = t0.real() + t0.real().transpose();
      rep.feedthrough_ok = is_psd(sym(sys.D + sys.D.transpose()) - sym(t0_sym), cfg);
    } catch (const SingularEvaluationError&) {
      rep.feedthrough_applicable = false;
    }
  }
  return rep;
}

namespace detail {

/// Nearest symmetric negative semidefinite matrix.
inline Matrix project_nsd_sym(const Matrix& m) { return -project_psd(sym(-m)); }

/// Nearest symmetric positive semidefinite matrix.
inline Matrix project_psd_sym(const Matrix& m) { return project_psd(sym(m)); }

}  // namespace detail

/// Numerical search for a single-matrix certificate Q via alternating
/// projections with correction terms. Returns the certificate on success,
/// std::nullopt when the search is inconclusive. An optional initial guess
/// (for instance from a constructive procedure) seeds the iteration.
inline std::optional<Certificate> search_kyp_certificate(
    const DescriptorSystem& sys, const ToleranceConfig& cfg,
    int max_iterations = 400,
    const std::optional<Matrix>& initial_guess = std::nullopt) {
  sys.check_dimensions();
  cfg.validate();
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const Eigen::Index nm = n + m;

  // The (2,2) block of the inequality is constant; a positive eigenvalue of
  // -(D + D^T) rules out any certificate.
  const Matrix dblock = -sym(sys.D + sys.D.transpose());
  if (m > 0 && lambda_max_sym(dblock) > cfg.psd_tol * psd_scale(dblock)) {
    return std::nullopt;
  }

  // Linear map vec(Q) -> (vec(F(Q)), vec(E^T Q)) with F the LMI block.
  const Eigen::Index rows_f = nm * nm;
  const Eigen::Index rows_g = n * n;
  Matrix design(rows_f + rows_g, n * n);
  Matrix basis = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      basis(i, j) = 1.0;
      Matrix fq = Matrix::Zero(nm, nm);
      fq.topLeftCorner(n, n) =
          sys.A.transpose() * basis + basis.transpose() * sys.A;
      fq.topRightCorner(n, m) = basis.transpose() * sys.B;
      fq.bottomLeftCorner(m, n) = sys.B.transpose() * basis;
      const Matrix gq = sys.E.transpose() * basis;
      design.col(j * n + i).head(rows_f) =
          Eigen::Map<const Vector>(fq.data(), rows_f);
      design.col(j * n + i).tail(rows_g) =
          Eigen::Map<const Vector>(gq.data(), rows_g);
      basis(i, j) = 0.0;
    }
  }
  Matrix f_const = Matrix::Zero(nm, nm);
  f_const.topRightCorner(n, m) = -sys.C.transpose();
  f_const.bottomLeftCorner(m, n) = -sys.C;
  f_const.bottomRightCorner(m, m) = -(sys.D + sys.D.transpose());
  const Eigen::ColPivHouseholderQR<Matrix> qr(design);

  Matrix q = initial_guess.value_or(Matrix::Identity(n, n));
  Matrix p1 = Matrix::Zero(nm, nm);
  Matrix p2 = Matrix::Zero(n, n);
  for (int it = 0; it < max_iterations; ++it) {
    const Matrix fq = detail::kyp_lmi_matrix(sys, q, Matrix::Zero(n, m));
    const Matrix gq = sys.E.transpose() * q;
    const Matrix z1 = fq + p1;
    const Matrix y1 = detail::project_nsd_sym(z1);
    p1 = z1 - y1;
    const Matrix z2 = gq + p2;
    const Matrix y2 = detail::project_psd_sym(z2);
    p2 = z2 - y2;

    Vector rhs(rows_f + rows_g);
    const Matrix t1 = y1 - f_const;
    rhs.head(rows_f) = Eigen::Map<const Vector>(t1.data(), rows_f);
    rhs.tail(rows_g) = Eigen::Map<const Vector>(y2.data(), rows_g);
    const Vector vq = qr.solve(rhs);
    q = Eigen::Map<const Matrix>(vq.data(), n, n);

    if (it % 10 == 9 || it == max_iterations - 1) {
      const Certificate cert = verify_kyp(sys, q, cfg);
      if (cert.valid) return cert;
    }
  }
  const Certificate cert = verify_kyp(sys, q, cfg);
  if (cert.valid) return cert;
  return std::nullopt;
}

namespace detail {

/// Solve the standard-state-space inequality for X = X^T >= 0:
///   [[A^T X + X A, X B - C^T], [B^T X - C, -R]] <= 0,
/// via the stable invariant subspace of the associated Hamiltonian matrix,
/// regularizing R when it is only semidefinite, then polishing with the
/// alternating-projection search if needed.
inline std::optional<Matrix> solve_standard_kyp(const Matrix& A, const Matrix& B,
                                                const Matrix& C, const Matrix& R,
                                                const ToleranceConfig& cfg) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = R.rows();
  if (n == 0) return Matrix(0, 0);

  DescriptorSystem std_sys(Matrix::Identity(n, n), A, B, C, Matrix(0.5 * R));

  auto try_riccati = [&](double eps) -> std::optional<Matrix> {
    const Matrix r_reg = sym(R) + eps * Matrix::Identity(m, m);
    Eigen::LDLT<Matrix> ldlt(r_reg);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
    const Matrix ri_c = ldlt.solve(C);
    const Matrix ri_bt = ldlt.solve(B.transpose());
    const Matrix a_hat = A - B * ri_c;
    const Matrix g = B * ri_bt;
    const Matrix q_hat = C.transpose() * ri_c;
    Matrix ham(2 * n, 2 * n);
    ham << a_hat, g, -q_hat, -a_hat.transpose();
    SchurResult sch;
    try {
      sch = schur_stable_first(ham);
    } catch (const InternalError&) {
      return std::nullopt;
    }
    if (sch.n_stable != n) return std::nullopt;
    const Matrix u1 = sch.Q.topLeftCorner(n, n);
    const Matrix u2 = sch.Q.bottomLeftCorner(n, n);
    Eigen::FullPivLU<Matrix> lu(u1);
    if (!lu.isInvertible()) return std::nullopt;
    return sym(Matrix(u2 * lu.inverse()));
  };

  std::vector<double> regs{0.0, 1e-12, 1e-9, 1e-6};
  const double rscale = std::max(1.0, R.norm());
  for (double eps : regs) {
    auto x = try_riccati(eps * rscale);
    if (!x) continue;
    if (verify_kyp(std_sys, *x, cfg).valid) return sym(*x);
    // Polish a near-miss with the projection search.
    auto polished = search_kyp_certificate(std_sys, cfg, 400, sym(*x));
    if (polished) {
      const Matrix xs = project_psd_sym(polished->Q);
      if (verify_kyp(std_sys, xs, cfg).valid) return xs;
    }
  }
  auto fallback = search_kyp_certificate(std_sys, cfg, 600);
  if (fallback) {
    const Matrix xs = project_psd_sym(fallback->Q);
    if (verify_kyp(std_sys, xs, cfg).valid) return xs;
  }
  return std::nullopt;
}

}  // namespace detail

}  // namespace phr
