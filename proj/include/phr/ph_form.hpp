#pragma once

#include <string>
#include <vector>

#include "phr/config.hpp"
#include "phr/errors.hpp"
#include "phr/numeric.hpp"
#include "phr/system.hpp"

namespace phr {

/// Structural decomposition A = (J-R)Q, B = G-P, C = (G+P)^T Q, D = S+N
/// with J, N skew, S symmetric, Q^T E = E^T Q >= 0 and psd dissipation
/// block [[Q^T R Q, Q^T P], [P^T Q, S]]. Hamiltonian H(x) = x^T E^T Q x / 2.
struct PHForm {
  Matrix E, J, R, Q, G, P, S, N;

  Eigen::Index n() const { return E.rows(); }
  Eigen::Index m() const { return S.rows(); }

  DescriptorSystem reassemble() const {
    return DescriptorSystem(E, (J - R) * Q, G - P, (G + P).transpose() * Q, S + N);
  }

  /// Dissipation block of the power balance equation.
  Matrix coupling_block() const {
    Matrix k(n() + m(), n() + m());
    k << Q.transpose() * R * Q, Q.transpose() * P, P.transpose() * Q, S;
    return k;
  }

  Matrix hamiltonian_matrix() const { return E.transpose() * Q; }
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;  // relative identity residual, 0 where n/a
  double margin = 0.0;    // min eigenvalue margin for psd checks, 0 where n/a
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed = true;

  void add(std::string name, bool passed, double residual, double margin = 0.0) {
    all_passed = all_passed && passed;
    checks.push_back({std::move(name), passed, residual, margin});
  }
};

inline ValidationReport validate_ph(const PHForm& ph, const ToleranceConfig& cfg) {
  cfg.validate();
  ValidationReport rep;
  auto rel = [](const Matrix& err, const Matrix& ref) {
    return err.norm() / std::max(ref.norm(), 1.0);
  };

  const double j_res = rel(ph.J + ph.J.transpose(), ph.J);
  rep.add("J skew-symmetric", j_res <= cfg.residual_tol, j_res);
  const double n_res = rel(ph.N + ph.N.transpose(), ph.N);
  rep.add("N skew-symmetric", n_res <= cfg.residual_tol, n_res);
  const double s_res = rel(ph.S - ph.S.transpose(), ph.S);
  rep.add("S symmetric", s_res <= cfg.residual_tol, s_res);

  const Matrix etq = ph.E.transpose() * ph.Q;
  const double lag_res = rel(ph.Q.transpose() * ph.E - etq, etq);
  rep.add("Q^T E = E^T Q", lag_res <= cfg.residual_tol, lag_res);
  const double etq_margin = lambda_min_sym(etq);
  rep.add("E^T Q >= 0", etq_margin >= -cfg.psd_tol * psd_scale(etq), 0.0, etq_margin);

  const Matrix k = ph.coupling_block();
  const double k_sym = rel(k - k.transpose(), k);
  rep.add("dissipation block symmetric", k_sym <= cfg.residual_tol, k_sym);
  const double k_margin = lambda_min_sym(k);
  rep.add("dissipation block >= 0", k_margin >= -cfg.psd_tol * psd_scale(k), 0.0,
          k_margin);
  return rep;
}

namespace detail {

inline Matrix kyp_lmi_matrix(const DescriptorSystem& sys, const Matrix& Q,
                             const Matrix& W) {
  const auto n = sys.n();
  const auto m = sys.m();
  Matrix lmi(n + m, n + m);
  const Matrix top_left = sys.A.transpose() * Q + Q.transpose() * sys.A;
  const Matrix top_right =
      sys.A.transpose() * W + Q.transpose() * sys.B - sys.C.transpose();
  const Matrix bottom_right = sys.B.transpose() * W + W.transpose() * sys.B -
                              sys.D - sys.D.transpose();
  lmi << top_left, top_right, top_right.transpose(), bottom_right;
  return lmi;
}

}  // namespace detail

/// Splits a certified system along a nonsingular KYP solution Q.
inline PHForm decompose_ph(const DescriptorSystem& sys, const Matrix& Q,
                           const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  if (Q.rows() != sys.n() || Q.cols() != sys.n()) {
    throw InvalidInputError("decompose_ph: Q must be n x n");
  }
  if (!is_nonsingular(Q, cfg)) {
    throw SingularCertificateError(
        "decompose_ph: Q is singular; no pH decomposition along a singular "
        "certificate (all certificates of some behaviorally observable systems "
        "are singular)");
  }
  const Matrix etq = sys.E.transpose() * Q;
  if ((Q.transpose() * sys.E - etq).norm() >
      cfg.residual_tol * std::max(etq.norm(), 1.0)) {
    throw NotACertificateError("decompose_ph: Q^T E != E^T Q");
  }
  if (!is_psd(etq, cfg)) {
    throw NotACertificateError("decompose_ph: E^T Q is not positive semidefinite");
  }
  const Matrix lmi = detail::kyp_lmi_matrix(sys, Q, Matrix::Zero(sys.n(), sys.m()));
  if (!is_nsd(lmi, cfg)) {
    throw NotACertificateError("decompose_ph: the KYP inequality fails for Q");
  }

  Eigen::PartialPivLU<Matrix> qlu(Q);
  const Matrix qit_at = qlu.transpose().solve(sys.A.transpose());  // Q^{-T} A^T
  const Matrix L = qit_at.transpose();                              // A Q^{-1}
  const Matrix qit_ct = qlu.transpose().solve(sys.C.transpose());  // Q^{-T} C^T
  PHForm ph;
  ph.E = sys.E;
  ph.Q = Q;
  ph.J = 0.5 * (L - L.transpose());
  ph.R = -0.5 * (L + L.transpose());
  ph.G = 0.5 * (sys.B + qit_ct);
  ph.P = 0.5 * (-sys.B + qit_ct);
  ph.S = 0.5 * (sys.D + sys.D.transpose());
  ph.N = 0.5 * (sys.D - sys.D.transpose());
  return ph;
}

/// Pointwise algebraic form of the power balance equation:
/// | x^T Q^T (Ax + Bu) + [x;u]^T K [x;u] - y^T u | with K the dissipation
/// block; zero (to roundoff) for every valid PHForm.
inline double power_balance_residual(const PHForm& ph, const Vector& x,
                                     const Vector& u) {
  if (x.size() != ph.n() || u.size() != ph.m()) {
    throw InvalidInputError("power_balance_residual: dimension mismatch");
  }
  const DescriptorSystem sys = ph.reassemble();
  const Vector y = sys.C * x + sys.D * u;
  Vector xu(x.size() + u.size());
  xu << x, u;
  const double dh = x.dot(ph.Q.transpose() * (sys.A * x + sys.B * u));
  const double dissipated = xu.dot(ph.coupling_block() * xu);
  return std::abs(dh + dissipated - y.dot(u));
}

}  // namespace phr
