#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "phr/condensed_forms.hpp"
#include "phr/config.hpp"
#include "phr/errors.hpp"
#include "phr/numeric.hpp"
#include "phr/pencil.hpp"
#include "phr/ph_form.hpp"
#include "phr/positive_real.hpp"
#include "phr/system.hpp"

namespace phr {

/// Decides whether a completely controllable, completely observable and
/// positive real system admits a port-Hamiltonian decomposition as given:
/// this holds exactly when D + D^T is positive semidefinite.
inline bool is_ph_equivalent(const DescriptorSystem& sys,
                             const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  if (!is_completely_controllable(sys, cfg)) {
    throw PreconditionViolationError(
        "is_ph_equivalent: system is not completely controllable");
  }
  if (!is_completely_observable(sys, cfg)) {
    throw PreconditionViolationError(
        "is_ph_equivalent: system is not completely observable");
  }
  const auto verdict = check_pr_sampling(sys, cfg);
  if (verdict.status == PrStatus::not_pr) {
    throw NotPositiveRealError("is_ph_equivalent: " + verdict.detail);
  }
  return is_psd(sym(sys.D + sys.D.transpose()), cfg);
}

/// Output-side shift: W with E^T W = 0 such that the modified system
/// (E, A, B, C - W^T A, D - W^T B) has the same transfer function and a
/// positive semidefinite symmetric feedthrough part.
struct ShiftMatrix {
  Matrix W;
  double alpha = 0.0;
  double beta = 0.0;
  bool observable_after_shift = true;
};

namespace detail {

inline double default_shift_alpha(const Matrix& c33, const Matrix& a33,
                                  const Matrix& s33, const Matrix& b33) {
  const Eigen::Index mu3 = a33.rows();
  if (mu3 == 0) return 1.0;
  Matrix stack(2 * mu3, mu3);
  stack << c33, a33;
  const Eigen::HouseholderQR<Matrix> qr(stack);
  const Matrix p = Matrix(qr.householderQ()).transpose();
  Matrix rhs(2 * mu3, mu3);
  rhs << s33, 2.0 * b33;
  const Matrix lam = p * rhs;
  const Matrix lam2 = lam.bottomRows(mu3);
  const Matrix p21 = p.bottomLeftCorner(mu3, mu3);
  Eigen::FullPivLU<Matrix> lu(p21);
  if (!lu.isInvertible()) {
    throw InternalError("default_shift_alpha: singular corner block");
  }
  const Matrix ratio = lu.solve(lam2);
  const Eigen::EigenSolver<Matrix> es(ratio);
  double rho = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    rho = std::max(rho, std::abs(es.eigenvalues()(i)));
  }
  return 1.1 * (1.0 + rho);
}

}  // namespace detail

inline ShiftMatrix compute_feedthrough_shift(
    const DescriptorSystem& sys, const ToleranceConfig& cfg,
    std::optional<double> alpha_opt = std::nullopt,
    std::optional<double> beta_opt = std::nullopt) {
  sys.check_dimensions();
  cfg.validate();
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();

  if (!alpha_opt && !beta_opt && is_psd(sym(sys.D + sys.D.transpose()), cfg)) {
    ShiftMatrix sm;
    sm.W = Matrix::Zero(n, m);
    sm.observable_after_shift = is_completely_observable(sys, cfg);
    return sm;
  }

  const auto st = infinity_staircase(sys, cfg);
  const Eigen::Index mu2 = st.mu2, mu3 = st.mu3, m1 = st.m1();
  const Matrix s11 = st.Sblk(0, 0);
  if (!is_psd(sym(s11), cfg)) {
    throw NotPositiveRealError(
        "compute_feedthrough_shift: the symmetric feedthrough part restricted "
        "to the kernel input directions is indefinite");
  }
  const Matrix s12 = st.Sblk(0, 1);
  const Matrix s13 = st.Sblk(0, 2);
  const Matrix s22 = st.Sblk(1, 1);
  const Matrix s23 = st.Sblk(1, 2);
  const Matrix s33 = st.Sblk(2, 2);
  const Matrix ct = st.L.transpose() * st.tC;  // L^T C V
  const Matrix c33 = ct.bottomRightCorner(mu3, mu3);

  const double beta = beta_opt.value_or(mu2 > 0 ? 2.0 : 0.0);
  if (beta < 0.0) throw InvalidInputError("compute_feedthrough_shift: beta < 0");

  auto build = [&](double alpha) {
    ShiftMatrix sm;
    sm.alpha = alpha;
    sm.beta = beta;
    Matrix w_hat = Matrix::Zero(n, m);
    const Eigen::Index k = mu2 + mu3;
    if (k > 0) {
      Matrix t(k, k);
      t << st.B22(), st.B23(), Matrix::Zero(mu3, mu2), st.B33();
      Matrix rhs(m1 + mu2, k);
      rhs << s12, s13, 0.5 * (s22 - beta * Matrix::Identity(mu2, mu2)), s23;
      const Matrix wblk =
          t.transpose().fullPivLu().solve(Matrix(rhs.transpose()));
      w_hat.block(st.mu1, 0, k, m1 + mu2) = wblk;
      if (mu3 > 0) {
        const Matrix w33 = st.B33().transpose().fullPivLu().solve(
            Matrix(0.5 * (s33 - alpha * Matrix::Identity(mu3, mu3))));
        w_hat.block(st.mu1 + mu2, m1 + mu2, mu3, mu3) = w33;
      }
    }
    sm.W = st.U.transpose() * w_hat * st.L.transpose();
    return sm;
  };

  double alpha = alpha_opt.value_or(
      detail::default_shift_alpha(c33, st.A33(), s33, st.B33()));
  if (alpha <= 0.0) throw InvalidInputError("compute_feedthrough_shift: alpha <= 0");

  ShiftMatrix sm = build(alpha);
  for (int attempt = 0; attempt < 4; ++attempt) {
    DescriptorSystem shifted(sys.E, sys.A, sys.B,
                             Matrix(sys.C - sm.W.transpose() * sys.A),
                             Matrix(sys.D - sm.W.transpose() * sys.B));
    sm.observable_after_shift = is_completely_observable(shifted, cfg);
    if (sm.observable_after_shift || alpha_opt) break;
    alpha *= 1.7;
    sm = build(alpha);
  }

  const double etw = (sys.E.transpose() * sm.W).norm();
  if (etw > cfg.residual_tol * std::max(1.0, sys.E.norm() * sm.W.norm())) {
    throw InternalError("compute_feedthrough_shift: E^T W does not vanish");
  }
  const Matrix d_new =
      sym(sys.D + sys.D.transpose() - sys.B.transpose() * sm.W -
          sm.W.transpose() * sys.B);
  if (!is_psd(d_new, cfg)) {
    throw InternalError(
        "compute_feedthrough_shift: shifted feedthrough is not positive "
        "semidefinite");
  }
  return sm;
}

/// Constructive single-matrix certificate for a completely controllable,
/// completely observable, positive real system with D + D^T >= 0, assembled
/// block by block from the refined condensed form.
inline Matrix construct_ph_certificate(const DescriptorSystem& sys,
                                       const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  const auto rf = refined_form(sys, cfg);
  const Eigen::Index n1 = rf.n1, n2 = rf.n2, n3 = rf.n3, m1 = rf.m1;
  const Eigen::Index n = sys.n();

  const Matrix s11 = rf.Sblk(0, 0), s12 = rf.Sblk(0, 1), s13 = rf.Sblk(0, 2);
  const Matrix s22 = rf.Sblk(1, 1), s23 = rf.Sblk(1, 2), s33 = rf.Sblk(2, 2);
  const Matrix c11 = rf.Cblk(0, 0), c21 = rf.Cblk(1, 0), c31 = rf.Cblk(2, 0);
  const Matrix c13 = rf.Cblk(0, 2), c14 = rf.Cblk(0, 3);
  const Matrix c22 = rf.Cblk(1, 1), c23 = rf.Cblk(1, 2), c24 = rf.Cblk(1, 3);
  const Matrix c33 = rf.Cblk(2, 2), c34 = rf.Cblk(2, 3);
  const Matrix b21 = rf.B21();

  // Lower right block of the finite-part inequality; its negative is the
  // symmetric feedthrough of the equivalent standard system.
  const Eigen::Index mm = sys.m();
  Matrix mlow(mm, mm);
  {
    const Matrix m12 = -s12 + c13 + b21.transpose() * c22.transpose();
    const Matrix m13 = -s13 + c14;
    const Matrix m23 = -s23 + c24 + c33.transpose();
    mlow.block(0, 0, m1, m1) = -s11;
    mlow.block(0, m1, m1, n2) = m12;
    mlow.block(0, m1 + n2, m1, n3) = m13;
    mlow.block(m1, 0, n2, m1) = m12.transpose();
    mlow.block(m1, m1, n2, n2) = -s22 + c23 + c23.transpose();
    mlow.block(m1, m1 + n2, n2, n3) = m23;
    mlow.block(m1 + n2, 0, n3, m1) = m13.transpose();
    mlow.block(m1 + n2, m1, n3, n2) = m23.transpose();
    mlow.block(m1 + n2, m1 + n2, n3, n3) = -s33 + c34 + c34.transpose();
  }

  const Matrix b_top = rf.tB.topRows(n1);
  const Matrix c_left = rf.tC.leftCols(n1);
  const auto q11_opt =
      detail::solve_standard_kyp(rf.A1(), b_top, c_left, sym(Matrix(-mlow)), cfg);
  if (!q11_opt) {
    throw StructureError("construct_ph_certificate",
                         "no solution of the finite-part inequality was found");
  }
  const Matrix q11 = *q11_opt;

  // Factor the coupled feedthrough rows through the kernel-input block.
  Matrix k(m1, n2 + n3);
  if (m1 > 0 && n2 + n3 > 0) {
    Matrix rhs(m1, n2 + n3);
    rhs << s12, s13;
    double resid = 0.0;
    k = pinv_solve(s11, rhs, cfg, &resid);
    if (resid > cfg.residual_tol * std::max(1.0, rhs.norm())) {
      throw StructureError("construct_ph_certificate",
                           "feedthrough factorization is inconsistent; the "
                           "system cannot be positive real");
    }
  }

  Matrix q3344(n2 + n3, n2 + n3);
  {
    Matrix base(n2 + n3, n2 + n3);
    base.topLeftCorner(n2, n2) = -s22 + c23;
    base.topRightCorner(n2, n3) = -s23 + c24;
    base.bottomLeftCorner(n3, n2) = (-s23).transpose() + c33;
    base.bottomRightCorner(n3, n3) = -s33 + c34;
    Matrix row(m1, n2 + n3);
    if (n2 + n3 > 0) {
      row << -s12 + b21.transpose() * c22 + c13, -s13 + c14;
    }
    q3344 = base - k.transpose() * row;
  }
  const Matrix q33 = q3344.topLeftCorner(n2, n2);
  const Matrix q34 = q3344.topRightCorner(n2, n3);
  const Matrix q43 = q3344.bottomLeftCorner(n3, n2);
  const Matrix q44 = q3344.bottomRightCorner(n3, n3);

  // Couplings against the leading block via a consistent factorization.
  Matrix xfac(mm, n2 + n3);
  if (n2 + n3 > 0) {
    Matrix rhs(mm, n2 + n3);
    rhs.block(0, 0, m1, n2) = -b21.transpose() * c22.transpose() - c13;
    rhs.block(0, n2, m1, n3) = -c14;
    rhs.block(m1, 0, n2, n2) = -q33.transpose() - c23;
    rhs.block(m1, n2, n2, n3) = -q43.transpose() - c24;
    rhs.block(m1 + n2, 0, n3, n2) = -q34.transpose() - c33;
    rhs.block(m1 + n2, n2, n3, n3) = -q44.transpose() - c34;
    double resid = 0.0;
    xfac = pinv_solve(mlow, rhs, cfg, &resid);
    if (resid > cfg.residual_tol * std::max(1.0, rhs.norm())) {
      throw StructureError("construct_ph_certificate",
                           "coupling factorization is inconsistent");
    }
    Matrix lam_row(n2 + n3, mm);
    lam_row.block(0, 0, n2, m1) = -c22 * b21 - c13.transpose();
    lam_row.block(0, m1, n2, n2) = -q33 - c23.transpose();
    lam_row.block(0, m1 + n2, n2, n3) = -q34 - c33.transpose();
    lam_row.block(n2, 0, n3, m1) = -c14.transpose();
    lam_row.block(n2, m1, n3, n2) = -q43 - c24.transpose();
    lam_row.block(n2, m1 + n2, n3, n3) = -q44 - c34.transpose();
    Matrix lambda(n2 + n3, n2 + n3);
    lambda.topLeftCorner(n2, n2) = q33 + q33.transpose();
    lambda.topRightCorner(n2, n3) = q34 + q43.transpose();
    lambda.bottomLeftCorner(n3, n2) = q43 + q34.transpose();
    lambda.bottomRightCorner(n3, n3) = q44 + q44.transpose();
    lambda -= lam_row * xfac;
    if (!is_nsd(sym(lambda), cfg)) {
      throw StructureError("construct_ph_certificate",
                           "residual coupling block is not negative "
                           "semidefinite");
    }
  }

  Matrix q31_41(n2 + n3, n1);
  if (n2 + n3 > 0 && n1 > 0) {
    const Matrix stack = b_top.transpose() * q11 - c_left;
    q31_41 = xfac.transpose() * stack;
  } else {
    q31_41.setZero();
  }
  const Matrix q23 = Matrix(-c22);

  Matrix qmid = Matrix::Zero(n, n);
  const Eigen::Index o2 = n1, o3 = n1 + n2, o4 = n1 + 2 * n2;
  qmid.topLeftCorner(n1, n1) = q11;
  qmid.block(o2, o3, n2, n2) = q23;
  qmid.block(o3, 0, n2, n1) = q31_41.topRows(n2);
  qmid.block(o4, 0, n3, n1) = q31_41.bottomRows(n3);
  qmid.block(o3, o2, n2, n2) = -q23.transpose();
  qmid.block(o3, o3, n2, n2) = q33;
  qmid.block(o3, o4, n2, n3) = q34;
  qmid.block(o4, o3, n3, n2) = q43;
  qmid.block(o4, o4, n3, n3) = q44;

  // Q = X^T Qmid Y^{-1}, solved rather than formed with an explicit inverse.
  const Matrix qt = rf.Y.transpose().fullPivLu().solve(
      Matrix(qmid.transpose() * rf.X));
  Matrix q = qt.transpose();

  Certificate cert = verify_kyp(sys, q, cfg);
  if (!cert.valid) {
    auto polished = search_kyp_certificate(sys, cfg, 400, q);
    if (!polished) {
      throw StructureError("construct_ph_certificate",
                           "assembled certificate failed verification");
    }
    q = polished->Q;
  }
  return q;
}

struct RealizationProvenance {
  std::string path;  // "direct", "shift" or "infinity-split"
  Matrix W;          // empty when no shift was applied
  double alpha = 0.0;
  double beta = 0.0;
  std::array<Eigen::Index, 5> staircase_blocks{};
  Matrix M0, M1;  // infinity-split data (empty otherwise)
  double tf_max_rel_err = 0.0;
  std::vector<std::string> notes;
};

struct RealizationResult {
  DescriptorSystem system;  // the realization itself
  PHForm ph;
  Certificate certificate;
  RealizationProvenance provenance;
};

struct RealizeOptions {
  std::optional<double> alpha;
  std::optional<double> beta;
};

namespace detail {

inline RealizationResult finish_realization(const DescriptorSystem& original,
                                            const DescriptorSystem& realization,
                                            const Matrix& q,
                                            RealizationProvenance provenance,
                                            const ToleranceConfig& cfg) {
  const Certificate cert = verify_kyp(realization, q, cfg);
  if (!cert.valid) {
    throw StructureError("realize", "certificate failed final verification");
  }
  PHForm ph = decompose_ph(realization, q, cfg);
  const auto report = validate_ph(ph, cfg);
  if (!report.all_passed) {
    std::string failed;
    for (const auto& c : report.checks) {
      if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    }
    throw StructureError("realize", "decomposition checks failed: " + failed);
  }
  const auto tfc = tf_equivalent(original, realization, cfg);
  if (!tfc.equivalent) {
    throw InternalError(
        "realize: transfer functions of the input and the realization differ");
  }
  RealizationResult result{realization, std::move(ph), cert,
                           std::move(provenance)};
  result.provenance.tf_max_rel_err = tfc.max_rel_err;
  return result;
}

}  // namespace detail

/// Full pipeline: reduce to a minimal subsystem, shift the feedthrough if
/// needed, construct and verify a certificate, and split it into the
/// port-Hamiltonian coefficients.
inline RealizationResult realize_ph(const DescriptorSystem& sys,
                                    const ToleranceConfig& cfg,
                                    const RealizeOptions& options = {}) {
  sys.check_dimensions();
  cfg.validate();
  if (!check_regular(sys, cfg).regular) {
    throw PencilSingularError("realize_ph: pencil (E, A) is singular");
  }
  const auto verdict = check_pr_sampling(sys, cfg);
  if (verdict.status == PrStatus::not_pr) {
    throw NotPositiveRealError("realize_ph: " + verdict.detail);
  }

  const auto st = controllability_observability_staircase(sys, cfg);
  const DescriptorSystem minimal = minimal_subsystem(sys, cfg);

  RealizationProvenance prov;
  prov.staircase_blocks = st.block_sizes;

  DescriptorSystem realization = minimal;
  if (!options.alpha && !options.beta &&
      is_psd(sym(minimal.D + minimal.D.transpose()), cfg)) {
    prov.path = "direct";
    prov.W = Matrix::Zero(minimal.n(), minimal.m());
  } else {
    const ShiftMatrix sm =
        compute_feedthrough_shift(minimal, cfg, options.alpha, options.beta);
    prov.path = sm.W.isZero(0.0) ? "direct" : "shift";
    prov.W = sm.W;
    prov.alpha = sm.alpha;
    prov.beta = sm.beta;
    if (!sm.observable_after_shift) {
      throw StructureError("realize_ph",
                           "shifted output map lost complete observability");
    }
    realization = DescriptorSystem(
        minimal.E, minimal.A, minimal.B,
        Matrix(minimal.C - sm.W.transpose() * minimal.A),
        Matrix(minimal.D - sm.W.transpose() * minimal.B));
  }

  const Matrix q = construct_ph_certificate(realization, cfg);
  return detail::finish_realization(sys, realization, q, std::move(prov), cfg);
}

/// Alternative pipeline that splits the transfer function into its proper
/// part and the polynomial part D + s M1, realizing the latter with an
/// explicit lossless block.
inline RealizationResult realize_infinity_split(const DescriptorSystem& sys,
                                                const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  if (!check_regular(sys, cfg).regular) {
    throw PencilSingularError("realize_infinity_split: pencil (E, A) is singular");
  }
  const auto verdict = check_pr_sampling(sys, cfg);
  if (verdict.status == PrStatus::not_pr) {
    throw NotPositiveRealError("realize_infinity_split: " + verdict.detail);
  }
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();

  const auto split = finite_infinite_split(sys.E, sys.A, cfg);
  const Eigen::Index nf = split.n_finite;
  const Eigen::Index q = n - nf;

  // Decouple the off-diagonal blocks with a generalized Sylvester solve.
  Matrix bt = split.U * sys.B;
  Matrix ct = sys.C * split.V;
  Matrix m0 = sys.D;
  Matrix m1 = Matrix::Zero(m, m);
  if (q > 0) {
    const Matrix e22 = split.E22();
    const Matrix a22 = split.A22();
    if (nf > 0) {
      const Matrix e11 = split.E11();
      const Matrix a11 = split.A11();
      const Matrix e12 = split.tE.topRightCorner(nf, q);
      const Matrix a12 = split.tA.topRightCorner(nf, q);
      // Unknowns (T, S): E11 T + S E22 = -E12, A11 T + S A22 = -A12.
      const Eigen::Index nt = nf * q;
      Matrix sys_mat = Matrix::Zero(2 * nt, 2 * nt);
      Vector rhs(2 * nt);
      const Matrix id_q = Matrix::Identity(q, q);
      const Matrix id_nf = Matrix::Identity(nf, nf);
      auto kron = [](const Matrix& a, const Matrix& b) {
        Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
          for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
          }
        }
        return out;
      };
      sys_mat.topLeftCorner(nt, nt) = kron(id_q, e11);
      sys_mat.topRightCorner(nt, nt) = kron(e22.transpose(), id_nf);
      sys_mat.bottomLeftCorner(nt, nt) = kron(id_q, a11);
      sys_mat.bottomRightCorner(nt, nt) = kron(a22.transpose(), id_nf);
      rhs.head(nt) = -Eigen::Map<const Vector>(e12.data(), nt);
      rhs.tail(nt) = -Eigen::Map<const Vector>(a12.data(), nt);
      const Vector sol = sys_mat.colPivHouseholderQr().solve(rhs);
      const Matrix t_blk = Eigen::Map<const Matrix>(sol.data(), nf, q);
      const Matrix s_blk = Eigen::Map<const Matrix>(sol.data() + nt, nf, q);
      const double sylv_resid =
          (e11 * t_blk + s_blk * e22 + e12).norm() +
          (a11 * t_blk + s_blk * a22 + a12).norm();
      if (sylv_resid > cfg.residual_tol *
                           std::max({1.0, split.tE.norm(), split.tA.norm()})) {
        throw InternalError("realize_infinity_split: decoupling solve failed");
      }
      bt.topRows(nf) += s_blk * bt.bottomRows(q);
      ct.rightCols(q) = ct.leftCols(nf) * t_blk + ct.rightCols(q);
    }
    // Polynomial part from the nilpotent block.
    const Eigen::PartialPivLU<Matrix> a22_lu(a22);
    const Matrix nmat = a22_lu.solve(e22);
    const Matrix ainv_b = a22_lu.solve(bt.bottomRows(q));
    const Matrix c_inf = ct.rightCols(q);
    m0 = sys.D - c_inf * ainv_b;
    m1 = -c_inf * nmat * ainv_b;
  }

  const double m1_scale = std::max(1.0, m1.norm());
  if ((m1 - m1.transpose()).norm() > cfg.residual_tol * m1_scale ||
      !is_psd(sym(m1), cfg)) {
    throw NotPositiveRealError(
        "realize_infinity_split: the polynomial coefficient is not symmetric "
        "positive semidefinite");
  }
  m1 = sym(m1);

  // Minimal proper part and its certificate.
  DescriptorSystem proper(split.E11(), split.A11(), Matrix(bt.topRows(nf)),
                          Matrix(ct.leftCols(nf)), m0);
  const DescriptorSystem proper_min = minimal_subsystem(proper, cfg);
  const Eigen::Index np = proper_min.n();
  Matrix qp(np, np);
  {
    const Eigen::PartialPivLU<Matrix> ep_lu(proper_min.E);
    const Matrix a_std = proper_min.A * ep_lu.inverse();
    const Matrix c_std = proper_min.C * ep_lu.inverse();
    const auto x = detail::solve_standard_kyp(
        a_std, proper_min.B, c_std, sym(Matrix(m0 + m0.transpose())), cfg);
    if (!x) {
      throw StructureError("realize_infinity_split",
                           "no certificate for the proper part was found");
    }
    qp = *x * proper_min.E;
  }

  // Assemble the proper part with a lossless block carrying M1.
  const Eigen::Index na = np + 2 * m;
  Matrix e_new = Matrix::Zero(na, na);
  e_new.topLeftCorner(np, np) = proper_min.E;
  e_new.block(np, np, m, m) = m1;
  Matrix a_new = Matrix::Zero(na, na);
  a_new.topLeftCorner(np, np) = proper_min.A;
  a_new.block(np, np + m, m, m) = -Matrix::Identity(m, m);
  a_new.block(np + m, np, m, m) = Matrix::Identity(m, m);
  Matrix b_new = Matrix::Zero(na, m);
  b_new.topRows(np) = proper_min.B;
  b_new.bottomRows(m) = Matrix::Identity(m, m);
  Matrix c_new = Matrix::Zero(m, na);
  c_new.leftCols(np) = proper_min.C;
  c_new.rightCols(m) = Matrix::Identity(m, m);
  const DescriptorSystem realization(e_new, a_new, b_new, c_new, m0);

  Matrix q_cert = Matrix::Identity(na, na);
  q_cert.topLeftCorner(np, np) = qp;

  RealizationProvenance prov;
  prov.path = "infinity-split";
  prov.M0 = m0;
  prov.M1 = m1;
  const double m1_norm = m1.norm();
  if (m1_norm > 0.0 && m1_norm < 1e-6 * std::max(1.0, sys.E.norm())) {
    prov.notes.push_back(
        "polynomial coefficient is tiny but nonzero; the split is "
        "perturbation sensitive");
  }
  return detail::finish_realization(sys, realization, q_cert, std::move(prov),
                                    cfg);
}

}  // namespace phr
