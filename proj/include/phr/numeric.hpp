#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "phr/config.hpp"
#include "phr/errors.hpp"

namespace phr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

/// Effective singular value cutoff for rank decisions.
inline double rank_cutoff(const Matrix& m, const ToleranceConfig& cfg,
                          double sigma_max) {
  const double dim = static_cast<double>(std::max(m.rows(), m.cols()));
  return cfg.rank_rtol * std::max(dim, 1.0) * sigma_max;
}

inline Eigen::Index svd_rank(const Matrix& m, const ToleranceConfig& cfg) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = rank_cutoff(m, cfg, s(0));
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

/// Orthonormal basis of the right null space (n x (n-r), possibly 0 columns).
inline Matrix null_basis(const Matrix& m, const ToleranceConfig& cfg) {
  if (m.size() == 0) return Matrix::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double cut = rank_cutoff(m, cfg, smax);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixV().rightCols(m.cols() - r);
}

inline Matrix left_null_basis(const Matrix& m, const ToleranceConfig& cfg) {
  return null_basis(m.transpose(), cfg);
}

/// Orthonormal basis of the column space (n x r).
inline Matrix range_basis(const Matrix& m, const ToleranceConfig& cfg) {
  if (m.size() == 0 || m.cols() == 0) return Matrix::Zero(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double cut = rank_cutoff(m, cfg, smax);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

/// Smallest eigenvalue of the symmetric part.
inline double lambda_min_sym(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double lambda_max_sym(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

/// Semidefiniteness scale: max(1, ||M||_2) of the symmetric part.
inline double psd_scale(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(m), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double nrm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return std::max(1.0, nrm);
}

/// M >= 0 decided as lambda_min(sym(M)) >= -psd_tol * max(1, ||M||_2).
inline bool is_psd(const Matrix& m, const ToleranceConfig& cfg) {
  if (m.size() == 0) return true;
  return lambda_min_sym(m) >= -cfg.psd_tol * psd_scale(m);
}

inline bool is_nsd(const Matrix& m, const ToleranceConfig& cfg) {
  if (m.size() == 0) return true;
  return lambda_max_sym(m) <= cfg.psd_tol * psd_scale(m);
}

inline double rel_residual(const Matrix& actual, const Matrix& reference) {
  const double denom = std::max(reference.norm(), 1.0);
  return (actual - reference).norm() / denom;
}

inline double orthogonality_defect(const Matrix& u) {
  if (u.size() == 0) return 0.0;
  return (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

inline bool is_nonsingular(const Matrix& m, const ToleranceConfig& cfg) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return svd_rank(m, cfg) == m.rows();
}

/// Projection of a symmetric matrix onto the PSD cone.
inline Matrix project_psd(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(m));
  Vector ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline Matrix project_nsd(const Matrix& m) { return -project_psd(-m); }

/// Minimum norm least squares solve via SVD; reports the residual.
inline Matrix pinv_solve(const Matrix& a, const Matrix& rhs,
                         const ToleranceConfig& cfg, double* residual = nullptr) {
  if (a.size() == 0 || rhs.size() == 0) {
    if (residual) *residual = rhs.norm();
    return Matrix::Zero(a.cols(), rhs.cols());
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cut = rank_cutoff(a, cfg, s.size() ? s(0) : 0.0);
  svd.setThreshold(s.size() && s(0) > 0 ? cut / s(0) : 1.0);
  Matrix x = svd.solve(rhs);
  if (residual) *residual = (a * x - rhs).norm() / std::max(rhs.norm(), 1.0);
  return x;
}

}  // namespace phr
