#pragma once

#include <lapacke.h>

#include <cmath>
#include <complex>

#include "phr/errors.hpp"
#include "phr/numeric.hpp"

namespace phr {
namespace detail {

/// Generalized real Schur form of the pencil lambda*E - A:
/// U*A*V = S (quasi upper triangular), U*E*V = T (upper triangular),
/// eigenvalues (alpha_j, beta_j) with lambda_j = alpha_j / beta_j.
struct QzResult {
  Matrix S, T, U, V;
  Vector alphar, alphai, beta;
  Eigen::Index n_finite = 0;  // leading block size when sorted
};

inline thread_local double g_qz_finite_tol = 0.0;

inline lapack_logical select_finite(const double* /*alphar*/,
                                    const double* /*alphai*/,
                                    const double* beta) {
  return std::abs(*beta) > g_qz_finite_tol ? 1 : 0;
}

/// Sorted/unsorted QZ via LAPACK dgges. When sort_finite_first is set, the
/// finite eigenvalues (|beta| > finite_tol) are moved to the leading block.
inline QzResult qz(const Matrix& E, const Matrix& A, bool sort_finite_first,
                   double finite_tol) {
  const lapack_int n = static_cast<lapack_int>(E.rows());
  QzResult out;
  out.S = A;  // dgges works on the (A, E) pair in LAPACK's (A, B) convention
  out.T = E;
  Matrix vsl = Matrix::Zero(std::max<lapack_int>(n, 1), std::max<lapack_int>(n, 1));
  Matrix vsr = vsl;
  out.alphar.resize(n);
  out.alphai.resize(n);
  out.beta.resize(n);
  if (n == 0) {
    out.U = Matrix::Identity(0, 0);
    out.V = Matrix::Identity(0, 0);
    return out;
  }
  lapack_int sdim = 0;
  g_qz_finite_tol = finite_tol;
  const lapack_int info = LAPACKE_dgges(
      LAPACK_COL_MAJOR, 'V', 'V', sort_finite_first ? 'S' : 'N',
      sort_finite_first ? &select_finite : nullptr, n, out.S.data(), n,
      out.T.data(), n, &sdim, out.alphar.data(), out.alphai.data(),
      out.beta.data(), vsl.data(), n, vsr.data(), n);
  // info == n+2 signals that reordering nudged eigenvalues across the
  // selection boundary; the factorization itself is still valid.
  if (info != 0 && info != n + 2) {
    throw InternalError("qz: LAPACK dgges failed with info " + std::to_string(info));
  }
  out.U = vsl.transpose();
  out.V = vsr;
  out.n_finite = sort_finite_first ? sdim : 0;
  return out;
}

/// Real Schur form with the stable (Re < 0) eigenvalues ordered first:
/// Q^T * M * Q = T.
struct SchurResult {
  Matrix T, Q;
  Eigen::Index n_stable = 0;
};

inline lapack_logical select_stable(const double* wr, const double* /*wi*/) {
  return *wr < 0.0 ? 1 : 0;
}

inline SchurResult schur_stable_first(const Matrix& m) {
  const lapack_int n = static_cast<lapack_int>(m.rows());
  SchurResult out;
  out.T = m;
  out.Q = Matrix::Identity(std::max<lapack_int>(n, 1), std::max<lapack_int>(n, 1));
  if (n == 0) {
    out.Q = Matrix::Identity(0, 0);
    return out;
  }
  lapack_int sdim = 0;
  Vector wr(n), wi(n);
  const lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', &select_stable, n, out.T.data(),
                    n, &sdim, wr.data(), wi.data(), out.Q.data(), n);
  if (info != 0 && info != n + 2) {
    throw InternalError("schur: LAPACK dgees failed with info " + std::to_string(info));
  }
  out.n_stable = sdim;
  return out;
}

}  // namespace detail
}  // namespace phr
