#pragma once

#include <array>
#include <complex>
#include <vector>

#include "phr/config.hpp"
#include "phr/errors.hpp"
#include "phr/numeric.hpp"
#include "phr/pencil.hpp"
#include "phr/system.hpp"

namespace phr {

namespace detail {

/// Orthonormal left null space basis of a complex matrix.
inline ComplexMatrix complex_left_null_basis(const ComplexMatrix& m,
                                             const ToleranceConfig& cfg) {
  if (m.size() == 0) return ComplexMatrix::Identity(m.rows(), m.rows());
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double dim = static_cast<double>(std::max(m.rows(), m.cols()));
  const double cut = cfg.rank_rtol * std::max(dim, 1.0) * smax;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().rightCols(m.rows() - r);
}

/// Orthonormal basis for the union of the real and imaginary column spans.
inline Matrix realify_basis(const ComplexMatrix& w, const ToleranceConfig& cfg) {
  Matrix stacked(w.rows(), 2 * w.cols());
  stacked << w.real(), w.imag();
  return range_basis(stacked, cfg);
}

struct DeflationResult {
  Matrix U, V;          // orthogonal, tX = U * X * V
  Matrix tE, tA, tB;
  Eigen::Index n_keep = 0;     // leading controllable block
  Eigen::Index n_fin = 0;      // deflated block with nonsingular E part
  Eigen::Index n_inf = 0;      // deflated block with only infinite spectrum
};

/// Deflates the uncontrollable part of (E, A, B) to the trailing rows and
/// columns (block upper triangular, zero trailing B rows), then orders the
/// deflated pencil with its finite spectrum first.
inline DeflationResult deflate_uncontrollable(const Matrix& E, const Matrix& A,
                                              const Matrix& B,
                                              const ToleranceConfig& cfg) {
  const Eigen::Index n = E.rows();
  DeflationResult out;
  out.U = Matrix::Identity(n, n);
  out.V = Matrix::Identity(n, n);
  out.tE = E;
  out.tA = A;
  out.tB = B;

  Eigen::Index k = n;
  while (k > 0) {
    const Matrix e_act = out.tE.topLeftCorner(k, k);
    const Matrix a_act = out.tA.topLeftCorner(k, k);
    const Matrix b_act = out.tB.topRows(k);

    // Left null directions of [E B] (uncontrollable at infinity), else of
    // [lambda E - A, B] at a finite eigenvalue of the active pencil.
    const Eigen::Index m_in = b_act.cols();
    Matrix left(k, 0);
    {
      Matrix eb(k, k + m_in);
      eb.leftCols(k) = e_act;
      if (m_in > 0) eb.rightCols(m_in) = b_act;
      left = left_null_basis(eb, cfg);
    }
    if (left.cols() == 0) {
      std::vector<std::complex<double>> seen;
      for (const auto& ev : generalized_eigenvalues(e_act, a_act, cfg)) {
        if (!ev.finite || ev.value.imag() < 0.0) continue;
        bool duplicate = false;
        for (const auto& lam : seen) {
          if (std::abs(lam - ev.value) <= 1e-8 * (1.0 + std::abs(lam))) {
            duplicate = true;
            break;
          }
        }
        if (duplicate) continue;
        seen.push_back(ev.value);
        ComplexMatrix pen(k, k + m_in);
        pen.leftCols(k) = ev.value * e_act.cast<std::complex<double>>() -
                          a_act.cast<std::complex<double>>();
        if (m_in > 0) pen.rightCols(m_in) = b_act.cast<std::complex<double>>();
        const ComplexMatrix wc = complex_left_null_basis(pen, cfg);
        if (wc.cols() > 0) {
          left = realify_basis(wc, cfg);
          break;
        }
      }
    }
    if (left.cols() == 0) break;

    const Eigen::Index p = left.cols();
    Matrix span(k, 2 * p);
    span << e_act.transpose() * left, a_act.transpose() * left;
    const Matrix v2 = range_basis(span, cfg);
    if (v2.cols() != p) {
      throw InternalError("deflate_uncontrollable: deflation subspace is not reducing");
    }
    const Matrix u1 = null_basis(left.transpose(), cfg);
    const Matrix v1 = null_basis(v2.transpose(), cfg);
    Matrix uk(k, k), vk(k, k);
    uk << u1, left;
    vk << v1, v2;

    out.tE.topRows(k) = uk.transpose() * out.tE.topRows(k);
    out.tA.topRows(k) = uk.transpose() * out.tA.topRows(k);
    out.tB.topRows(k) = uk.transpose() * out.tB.topRows(k);
    out.tE.leftCols(k) = out.tE.leftCols(k) * vk;
    out.tA.leftCols(k) = out.tA.leftCols(k) * vk;
    out.U.topRows(k) = uk.transpose() * out.U.topRows(k);
    out.V.leftCols(k) = out.V.leftCols(k) * vk;
    k -= p;
  }
  out.n_keep = k;

  const Eigen::Index q = n - k;
  if (q > 0) {
    const auto split = finite_infinite_split(out.tE.bottomRightCorner(q, q),
                                             out.tA.bottomRightCorner(q, q), cfg);
    out.tE.bottomRows(q) = split.U * out.tE.bottomRows(q);
    out.tA.bottomRows(q) = split.U * out.tA.bottomRows(q);
    out.tB.bottomRows(q) = split.U * out.tB.bottomRows(q);
    out.tE.rightCols(q) = out.tE.rightCols(q) * split.V;
    out.tA.rightCols(q) = out.tA.rightCols(q) * split.V;
    out.U.bottomRows(q) = split.U * out.U.bottomRows(q);
    out.V.rightCols(q) = out.V.rightCols(q) * split.V;
    out.n_fin = split.n_finite;
    out.n_inf = q - split.n_finite;
  }
  return out;
}

}  // namespace detail

/// Controllability-observability staircase: orthogonal U, V with
///   U E V, U A V   block patterned over sizes (n1, n2, n3, n4, n5),
///   U B zero on the last two (uncontrollable) block rows,
///   C V zero on the unobservable block columns 2 and 3.
/// The leading n1 subsystem is completely controllable and observable.
struct StaircaseForm {
  Matrix U, V;
  std::array<Eigen::Index, 5> block_sizes{};
  Matrix tE, tA, tB, tC;

  Eigen::Index n1() const { return block_sizes[0]; }
};

inline StaircaseForm controllability_observability_staircase(
    const DescriptorSystem& sys, const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  const Eigen::Index n = sys.n();

  // Phase 1: deflate the uncontrollable part to the bottom right.
  auto ctrl = detail::deflate_uncontrollable(sys.E, sys.A, sys.B, cfg);
  StaircaseForm st;
  st.U = ctrl.U;
  st.V = ctrl.V;
  st.tE = ctrl.tE;
  st.tA = ctrl.tA;
  st.tB = ctrl.tB;
  st.tC = sys.C * ctrl.V;
  const Eigen::Index nc = ctrl.n_keep;
  const Eigen::Index n4 = ctrl.n_fin;
  const Eigen::Index n5 = ctrl.n_inf;

  // Phase 2: observability deflation of the controllable block, via the
  // controllability deflation of the transposed subsystem.
  Eigen::Index n1 = nc, n2 = 0, n3 = 0;
  if (nc > 0) {
    const Matrix es = st.tE.topLeftCorner(nc, nc);
    const Matrix as = st.tA.topLeftCorner(nc, nc);
    const Matrix cs = st.tC.leftCols(nc);
    auto obs = detail::deflate_uncontrollable(es.transpose(), as.transpose(),
                                              cs.transpose(), cfg);
    // Transposing back turns (U_t, V_t) into column and row transforms.
    const Matrix row_t = obs.V.transpose();  // applied from the left
    const Matrix col_t = obs.U.transpose();  // applied from the right (orthogonal)
    st.tE.topRows(nc) = row_t * st.tE.topRows(nc);
    st.tA.topRows(nc) = row_t * st.tA.topRows(nc);
    st.tB.topRows(nc) = row_t * st.tB.topRows(nc);
    st.tE.leftCols(nc) = st.tE.leftCols(nc) * col_t;
    st.tA.leftCols(nc) = st.tA.leftCols(nc) * col_t;
    st.tC.leftCols(nc) = st.tC.leftCols(nc) * col_t;
    st.U.topRows(nc) = row_t * st.U.topRows(nc);
    st.V.leftCols(nc) = st.V.leftCols(nc) * col_t;
    n1 = obs.n_keep;
    n2 = obs.n_fin;
    n3 = obs.n_inf;
  }
  st.block_sizes = {n1, n2, n3, n4, n5};
  return st;
}

inline bool is_completely_controllable(const DescriptorSystem& sys,
                                       const ToleranceConfig& cfg) {
  const auto ctrl = detail::deflate_uncontrollable(sys.E, sys.A, sys.B, cfg);
  return ctrl.n_keep == sys.n();
}

inline bool is_completely_observable(const DescriptorSystem& sys,
                                     const ToleranceConfig& cfg) {
  const auto obs = detail::deflate_uncontrollable(
      sys.E.transpose(), sys.A.transpose(), sys.C.transpose(), cfg);
  return obs.n_keep == sys.n();
}

/// Rank test of [lambda E - A; C] over the finite spectrum only; weaker than
/// complete observability, which also tests the infinite pair via [E; C].
inline bool is_behaviorally_observable(const DescriptorSystem& sys,
                                       const ToleranceConfig& cfg) {
  sys.check_dimensions();
  const Eigen::Index n = sys.n();
  if (n == 0) return true;
  for (const auto& ev : generalized_eigenvalues(sys.E, sys.A, cfg)) {
    if (!ev.finite) continue;
    ComplexMatrix stacked(n + sys.m(), n);
    stacked.topRows(n) = ev.value * sys.E.cast<std::complex<double>>() -
                         sys.A.cast<std::complex<double>>();
    stacked.bottomRows(sys.m()) = sys.C.cast<std::complex<double>>();
    Eigen::JacobiSVD<ComplexMatrix> svd(stacked);
    const auto& sv = svd.singularValues();
    if (sv.size() < n ||
        sv(n - 1) <= cfg.rank_rtol * std::max<double>(stacked.rows(), 1) *
                         sv(0)) {
      return false;
    }
  }
  return true;
}

/// Leading block of the staircase: a completely controllable and observable
/// realization of the same transfer function.
inline DescriptorSystem minimal_subsystem(const DescriptorSystem& sys,
                                          const ToleranceConfig& cfg) {
  if (!check_regular(sys, cfg).regular) {
    throw PencilSingularError("minimal_subsystem: pencil (E, A) is singular");
  }
  const auto st = controllability_observability_staircase(sys, cfg);
  const Eigen::Index n1 = st.n1();
  DescriptorSystem min(st.tE.topLeftCorner(n1, n1), st.tA.topLeftCorner(n1, n1),
                       st.tB.topRows(n1), st.tC.leftCols(n1), sys.D);
  if (!check_regular(min, cfg).regular) {
    throw InternalError("minimal_subsystem: leading staircase pencil is singular");
  }
  if (!is_completely_controllable(min, cfg) || !is_completely_observable(min, cfg)) {
    throw InternalError("minimal_subsystem: leading block failed the minimality check");
  }
  return min;
}

namespace detail {

/// Orthogonal W compressing the k1+k2 rows of M against its trailing
/// columns: M * W = [0 | T] with T = [[T11, T12], [0, T22]] and T11 (k1 x k1),
/// T22 (k2 x k2) nonsingular. Requires M of full row rank.
inline Matrix compress_rows_right(const Matrix& m, Eigen::Index k1,
                                  Eigen::Index k2, const ToleranceConfig& cfg) {
  const Eigen::Index k = k1 + k2;
  const Eigen::Index cols = m.cols();
  if (m.rows() != k) throw InternalError("compress_rows_right: bad partition");
  if (k == 0) return Matrix::Identity(cols, cols);
  if (svd_rank(m, cfg) != k) {
    throw StructureError("compress_rows_right", "rows are rank deficient");
  }
  Matrix w1(cols, 0);
  if (k1 > 0) {
    if (k2 > 0) {
      // Row-space directions annihilated by the bottom rows.
      const Matrix m2 = m.bottomRows(k2);
      const Matrix kernel_coords = null_basis(m2 * m.transpose(), cfg);
      w1 = range_basis(m.transpose() * kernel_coords, cfg);
    } else {
      w1 = range_basis(m.transpose(), cfg);
    }
  }
  if (w1.cols() != k1) {
    throw StructureError("compress_rows_right", "unexpected kernel dimension");
  }
  Matrix w2(cols, 0);
  if (k2 > 0) {
    const Matrix row_space = range_basis(m.transpose(), cfg);
    w2 = range_basis(row_space - w1 * (w1.transpose() * row_space), cfg);
  }
  if (w2.cols() != k2) {
    throw StructureError("compress_rows_right", "unexpected row space split");
  }
  const Matrix w0 = null_basis(m, cfg);
  Matrix w(cols, cols);
  w << w0, w1, w2;
  if (orthogonality_defect(w) > 1e-10 * cols) {
    throw InternalError("compress_rows_right: transform lost orthogonality");
  }
  return w;
}

}  // namespace detail

/// Orthogonal condensed form exposing the finite part, the index-2 chain
/// pairs and the index-1 infinite part of a minimal positive real system,
/// together with the compressed input rows. Block sizes (n1, n2, n2, n3).
struct Ea1B1Form {
  Matrix U, V;       // orthogonal n x n
  Matrix W_orth;     // orthogonal m x m input transform
  Matrix tE, tA;     // U E V, U A V
  Matrix tB;         // U B W_orth
  Matrix tC;         // C V
  Eigen::Index n1 = 0, n2 = 0, n3 = 0;
  Eigen::Index m1 = 0;  // m - n2 - n3
};

inline Ea1B1Form condensed_ea1_b1(const DescriptorSystem& sys,
                                  const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();

  Ea1B1Form f;
  // Step 1: deflate the finite spectrum into the leading block.
  const auto split = finite_infinite_split(sys.E, sys.A, cfg);
  f.U = split.U;
  f.V = split.V;
  f.tE = split.tE;
  f.tA = split.tA;
  f.tB = split.U * sys.B;
  f.tC = sys.C * split.V;
  f.n1 = split.n_finite;
  const Eigen::Index q = n - f.n1;

  // Step 2: rank-revealing split of the infinite-part E block.
  {
    const Matrix e22 = f.tE.bottomRightCorner(q, q);
    Eigen::JacobiSVD<Matrix> svd(e22, Eigen::ComputeFullU | Eigen::ComputeFullV);
    f.n2 = svd_rank(e22, cfg);
    const Matrix u2 = svd.matrixU().transpose();
    const Matrix v2 = svd.matrixV();
    f.tE.bottomRows(q) = u2 * f.tE.bottomRows(q);
    f.tA.bottomRows(q) = u2 * f.tA.bottomRows(q);
    f.tB.bottomRows(q) = u2 * f.tB.bottomRows(q);
    f.tE.rightCols(q) = f.tE.rightCols(q) * v2;
    f.tA.rightCols(q) = f.tA.rightCols(q) * v2;
    f.tC.rightCols(q) = f.tC.rightCols(q) * v2;
    f.U.bottomRows(q) = u2 * f.U.bottomRows(q);
    f.V.rightCols(q) = f.V.rightCols(q) * v2;
  }

  // Step 3: split the trailing A block; the zero side must match n2,
  // otherwise the pencil has index above two.
  const Eigen::Index r = q - f.n2;
  {
    const Matrix a33 = f.tA.bottomRightCorner(r, r);
    Eigen::JacobiSVD<Matrix> svd(a33, Eigen::ComputeFullU | Eigen::ComputeFullV);
    f.n3 = svd_rank(a33, cfg);
    const Eigen::Index nu2 = r - f.n3;
    if (nu2 != f.n2) {
      throw StructureError("condensed_ea1_b1 step 3",
                           "index exceeds two (nu2 != n2); the system cannot be "
                           "minimal positive real");
    }
    // Zero singular directions first, the nonsingular block last.
    Matrix u3(r, r), v3(r, r);
    u3 << svd.matrixU().rightCols(nu2), svd.matrixU().leftCols(f.n3);
    v3 << svd.matrixV().rightCols(nu2), svd.matrixV().leftCols(f.n3);
    const Matrix u3t = u3.transpose();
    f.tE.bottomRows(r) = u3t * f.tE.bottomRows(r);
    f.tA.bottomRows(r) = u3t * f.tA.bottomRows(r);
    f.tB.bottomRows(r) = u3t * f.tB.bottomRows(r);
    f.tE.rightCols(r) = f.tE.rightCols(r) * v3;
    f.tA.rightCols(r) = f.tA.rightCols(r) * v3;
    f.tC.rightCols(r) = f.tC.rightCols(r) * v3;
    f.U.bottomRows(r) = u3t * f.U.bottomRows(r);
    f.V.rightCols(r) = f.V.rightCols(r) * v3;
  }

  // Step 4: swap column blocks 2 and 3 (both of size n2).
  if (f.n2 > 0) {
    auto swap_cols = [&](Matrix& mmat) {
      const Matrix b2 = mmat.middleCols(f.n1, f.n2);
      const Matrix b3 = mmat.middleCols(f.n1 + f.n2, f.n2);
      mmat.middleCols(f.n1, f.n2) = b3;
      mmat.middleCols(f.n1 + f.n2, f.n2) = b2;
    };
    swap_cols(f.tE);
    swap_cols(f.tA);
    swap_cols(f.tC);
    swap_cols(f.V);
  }

  // Step 5: compress the zero-E input rows from the right.
  f.m1 = m - f.n2 - f.n3;
  if (f.m1 < 0) {
    throw StructureError("condensed_ea1_b1 step 5",
                         "input dimension too small for the infinite structure");
  }
  const Matrix b_lower = f.tB.bottomRows(f.n2 + f.n3);
  f.W_orth = detail::compress_rows_right(b_lower, f.n2, f.n3, cfg);
  f.tB = f.tB * f.W_orth;

  // Structural sanity: the named diagonal blocks must be nonsingular.
  auto check_block = [&](const Matrix& blk, const char* name) {
    if (blk.size() > 0 && !is_nonsingular(blk, cfg)) {
      throw StructureError("condensed_ea1_b1", std::string(name) + " is singular");
    }
  };
  check_block(f.tE.topLeftCorner(f.n1, f.n1), "E11");
  check_block(f.tE.block(f.n1, f.n1 + f.n2, f.n2, f.n2), "E23");
  check_block(f.tA.block(f.n1, f.n1, f.n2, f.n2), "A22");
  check_block(f.tA.block(f.n1 + f.n2, f.n1 + f.n2, f.n2, f.n2), "A33");
  check_block(f.tA.block(f.n1 + 2 * f.n2, f.n1 + 2 * f.n2, f.n3, f.n3), "A44");
  check_block(f.tB.block(f.n1 + f.n2, f.m1, f.n2, f.n2), "B32");
  check_block(f.tB.block(f.n1 + f.n2 + f.n2, f.m1 + f.n2, f.n3, f.n3), "B43");
  return f;
}

/// Non-orthogonal refinement of (EA1)/(B1): X E Y, X A Y carry identity
/// blocks, X B Z has identity rows in the infinite part, and the blocks of
/// Z^T C Y and Z^T (D + D^T) Z feed the certificate construction.
struct RefinedForm {
  Matrix X, Y, Z;  // nonsingular transforms
  Eigen::Index n1 = 0, n2 = 0, n3 = 0, m1 = 0;
  Matrix tE, tA, tB, tC;  // X E Y, X A Y, X B Z, Z^T C Y
  Matrix S;               // Z^T (D + D^T) Z
  double cond_x = 0.0, cond_y = 0.0, cond_z = 0.0;

  Matrix A1() const { return tA.topLeftCorner(n1, n1); }
  // B row blocks (column partition m1, n2, n3).
  Matrix B11() const { return tB.block(0, 0, n1, m1); }
  Matrix B12() const { return tB.block(0, m1, n1, n2); }
  Matrix B13() const { return tB.block(0, m1 + n2, n1, n3); }
  Matrix B21() const { return tB.block(n1, 0, n2, m1); }
  // C blocks: row partition (m1, n2, n3), column partition (n1, n2, n2, n3).
  Matrix Cblk(int i, int j) const {
    const std::array<Eigen::Index, 3> roff{0, m1, m1 + n2};
    const std::array<Eigen::Index, 3> rsz{m1, n2, n3};
    const std::array<Eigen::Index, 4> coff{0, n1, n1 + n2, n1 + 2 * n2};
    const std::array<Eigen::Index, 4> csz{n1, n2, n2, n3};
    return tC.block(roff[i], coff[j], rsz[i], csz[j]);
  }
  Matrix Sblk(int i, int j) const {
    const std::array<Eigen::Index, 3> off{0, m1, m1 + n2};
    const std::array<Eigen::Index, 3> sz{m1, n2, n3};
    return S.block(off[i], off[j], sz[i], sz[j]);
  }
  // Aggregate infinite-part blocks.
  Matrix cN() const { return tE.bottomRightCorner(n() - n1, n() - n1); }
  Matrix cB() const { return tB.bottomRows(n() - n1); }
  Matrix cC() const { return tC.rightCols(n() - n1); }
  Eigen::Index n() const { return tE.rows(); }
};

inline RefinedForm refined_form(const DescriptorSystem& sys,
                                const ToleranceConfig& cfg) {
  const auto f = condensed_ea1_b1(sys, cfg);
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const Eigen::Index n1 = f.n1, n2 = f.n2, n3 = f.n3, m1 = f.m1;
  const Eigen::Index o2 = n1, o3 = n1 + n2, o4 = n1 + 2 * n2;  // block offsets

  Matrix E = f.tE, A = f.tA, B = f.tB;
  Matrix X = f.U, Y = f.V, Z = f.W_orth;

  auto rows = [&](Matrix& mref, Eigen::Index off, Eigen::Index sz) {
    return mref.middleRows(off, sz);
  };
  auto cols = [&](Matrix& mref, Eigen::Index off, Eigen::Index sz) {
    return mref.middleCols(off, sz);
  };
  // Row operation r_i <- r_i - T * r_j on the pencil data and X.
  auto row_op = [&](Eigen::Index oi, Eigen::Index si, Eigen::Index oj,
                    Eigen::Index sj, const Matrix& t) {
    if (si == 0 || sj == 0) return;
    rows(E, oi, si) -= t * rows(E, oj, sj);
    rows(A, oi, si) -= t * rows(A, oj, sj);
    rows(B, oi, si) -= t * rows(B, oj, sj);
    rows(X, oi, si) -= t * rows(X, oj, sj);
  };
  auto row_scale = [&](Eigen::Index oi, Eigen::Index si, const Matrix& t) {
    if (si == 0) return;
    rows(E, oi, si) = t * rows(E, oi, si);
    rows(A, oi, si) = t * rows(A, oi, si);
    rows(B, oi, si) = t * rows(B, oi, si);
    rows(X, oi, si) = t * rows(X, oi, si);
  };
  // Column operation c_i <- c_i - c_j * T on the pencil data and Y.
  auto col_op = [&](Eigen::Index oi, Eigen::Index si, Eigen::Index oj,
                    Eigen::Index sj, const Matrix& t) {
    if (si == 0 || sj == 0) return;
    cols(E, oi, si) -= cols(E, oj, sj) * t;
    cols(A, oi, si) -= cols(A, oj, sj) * t;
    cols(Y, oi, si) -= cols(Y, oj, sj) * t;
  };
  auto col_scale = [&](Eigen::Index oi, Eigen::Index si, const Matrix& t) {
    if (si == 0) return;
    cols(E, oi, si) = cols(E, oi, si) * t;
    cols(A, oi, si) = cols(A, oi, si) * t;
    cols(Y, oi, si) = cols(Y, oi, si) * t;
  };
  auto inv = [&](const Matrix& mm, const char* name) {
    if (mm.size() == 0) return mm;
    Eigen::FullPivLU<Matrix> lu(mm);
    if (!lu.isInvertible()) {
      throw StructureError("refined_form", std::string(name) + " not invertible");
    }
    return Matrix(lu.inverse());
  };

  // Eliminate A43 against A44, then normalize the infinite-part A blocks.
  if (n3 > 0 && n2 > 0) {
    const Matrix a44i = inv(A.block(o4, o4, n3, n3), "A44");
    col_op(o3, n2, o4, n3, a44i * A.block(o4, o3, n3, n2));
  }
  row_scale(o3, n2, inv(A.block(o3, o3, n2, n2), "A33"));
  row_scale(o4, n3, inv(A.block(o4, o4, n3, n3), "A44"));
  // Clear the A couplings of rows 1 and 2 against the identity rows 3, 4.
  row_op(o2, n2, o3, n2, A.block(o2, o3, n2, n2));
  row_op(o2, n2, o4, n3, A.block(o2, o4, n2, n3));
  row_op(0, n1, o3, n2, A.block(0, o3, n1, n2));
  row_op(0, n1, o4, n3, A.block(0, o4, n1, n3));
  col_scale(o2, n2, inv(A.block(o2, o2, n2, n2), "A22"));
  row_op(0, n1, o2, n2, A.block(0, o2, n1, n2));
  // Normalize E23 while keeping A33 = I.
  if (n2 > 0) {
    const Matrix e23i = inv(E.block(o2, o3, n2, n2), "E23");
    col_scale(o3, n2, e23i);
    row_scale(o3, n2, inv(A.block(o3, o3, n2, n2), "A33 renorm"));
  }
  row_scale(0, n1, inv(E.topLeftCorner(n1, n1), "E11"));
  const Matrix a1 = A.topLeftCorner(n1, n1);
  // Clear the E couplings of row 1. Each column operation is repaired by a
  // row operation against the corresponding identity A block, which only
  // moves E mass into columns that are cleared afterwards.
  if (n1 > 0) {
    if (n3 > 0) {
      const Matrix e14 = E.block(0, o4, n1, n3);
      col_op(o4, n3, 0, n1, e14);
      row_op(0, n1, o4, n3, Matrix(-a1 * e14));
    }
    if (n2 > 0) {
      const Matrix e12 = E.block(0, o2, n1, n2);
      col_op(o2, n2, 0, n1, e12);
      row_op(0, n1, o2, n2, Matrix(-a1 * e12));
      const Matrix e13 = E.block(0, o3, n1, n2);
      col_op(o3, n2, 0, n1, e13);
      row_op(0, n1, o3, n2, Matrix(-a1 * e13));
    }
  }

  // Input-side cleanup: normalize the (3,2) and (4,3) blocks of B to
  // identities and clear the rest of those rows.
  auto zcols = [&](Matrix& mref, Eigen::Index off, Eigen::Index sz) {
    return mref.middleCols(off, sz);
  };
  auto z_scale = [&](Eigen::Index oi, Eigen::Index si, const Matrix& t) {
    if (si == 0) return;
    zcols(B, oi, si) = zcols(B, oi, si) * t;
    zcols(Z, oi, si) = zcols(Z, oi, si) * t;
  };
  auto z_op = [&](Eigen::Index oi, Eigen::Index si, Eigen::Index oj,
                  Eigen::Index sj, const Matrix& t) {
    if (si == 0 || sj == 0) return;
    zcols(B, oi, si) -= zcols(B, oj, sj) * t;
    zcols(Z, oi, si) -= zcols(Z, oj, sj) * t;
  };
  z_scale(m1, n2, inv(B.block(o3, m1, n2, n2), "B32"));
  if (n3 > 0) {
    z_op(m1 + n2, n3, m1, n2, B.block(o3, m1 + n2, n2, n3));
    z_scale(m1 + n2, n3, inv(B.block(o4, m1 + n2, n3, n3), "B43"));
  }
  // Clear the B row-2 couplings against the identity input rows; repair A
  // with the matching column operations (negative t adds c2 * blk to c3/c4).
  if (n2 > 0) {
    const Matrix b22 = B.block(o2, m1, n2, n2);
    row_op(o2, n2, o3, n2, b22);
    col_op(o3, n2, o2, n2, Matrix(-b22));
    if (n3 > 0) {
      const Matrix b23 = B.block(o2, m1 + n2, n2, n3);
      row_op(o2, n2, o4, n3, b23);
      col_op(o4, n3, o2, n2, Matrix(-b23));
    }
  }

  RefinedForm rf;
  rf.X = X;
  rf.Y = Y;
  rf.Z = Z;
  rf.n1 = n1;
  rf.n2 = n2;
  rf.n3 = n3;
  rf.m1 = m1;
  rf.tE = E;
  rf.tA = A;
  rf.tB = B;
  rf.tC = Z.transpose() * sys.C * Y;
  rf.S = Z.transpose() * (sys.D + sys.D.transpose()) * Z;
  {
    auto cond_of = [](const Matrix& mm) {
      if (mm.size() == 0) return 1.0;
      Eigen::JacobiSVD<Matrix> svd(mm);
      const double smin = svd.singularValues().minCoeff();
      return smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                        : std::numeric_limits<double>::infinity();
    };
    rf.cond_x = cond_of(X);
    rf.cond_y = cond_of(Y);
    rf.cond_z = cond_of(Z);
  }

  // Structural checks on the target pattern.
  {
    const double tol = 1e-8 * std::max({1.0, E.norm(), A.norm(), B.norm()});
    Matrix e_ref = Matrix::Zero(n, n);
    e_ref.topLeftCorner(n1, n1).setIdentity();
    e_ref.block(o2, o3, n2, n2).setIdentity();
    Matrix a_ref = Matrix::Identity(n, n);
    a_ref.topLeftCorner(n1, n1) = a1;
    Matrix b_ref = B;
    b_ref.block(o3, 0, n2 + n3, m).setZero();
    b_ref.block(o3, m1, n2, n2).setIdentity();
    b_ref.block(o4, m1 + n2, n3, n3).setIdentity();
    b_ref.block(o2, m1, n2, n2 + n3).setZero();
    if ((E - e_ref).norm() > tol || (A - a_ref).norm() > tol ||
        (B - b_ref).norm() > tol) {
      throw InternalError("refined_form: condensed pattern checks failed");
    }
    E = e_ref;
    A = a_ref;
    B = b_ref;
    rf.tE = E;
    rf.tA = A;
    rf.tB = B;
  }

  // Positive realness forces the marked C couplings to vanish and the (2,2)
  // coupling to be symmetric negative semidefinite.
  {
    const double cscale = std::max(1.0, rf.tC.norm());
    const Matrix c12 = rf.Cblk(0, 1);
    const Matrix c32 = rf.Cblk(2, 1);
    if (c12.norm() > cfg.residual_tol * cscale ||
        c32.norm() > cfg.residual_tol * cscale) {
      throw NotPositiveRealError(
          "refined_form: index-two coupling columns of C do not vanish; the "
          "system is not positive real");
    }
    const Matrix c22 = rf.Cblk(1, 1);
    if (c22.size() > 0 &&
        ((c22 - c22.transpose()).norm() > cfg.residual_tol * cscale ||
         !is_nsd(sym(c22), cfg))) {
      throw NotPositiveRealError(
          "refined_form: the index-two C coupling is not symmetric negative "
          "semidefinite; the system is not positive real");
    }
  }
  return rf;
}

/// Orthogonal staircase of the infinite structure: U E V has a leading
/// nonsingular block of size mu1, U A V exposes a trailing nonsingular block
/// of size mu3, and U B L is row compressed over the last mu2 + mu3 rows.
struct InfinityStaircase {
  Matrix U, V;   // orthogonal n x n
  Matrix L;      // orthogonal m x m input transform
  Eigen::Index mu1 = 0, mu2 = 0, mu3 = 0;
  Matrix tE, tA;  // U E V, U A V
  Matrix tB;      // U B L
  Matrix tC;      // C V  (input transform applied separately where needed)
  Matrix tS;      // L^T (D + D^T) L

  Eigen::Index m1() const { return L.cols() - mu2 - mu3; }
  Matrix B22() const { return tB.block(mu1, m1(), mu2, mu2); }
  Matrix B23() const { return tB.block(mu1, m1() + mu2, mu2, mu3); }
  Matrix B33() const { return tB.block(mu1 + mu2, m1() + mu2, mu3, mu3); }
  Matrix A33() const { return tA.bottomRightCorner(mu3, mu3); }
  Matrix C33() const { return tC.rightCols(mu3); }  // callers slice rows
  Matrix Sblk(int i, int j) const {
    const std::array<Eigen::Index, 3> off{0, m1(), m1() + mu2};
    const std::array<Eigen::Index, 3> sz{m1(), mu2, mu3};
    return tS.block(off[i], off[j], sz[i], sz[j]);
  }
};

inline InfinityStaircase infinity_staircase(const DescriptorSystem& sys,
                                            const ToleranceConfig& cfg) {
  sys.check_dimensions();
  cfg.validate();
  const Eigen::Index n = sys.n();

  InfinityStaircase st;
  // Rank-revealing split of E.
  {
    Eigen::JacobiSVD<Matrix> svd(sys.E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    st.mu1 = svd_rank(sys.E, cfg);
    st.U = svd.matrixU().transpose();
    st.V = svd.matrixV();
  }
  st.tE = st.U * sys.E * st.V;
  st.tA = st.U * sys.A * st.V;
  st.tB = st.U * sys.B;
  st.tC = sys.C * st.V;

  // Split the trailing A block with its kernel side first.
  const Eigen::Index q = n - st.mu1;
  {
    const Matrix a22 = st.tA.bottomRightCorner(q, q);
    Eigen::JacobiSVD<Matrix> svd(a22, Eigen::ComputeFullU | Eigen::ComputeFullV);
    st.mu3 = svd_rank(a22, cfg);
    st.mu2 = q - st.mu3;
    Matrix u2(q, q), v2(q, q);
    u2 << svd.matrixU().rightCols(st.mu2), svd.matrixU().leftCols(st.mu3);
    v2 << svd.matrixV().rightCols(st.mu2), svd.matrixV().leftCols(st.mu3);
    const Matrix u2t = u2.transpose();
    st.tE.bottomRows(q) = u2t * st.tE.bottomRows(q);
    st.tA.bottomRows(q) = u2t * st.tA.bottomRows(q);
    st.tB.bottomRows(q) = u2t * st.tB.bottomRows(q);
    st.tE.rightCols(q) = st.tE.rightCols(q) * v2;
    st.tA.rightCols(q) = st.tA.rightCols(q) * v2;
    st.tC.rightCols(q) = st.tC.rightCols(q) * v2;
    st.U.bottomRows(q) = u2t * st.U.bottomRows(q);
    st.V.rightCols(q) = st.V.rightCols(q) * v2;
  }

  // Compress the zero-E input rows from the right.
  const Matrix b_lower = st.tB.bottomRows(q);
  if (q > 0 && svd_rank(b_lower, cfg) != q) {
    throw NotCompletelyControllableError(
        "infinity_staircase: [E B] is row rank deficient; the system is not "
        "completely controllable");
  }
  st.L = detail::compress_rows_right(b_lower, st.mu2, st.mu3, cfg);
  st.tB = st.tB * st.L;
  st.tS = st.L.transpose() * (sys.D + sys.D.transpose()) * st.L;
  return st;
}

}  // namespace phr
