#pragma once

#include <cstdint>
#include <random>

#include "phr/config.hpp"
#include "phr/numeric.hpp"
#include "phr/pencil.hpp"
#include "phr/ph_form.hpp"
#include "phr/system.hpp"

namespace phr {

namespace detail {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows,
                            Eigen::Index cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = dist(rng);
  }
  return out;
}

inline Matrix random_nonsingular(std::mt19937_64& rng, Eigen::Index n) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Matrix m = random_matrix(rng, n, n);
    Eigen::JacobiSVD<Matrix> svd(m);
    if (n == 0 || svd.singularValues().minCoeff() > 1e-3) return m;
  }
  return Matrix::Identity(n, n);
}

inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double shift) {
  const Matrix g = random_matrix(rng, n, n);
  return g * g.transpose() + shift * Matrix::Identity(n, n);
}

inline Matrix random_skew(std::mt19937_64& rng, Eigen::Index n) {
  const Matrix g = random_matrix(rng, n, n);
  return 0.5 * (g - g.transpose());
}

}  // namespace detail

struct GeneratorOptions {
  Eigen::Index n = 6;
  Eigen::Index m = 2;
  Eigen::Index rank_e = -1;       // -1: random in [1, n]
  double strictness = 1e-1;       // definiteness margin of the dissipation
  bool allow_singular_e = true;
};

/// Draws a random port-Hamiltonian system in assembled coefficient form.
/// The construction guarantees Q^T E = E^T Q >= 0, a positive semidefinite
/// dissipation block and a regular pencil.
inline PHForm random_ph_form(std::uint64_t seed, const GeneratorOptions& opt,
                             const ToleranceConfig& cfg) {
  std::mt19937_64 rng(seed);
  const Eigen::Index n = opt.n;
  const Eigen::Index m = opt.m;
  for (int attempt = 0; attempt < 64; ++attempt) {
    PHForm ph;
    ph.Q = detail::random_nonsingular(rng, n);
    Eigen::Index rk = opt.rank_e;
    if (rk < 0) {
      std::uniform_int_distribution<Eigen::Index> rdist(
          opt.allow_singular_e ? 1 : n, n);
      rk = n > 0 ? rdist(rng) : 0;
    }
    // E = Q^{-T} H with H symmetric positive semidefinite of rank rk.
    const Matrix g = detail::random_matrix(rng, n, rk);
    const Matrix h = g * g.transpose();
    ph.E = ph.Q.transpose().fullPivLu().solve(h);

    // Dissipation Gram block [[K11, K12], [K12^T, K22]] >= 0.
    const Matrix gram =
        detail::random_spd(rng, n + m, opt.strictness);
    const Matrix k11 = gram.topLeftCorner(n, n);
    const Matrix k12 = gram.topRightCorner(n, m);
    const Matrix k22 = gram.bottomRightCorner(m, m);
    const Matrix q_inv_t = ph.Q.transpose().fullPivLu().inverse();
    ph.R = q_inv_t * k11 * q_inv_t.transpose();
    ph.P = q_inv_t * k12;
    ph.S = k22;
    ph.J = detail::random_skew(rng, n);
    ph.N = detail::random_skew(rng, m);
    ph.G = detail::random_matrix(rng, n, m);

    const DescriptorSystem sys = ph.reassemble();
    if (check_regular(sys, cfg).regular) return ph;
  }
  throw InternalError("random_ph_form: failed to draw a regular pencil");
}

/// Random minimal, strictly passive standard-state-space system (E = I)
/// with D + D^T positive definite. Useful as a positive real test input
/// whose minimality is generic.
inline DescriptorSystem random_strictly_passive(std::uint64_t seed,
                                                Eigen::Index n, Eigen::Index m,
                                                const ToleranceConfig& cfg) {
  const GeneratorOptions opt{n, m, n, 5e-1, false};
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dull);
  (void)rng;
  PHForm ph = random_ph_form(seed, opt, cfg);
  // Normalize to E = I by folding the state transformation into Q.
  const Eigen::FullPivLU<Matrix> e_lu(ph.E);
  if (!e_lu.isInvertible()) {
    throw InternalError("random_strictly_passive: E is singular");
  }
  DescriptorSystem sys = ph.reassemble();
  const Matrix e_inv = e_lu.inverse();
  return DescriptorSystem(Matrix::Identity(n, n), Matrix(e_inv * sys.A),
                          Matrix(e_inv * sys.B), sys.C, sys.D);
}

}  // namespace phr
