#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace phr {

/// Tolerances governing every numerical decision in the library.
///
/// rank_rtol is a per-unit-dimension relative singular value cutoff: a
/// singular value sigma is treated as zero when
/// sigma <= rank_rtol * max(rows, cols) * sigma_max.
struct ToleranceConfig {
  double rank_rtol = 32.0 * std::numeric_limits<double>::epsilon();
  double psd_tol = 1e-8;       // allowed negative eigenvalue, relative to scale
  double residual_tol = 1e-8;  // relative Frobenius residual for identities
  double tf_rtol = 1e-9;       // relative error for transfer function match
  int sample_count = 40;       // frequency samples for tf comparison
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;

  void validate() const {
    if (rank_rtol <= 0 || psd_tol <= 0 || residual_tol <= 0 || tf_rtol <= 0) {
      throw std::invalid_argument("ToleranceConfig: tolerances must be positive");
    }
    if (sample_count < 1) {
      throw std::invalid_argument("ToleranceConfig: sample_count must be >= 1");
    }
  }
};

}  // namespace phr
