#pragma once

#include <cstdint>
#include <span>

#include "krig/matrix.hpp"

namespace krig::designs {

/// Affine output scaling: scaled = (y - y_mean) / y_range.
struct ScalingRecord {
  double y_mean = 0.0;
  double y_range = 1.0;
  bool degenerate = false;  // original range was zero; y_range forced to 1

  double apply(double y) const noexcept { return (y - y_mean) / y_range; }
  double invert(double scaled) const noexcept { return scaled * y_range + y_mean; }
  /// Variances scale with the square of the range.
  double invert_variance(double scaled_var) const noexcept { return scaled_var * y_range * y_range; }

  static ScalingRecord identity() noexcept { return {}; }
};

struct ScaledOutputs {
  Vector values;
  ScalingRecord record;
};

/// Mean 0 and range exactly 1 (range 1 is exact in floating point: the
/// maximum maps to fl(1 - m) and the minimum to -m).
ScaledOutputs scale_outputs(std::span<const double> y);

/// Plain Latin hypercube: each column is a random permutation of the n
/// strata with a uniform jitter inside each cell.
Matrix random_lhs(std::size_t n, std::size_t d, std::uint64_t seed);

/// Smallest pairwise Euclidean distance (0 for fewer than two rows).
double min_pairwise_distance(const Matrix& x);

struct MaximinStats {
  double initial_min_distance = 0.0;
  double final_min_distance = 0.0;
  std::size_t accepted_swaps = 0;
};

/// Latin hypercube improved by point exchange: `iters` times pick a column
/// and two rows, swap their entries, and keep the swap only if it raises the
/// smallest distance among the pairs it touches without dropping below the
/// current global minimum. Column stratification is preserved by every swap.
Matrix maximin_lhs(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t iters = 10000,
                   MaximinStats* stats = nullptr);

inline constexpr std::size_t kDesignSwaps = 10000;
inline constexpr std::size_t kPredictionSwaps = 1000;
inline constexpr std::size_t kPredictionPoints = 2000;

}  // namespace krig::designs
