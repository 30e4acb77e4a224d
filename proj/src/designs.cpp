#include "krig/designs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "krig/random.hpp"

namespace krig::designs {

ScaledOutputs scale_outputs(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorKind::InvalidArgument, "scale_outputs: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;

  ScaledOutputs out;
  out.values.resize(y.size());
  if (!(range > 0.0)) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    out.record = {mean, 1.0, true};
    std::fill(out.values.begin(), out.values.end(), 0.0);
    return out;
  }

  // Map to [0,1] first so the extremes land on exactly 0 and 1, then centre.
  for (std::size_t i = 0; i < y.size(); ++i) out.values[i] = (y[i] - lo) / range;
  const double m = std::accumulate(out.values.begin(), out.values.end(), 0.0) /
                   static_cast<double>(y.size());
  for (double& v : out.values) v -= m;
  out.record = {lo + m * range, range, false};
  return out;
}

namespace {

double sq_dist(const Matrix& x, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.cols(); ++k) {
    const double t = x(i, k) - x(j, k);
    s += t * t;
  }
  return s;
}

struct PairMin {
  double value = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  std::size_t j = 0;
};

PairMin global_min_sq(const Matrix& x) {
  PairMin best;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = i + 1; j < x.rows(); ++j) {
      const double d = sq_dist(x, i, j);
      if (d < best.value) best = {d, i, j};
    }
  return best;
}

// Smallest squared distance over all pairs that include row a or row b.
double local_min_sq(const Matrix& x, std::size_t a, std::size_t b) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < x.rows(); ++j) {
    if (j != a) m = std::min(m, sq_dist(x, a, j));
    if (j != b && j != a) m = std::min(m, sq_dist(x, b, j));
  }
  return m;
}

}  // namespace

Matrix random_lhs(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw Error(ErrorKind::InvalidArgument, "lhs: n and d must be positive");
  Rng rng(seed);
  Matrix x(n, d);
  std::vector<std::size_t> perm(n);
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < d; ++k) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (std::size_t i = 0; i < n; ++i) {
      const double cell = static_cast<double>(perm[i]);
      double v = (cell + rng.uniform()) / dn;
      // (cell + u) can round up to cell + 1 for u close to 1.
      if (static_cast<std::size_t>(std::floor(v * dn)) != perm[i]) v = (cell + 0.5) / dn;
      x(i, k) = v;
    }
  }
  return x;
}

double min_pairwise_distance(const Matrix& x) {
  if (x.rows() < 2) return 0.0;
  return std::sqrt(global_min_sq(x).value);
}

Matrix maximin_lhs(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t iters,
                   MaximinStats* stats) {
  Matrix x = random_lhs(n, d, seed);
  MaximinStats local;
  if (n < 3) {
    local.initial_min_distance = local.final_min_distance = min_pairwise_distance(x);
    if (stats) *stats = local;
    return x;
  }

  Rng rng(mix_seed(seed, 0x6d61786d696eULL));
  PairMin global = global_min_sq(x);
  local.initial_min_distance = std::sqrt(global.value);

  for (std::size_t it = 0; it < iters; ++it) {
    const std::size_t k = static_cast<std::size_t>(rng.below(d));
    const std::size_t a = static_cast<std::size_t>(rng.below(n));
    std::size_t b = static_cast<std::size_t>(rng.below(n - 1));
    if (b >= a) ++b;

    const double before = local_min_sq(x, a, b);
    std::swap(x(a, k), x(b, k));
    const double after = local_min_sq(x, a, b);

    if (after > before && after >= global.value) {
      ++local.accepted_swaps;
      const bool touched = global.i == a || global.i == b || global.j == a || global.j == b;
      if (touched) {
        const PairMin updated = global_min_sq(x);
        if (updated.value < global.value)
          throw Error(ErrorKind::InvalidArgument, "maximin_lhs: accepted swap lowered the minimum distance");
        global = updated;
      }
    } else {
      std::swap(x(a, k), x(b, k));
    }
  }
  local.final_min_distance = std::sqrt(global.value);
  if (stats) *stats = local;
  return x;
}

}  // namespace krig::designs
