#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "krig/kernels.hpp"
#include "krig/matrix.hpp"
#include "krig/nugget.hpp"
#include "krig/optimize.hpp"

namespace krig {

/// Coordinates the optimizer works in; theta = 10^s, e^s, or s.
enum class SearchTransform { Log10Theta, LogTheta, Raw };

std::string_view to_string(SearchTransform t) noexcept;
double search_to_theta(SearchTransform t, double s) noexcept;
double theta_to_search(SearchTransform t, double theta) noexcept;

inline constexpr double kThetaLower = 1e-4;
inline constexpr double kThetaUpper = 1e3;
inline constexpr double kLogNuggetLower = -20.72326583694641;  // ln 1e-9
inline constexpr double kLogNuggetUpper = -2.302585092994046;  // ln 1e-1
inline constexpr double kLogNoiseScaleLower = -9.210340371976184;  // ln 1e-4
inline constexpr double kLogNoiseScaleUpper = 9.210340371976184;   // ln 1e4
inline constexpr double kSurvivorFraction = 0.2;

struct FitConfig {
  SearchTransform search_transform = SearchTransform::Log10Theta;
  /// Bounds on the theta coordinates in search space; default_bounds() when empty.
  std::optional<optimize::Bounds> bounds;
  std::size_t n_starts = 5;
  std::size_t n_lhs_candidates = 0;  // 0 -> 40 d
  std::size_t n_clusters = 0;        // 0 -> n_starts
  std::size_t max_iters = 200;
  double grad_tol = 1e-6;
  double step_tol = 1e-10;
  double rel_f_tol = 1e7 * 2.220446049250313e-16;
  NuggetStrategy nugget = NuggetStrategy::estimated();
  std::uint64_t seed = 0;
  /// When non-empty these replace the space-filling starts. Each spec is read
  /// in its own parameterization and mapped to the search space.
  std::vector<KernelSpec> explicit_starts;

  std::size_t lhs_candidates(std::size_t d) const noexcept {
    return n_lhs_candidates ? n_lhs_candidates : 40 * d;
  }
  std::size_t clusters() const noexcept { return n_clusters ? n_clusters : n_starts; }
  void validate(std::size_t d) const;
};

/// [1e-4, 1e3] per dimension for theta, mapped through the transform.
optimize::Bounds default_bounds(const Matrix& x, KernelFamily family, SearchTransform transform);

/// Full search box: theta bounds plus the log-scale nugget coordinate when
/// the nugget is estimated.
optimize::Bounds search_bounds(const Matrix& x, KernelFamily family, const FitConfig& config);

/// Profile deviance log|R_delta| + n log[(y - mu 1)^T R_delta^{-1} (y - mu 1)]
/// with mu profiled out, as a function of the search coordinates. The
/// residual term is floored at eps * ||y||^2.
class DevianceObjective {
 public:
  DevianceObjective(const Matrix& x, const Vector& y, KernelFamily family, double exponent,
                    SearchTransform transform, NuggetStrategy nugget);

  std::size_t dims() const noexcept { return d_; }
  /// d, or d + 1 with a searched nugget coordinate (ln delta or ln c).
  std::size_t search_dims() const noexcept { return d_ + (nugget_.searched() ? 1 : 0); }

  /// +infinity when the jitter ladder is exhausted.
  double value(std::span<const double> s) const;
  double value_and_gradient(std::span<const double> s, std::span<double> grad) const;

  /// Canonical theta for a search vector.
  Vector theta(std::span<const double> s) const;
  /// Realized nugget (before jitter) at a search vector.
  Vector nugget_at(std::span<const double> s, const Matrix& r) const;

  /// Objective wrapper for optimize::minimize.
  optimize::Objective as_objective() const;

  std::size_t failures() const noexcept { return failures_; }
  std::size_t jitter_escalations() const noexcept { return escalations_; }

  /// Sample variance of y; the divisor stochastic-kriging noise is measured against.
  double noise_divisor() const noexcept { return noise_divisor_; }
  const NuggetStrategy& nugget() const noexcept { return nugget_; }

 private:
  double evaluate(std::span<const double> s, std::span<double> grad, bool want_grad) const;

  const Matrix& x_;
  const Vector& y_;
  KernelFamily family_;
  double exponent_;
  SearchTransform transform_;
  NuggetStrategy nugget_;
  std::size_t d_;
  double residual_floor_;
  double noise_divisor_;
  mutable std::size_t failures_ = 0;
  mutable std::size_t escalations_ = 0;
};

/// Convenience entry points over DevianceObjective.
double deviance(std::span<const double> s, const Matrix& x, const Vector& y, KernelFamily family,
                double exponent = 2.0, SearchTransform transform = SearchTransform::Log10Theta,
                const NuggetStrategy& nugget = NuggetStrategy::fixed(0.0));
Vector deviance_gradient(std::span<const double> s, const Matrix& x, const Vector& y, KernelFamily family,
                         double exponent = 2.0, SearchTransform transform = SearchTransform::Log10Theta,
                         const NuggetStrategy& nugget = NuggetStrategy::fixed(0.0));

struct KMeansResult {
  std::vector<Vector> centers;
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
  std::size_t reseeds = 0;
};

/// Lloyd's algorithm with k-means++ seeding. `priority` orders the points for
/// re-seeding an empty cluster: the lowest-priority unassigned-as-center
/// point is used. Deterministic for a given seed.
KMeansResult kmeans(const std::vector<Vector>& points, std::size_t k, std::uint64_t seed,
                    std::span<const double> priority, std::size_t max_iters = 100);

struct StartSet {
  std::vector<Vector> starts;          // search-space vectors (with nugget coordinate if any)
  std::vector<Vector> candidates;      // LHS candidates (theta coordinates)
  std::vector<double> candidate_values;
  std::size_t survivors = 0;
};

/// Space-filling LHS candidates in the theta box, scored by deviance; the best
/// 20% are clustered with k-means and the cluster centres returned, with the
/// single best candidate appended when it is not already a centre.
StartSet generate_starts(const optimize::Bounds& bounds, const FitConfig& config,
                         const DevianceObjective& objective);

struct StartOutcome {
  Vector start;
  Vector argmin;
  double start_value = 0.0;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  optimize::Termination reason = optimize::Termination::MaxIterations;
  bool skipped = false;  // objective not finite at the start
};

struct MultistartResult {
  Vector argmin;       // search space
  double value = 0.0;  // deviance
  std::size_t best_start = 0;
  std::vector<StartOutcome> runs;
  std::size_t objective_failures = 0;
  std::size_t jitter_escalations = 0;
};

/// minimize() from every start, keep the lowest deviance (ties to the lowest
/// start index). Throws Error{AllStartsFailed}.
MultistartResult multistart_fit(const Matrix& x, const Vector& y, const KernelSpec& kernel,
                                const FitConfig& config);

}  // namespace krig
