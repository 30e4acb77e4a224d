#pragma once

#include <cstddef>
#include <optional>

#include "krig/linalg.hpp"
#include "krig/matrix.hpp"

namespace krig {

/// How the diagonal of the correlation matrix is inflated, R_delta = R + diag(delta).
struct NuggetStrategy {
  enum class Mode {
    Fixed,                // delta = value (value >= 0)
    Estimated,            // delta searched jointly with theta, starting at value (> 0)
    StabilityLowerBound,  // smallest delta keeping the factorization stable (a = 25)
    DaceDefault,          // delta = 2.22 (10 + n) 1e-16
  };

  Mode mode = Mode::Fixed;
  double value = 0.0;

  /// Stochastic kriging: variance of each averaged response (output units^2).
  /// With mode Estimated the relative nugget is c * v_i / var(y) and the scale
  /// c is searched jointly with theta, starting at `value`. With mode Fixed the
  /// relative nugget is v_i / sigma2_hat, resolved by fixed-point iteration.
  std::optional<Vector> per_point_noise;

  static NuggetStrategy fixed(double delta) { return {Mode::Fixed, delta, std::nullopt}; }
  static NuggetStrategy estimated(double start = 1e-6) { return {Mode::Estimated, start, std::nullopt}; }
  static NuggetStrategy stability_lower_bound() { return {Mode::StabilityLowerBound, 0.0, std::nullopt}; }
  static NuggetStrategy dace_default() { return {Mode::DaceDefault, 0.0, std::nullopt}; }
  static NuggetStrategy stochastic_joint(Vector noise_var, double start_scale = 1.0) {
    return {Mode::Estimated, start_scale, std::move(noise_var)};
  }
  static NuggetStrategy stochastic_relative(Vector noise_var) {
    return {Mode::Fixed, 1.0, std::move(noise_var)};
  }

  bool stochastic() const noexcept { return per_point_noise.has_value(); }
  /// Whether the optimizer carries an extra log-scale coordinate.
  bool searched() const noexcept { return mode == Mode::Estimated; }

  /// Throws Error{InvalidArgument} when the invariants do not hold for n points.
  void validate(std::size_t n) const;
};

inline constexpr double kStabilityExponent = 25.0;  // the `a` in delta_lb

/// max{ lambda_max (kappa - e^a) / (kappa (e^a - 1)), 0 }. An infinite
/// condition number yields the limit lambda_max / (e^a - 1).
double stability_lower_bound(double lambda_max, double kappa, double a = kStabilityExponent);

double dace_default_nugget(std::size_t n);

/// Realized diagonal inflation for the current correlation matrix. Returns a
/// length-1 vector for scalar nuggets and length-n for per-point nuggets.
///  - `searched_value` is the current optimizer iterate of delta (scalar
///    Estimated) or of the noise scale c (stochastic Estimated).
///  - `noise_divisor` is var(y) for stochastic Estimated and sigma2 for
///    stochastic Fixed.
Vector realize_nugget(const NuggetStrategy& strategy, const Matrix& r, double searched_value = 0.0,
                      double noise_divisor = 1.0);

/// Result of factoring R + diag(nugget) with the jitter ladder.
struct JitteredFactor {
  linalg::SpdFactor factor;
  Vector nugget;               // what was actually added (length 1 or n)
  std::size_t escalations = 0; // jitter steps taken
};

inline constexpr double kJitterStart = 1e-12;
inline constexpr double kJitterCap = 1e-4;

/// Cholesky of R + diag(nugget). On failure the nugget is raised to
/// max(delta, 1e-12) and multiplied by 10 per attempt; a per-point nugget
/// receives the same ladder as an additive scalar. Throws
/// Error{FactorizationFailure} once the next step would exceed 1e-4.
JitteredFactor factor_with_jitter(const Matrix& r, const Vector& nugget);

/// R + diag(nugget) without factoring.
Matrix add_nugget(const Matrix& r, const Vector& nugget);

}  // namespace krig
