#include "krig/nugget.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace krig {

void NuggetStrategy::validate(std::size_t n) const {
  switch (mode) {
    case Mode::Fixed:
      if (!(value >= 0.0) || !std::isfinite(value))
        throw Error(ErrorKind::InvalidArgument, "fixed nugget must be finite and >= 0");
      break;
    case Mode::Estimated:
      if (!(value > 0.0) || !std::isfinite(value))
        throw Error(ErrorKind::InvalidArgument, "estimated nugget needs a start value > 0");
      break;
    case Mode::StabilityLowerBound:
    case Mode::DaceDefault:
      if (per_point_noise)
        throw Error(ErrorKind::InvalidArgument, "per-point noise requires the fixed or estimated mode");
      break;
  }
  if (per_point_noise) {
    if (per_point_noise->size() != n)
      throw Error(ErrorKind::DimensionMismatch, "per-point noise length " +
                                                    std::to_string(per_point_noise->size()) +
                                                    " differs from n = " + std::to_string(n));
    for (double v : *per_point_noise)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::InvalidArgument, "per-point noise variances must be finite and >= 0");
  }
}

double stability_lower_bound(double lambda_max, double kappa, double a) {
  const double ea = std::exp(a);
  if (std::isinf(kappa)) return std::max(lambda_max / (ea - 1.0), 0.0);
  return std::max(lambda_max * (kappa - ea) / (kappa * (ea - 1.0)), 0.0);
}

double dace_default_nugget(std::size_t n) { return 2.22 * (10.0 + static_cast<double>(n)) * 1e-16; }

Vector realize_nugget(const NuggetStrategy& strategy, const Matrix& r, double searched_value,
                      double noise_divisor) {
  const std::size_t n = r.rows();
  if (strategy.per_point_noise) {
    const Vector& v = *strategy.per_point_noise;
    const double scale = strategy.mode == NuggetStrategy::Mode::Estimated ? searched_value : strategy.value;
    const double divisor = noise_divisor > 0.0 ? noise_divisor : 1.0;
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = scale * v[i] / divisor;
    return out;
  }
  switch (strategy.mode) {
    case NuggetStrategy::Mode::Fixed: return {strategy.value};
    case NuggetStrategy::Mode::Estimated: return {searched_value};
    case NuggetStrategy::Mode::DaceDefault: return {dace_default_nugget(n)};
    case NuggetStrategy::Mode::StabilityLowerBound: {
      const linalg::EigenRange er = linalg::symmetric_eigen_range(r);
      const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * std::abs(er.max);
      const double kappa = er.min > floor ? er.max / er.min : std::numeric_limits<double>::infinity();
      return {stability_lower_bound(er.max, kappa)};
    }
  }
  return {0.0};
}

Matrix add_nugget(const Matrix& r, const Vector& nugget) {
  Matrix out = r;
  for (std::size_t i = 0; i < r.rows(); ++i) out(i, i) += nugget.size() == 1 ? nugget[0] : nugget[i];
  return out;
}

JitteredFactor factor_with_jitter(const Matrix& r, const Vector& nugget) {
  const std::size_t n = r.rows();
  if (nugget.size() != 1 && nugget.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "nugget must be scalar or length n");

  JitteredFactor out;
  out.nugget = nugget;
  const bool scalar = nugget.size() == 1;
  double extra = 0.0;  // additive jitter for per-point nuggets
  for (;;) {
    try {
      Matrix a = add_nugget(r, out.nugget);
      out.factor = linalg::cholesky(a);
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    }
    double next;
    if (scalar) {
      next = out.escalations == 0 ? std::max(out.nugget[0], kJitterStart) : out.nugget[0] * 10.0;
      if (next == out.nugget[0] && out.escalations == 0) next *= 10.0;
    } else {
      next = extra == 0.0 ? kJitterStart : extra * 10.0;
    }
    if (next > kJitterCap * (1.0 + 1e-12))
      throw Error(ErrorKind::FactorizationFailure,
                  "correlation matrix not positive definite with jitter up to " + std::to_string(kJitterCap));
    ++out.escalations;
    if (scalar) {
      out.nugget[0] = next;
    } else {
      for (std::size_t i = 0; i < n; ++i) out.nugget[i] += next - extra;
      extra = next;
    }
  }
}

}  // namespace krig
