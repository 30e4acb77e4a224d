#pragma once
// Random problem instances shared by the unit tests and the acceptance binary.

#include <cmath>
#include <string>

#include "helpers.hpp"
#include "krig/kernels.hpp"
#include "krig/linalg.hpp"
#include "krig/ml_estimation.hpp"
#include "krig/nugget.hpp"
#include "krig/random.hpp"

namespace cases {

using namespace krig;

struct Instance {
  KernelFamily family = KernelFamily::PowerExponential;
  double exponent = 2.0;
  Matrix x;
  Vector y;
  Vector theta;
  double nugget = 0.0;

  std::string describe() const {
    return std::string(to_string(family)) + " p=" + std::to_string(exponent) + " n=" + std::to_string(x.rows()) +
           " d=" + std::to_string(x.cols()) + " nugget=" + std::to_string(nugget);
  }
};

inline double smooth_response(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += std::sin(3.0 * x[k] + static_cast<double>(k)) * (1.0 + 0.5 * k);
  return s + x[0] * x[0];
}

/// Small instance with moderate conditioning: theta in [1, 50] (log-uniform),
/// nugget either 0 or in [1e-8, 1e-2].
inline Instance small_instance(Rng& rng, std::size_t max_n = 8, std::size_t max_d = 3) {
  Instance in;
  const std::uint64_t f = rng.below(3);
  in.family = f == 2 ? KernelFamily::Matern52 : KernelFamily::PowerExponential;
  in.exponent = f == 1 ? 1.0 + rng.uniform() : 2.0;
  const std::size_t n = 2 + rng.below(max_n - 1);
  const std::size_t d = 1 + rng.below(max_d);
  in.x = testutil::random_matrix(n, d, rng, 0.0, 1.0);
  in.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) in.y[i] = smooth_response(in.x.row(i)) + 0.1 * (rng.uniform() - 0.5);
  in.theta.resize(d);
  for (double& t : in.theta) t = std::pow(10.0, 1.7 * rng.uniform());
  in.nugget = rng.below(2) ? std::pow(10.0, -8.0 + 6.0 * rng.uniform()) : 0.0;
  return in;
}

/// small_instance() redrawn until kappa(R_delta) <= max_kappa. Forward errors
/// of any double-precision solve grow like kappa * eps, so exact-arithmetic
/// comparisons at 1e-9 need this bound. `rejected` counts the redraws.
inline Instance conditioned_instance(Rng& rng, double max_kappa = 1e6, std::size_t* rejected = nullptr) {
  for (;;) {
    Instance in = small_instance(rng);
    const Matrix r = correlation_matrix(Correlation(in.family, in.exponent, in.theta), in.x);
    if (linalg::condition_number(add_nugget(r, Vector{in.nugget})) <= max_kappa) return in;
    if (rejected) ++*rejected;
  }
}

}  // namespace cases

namespace cases {

struct GradientCase {
  std::string label;
  double rel_error = 0.0;
};

/// One random deviance-gradient check against central differences with
/// h = 1e-5 in search space. Instances whose correlation matrix is too
/// ill-conditioned for differencing (kappa > 1e8) are redrawn.
inline GradientCase gradient_check(Rng& rng) {
  for (;;) {
    Instance in = small_instance(rng, 15, 4);
    const auto transform = static_cast<SearchTransform>(rng.below(3));
    const std::uint64_t mode = rng.below(4);
    NuggetStrategy strategy = NuggetStrategy::fixed(in.nugget);
    double searched = 0.0;
    if (mode == 2) {
      strategy = NuggetStrategy::estimated(std::max(in.nugget, 1e-6));
      searched = std::log(strategy.value);
    } else if (mode == 3) {
      Vector v(in.x.rows());
      for (double& e : v) e = 1e-3 * (0.1 + rng.uniform());
      strategy = NuggetStrategy::stochastic_joint(v, 0.5 + rng.uniform());
      searched = std::log(strategy.value);
    }
    const double diag = mode == 2 ? strategy.value : (mode == 3 ? 0.0 : in.nugget);
    const Matrix r = correlation_matrix(Correlation(in.family, in.exponent, in.theta), in.x);
    if (linalg::condition_number(add_nugget(r, Vector{diag})) > 1e8) continue;

    const DevianceObjective obj(in.x, in.y, in.family, in.exponent, transform, strategy);
    Vector s(obj.search_dims());
    for (std::size_t k = 0; k < in.theta.size(); ++k) s[k] = theta_to_search(transform, in.theta[k]);
    if (strategy.searched()) s.back() = searched;

    Vector g(s.size());
    const double f0 = obj.value_and_gradient(s, g);
    if (!std::isfinite(f0) || obj.jitter_escalations() > 0) continue;
    double num = 0.0, den = 0.0;
    const double h = 1e-5;
    for (std::size_t k = 0; k < s.size(); ++k) {
      Vector sp = s, sm = s;
      sp[k] += h;
      sm[k] -= h;
      const double fd = (obj.value(sp) - obj.value(sm)) / (2.0 * h);
      num += (g[k] - fd) * (g[k] - fd);
      den += fd * fd;
    }
    if (obj.jitter_escalations() > 0) continue;
    static const char* modes[] = {"fixed", "fixed", "estimated", "stochastic"};
    return {in.describe() + " transform=" + std::string(to_string(transform)) + " mode=" + modes[mode],
            std::sqrt(num) / std::max(std::sqrt(den), 1e-3)};
  }
}

}  // namespace cases
