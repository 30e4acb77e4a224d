#pragma once

#include <span>
#include <string>
#include <string_view>

#include "krig/matrix.hpp"

namespace krig {

enum class KernelFamily { PowerExponential, Matern52 };

/// Conventions for the per-dimension correlation parameters. The canonical
/// form is theta, as in R_ij = prod_k exp(-theta_k |x_ik - x_jk|^p).
enum class Parameterization {
  Theta,          // theta
  Log10Theta,     // beta = log10(theta)
  InverseTheta,   // d = 1/theta
  LengthScaleSq,  // ell, with theta = 1 / (2 ell^2)
};

std::string_view to_string(KernelFamily family) noexcept;
std::string_view to_string(Parameterization p) noexcept;
KernelFamily parse_family(std::string_view name);
Parameterization parse_parameterization(std::string_view name);

double param_to_theta(Parameterization p, double raw);
double theta_to_param(Parameterization p, double theta);

struct KernelSpec {
  KernelFamily family = KernelFamily::PowerExponential;
  double exponent = 2.0;  // ignored by Matern52
  Parameterization parameterization = Parameterization::Theta;
  Vector params;          // raw values in `parameterization`

  std::size_t dims() const noexcept { return params.size(); }

  static KernelSpec gaussian(Vector theta) {
    return {KernelFamily::PowerExponential, 2.0, Parameterization::Theta, std::move(theta)};
  }
  static KernelSpec power_exponential(double p, Vector theta) {
    return {KernelFamily::PowerExponential, p, Parameterization::Theta, std::move(theta)};
  }
  static KernelSpec matern52(Vector theta) {
    return {KernelFamily::Matern52, 2.0, Parameterization::Theta, std::move(theta)};
  }

  /// Same kernel re-expressed in another convention.
  KernelSpec reparameterized(Parameterization target) const;

  /// Throws on exponent outside [1,2] or a parameter that maps to theta <= 0.
  void validate() const;
};

/// Canonical theta for every dimension. Throws Error{NonPositiveParameter}.
Vector to_canonical_theta(const KernelSpec& spec);

/// Correlation evaluator bound to canonical theta; what matrix assembly and
/// the likelihood gradient actually use.
class Correlation {
 public:
  Correlation(KernelFamily family, double exponent, Vector theta);
  explicit Correlation(const KernelSpec& spec);

  KernelFamily family() const noexcept { return family_; }
  double exponent() const noexcept { return exponent_; }
  const Vector& theta() const noexcept { return theta_; }
  std::size_t dims() const noexcept { return theta_.size(); }

  double operator()(std::span<const double> a, std::span<const double> b) const;

  /// Derivative of the correlation with respect to theta_k at the pair (a, b),
  /// written into `out` (length d). Returns the correlation value.
  double gradient(std::span<const double> a, std::span<const double> b, std::span<double> out) const;

 private:
  KernelFamily family_;
  double exponent_;
  Vector theta_;
  Vector two_theta_;  // Matern52 scaling: h^2 = sum 2 theta_k dx_k^2
};

double correlation(const KernelSpec& spec, std::span<const double> xi, std::span<const double> xj);

/// Symmetric n x n correlation matrix with unit diagonal.
Matrix correlation_matrix(const Correlation& corr, const Matrix& x);
Matrix correlation_matrix(const KernelSpec& spec, const Matrix& x);

/// r_i = corr(x_i, point).
Vector cross_correlation(const Correlation& corr, const Matrix& x, std::span<const double> point);
Vector cross_correlation(const KernelSpec& spec, const Matrix& x, std::span<const double> point);

}  // namespace krig
