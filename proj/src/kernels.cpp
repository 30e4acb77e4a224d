#include "krig/kernels.hpp"

#include <cmath>
#include <string>

#include "krig/simd.hpp"

namespace krig {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;

// |dx|^p for p in [1,2]; dx == 0 handled explicitly so log(0) never happens.
inline double abs_pow(double dx, double p) {
  const double a = std::abs(dx);
  if (a == 0.0) return 0.0;
  if (p == 2.0) return a * a;
  if (p == 1.0) return a;
  return std::exp(p * std::log(a));
}

}  // namespace

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::PowerExponential: return "powexp";
    case KernelFamily::Matern52: return "matern52";
  }
  return "unknown";
}

std::string_view to_string(Parameterization p) noexcept {
  switch (p) {
    case Parameterization::Theta: return "theta";
    case Parameterization::Log10Theta: return "log10";
    case Parameterization::InverseTheta: return "inv";
    case Parameterization::LengthScaleSq: return "lensq";
  }
  return "unknown";
}

KernelFamily parse_family(std::string_view name) {
  if (name == "powexp") return KernelFamily::PowerExponential;
  if (name == "matern52") return KernelFamily::Matern52;
  throw Error(ErrorKind::ParseError, "unknown kernel family '" + std::string(name) + "'");
}

Parameterization parse_parameterization(std::string_view name) {
  if (name == "theta") return Parameterization::Theta;
  if (name == "log10") return Parameterization::Log10Theta;
  if (name == "inv") return Parameterization::InverseTheta;
  if (name == "lensq") return Parameterization::LengthScaleSq;
  throw Error(ErrorKind::ParseError, "unknown parameterization '" + std::string(name) + "'");
}

double param_to_theta(Parameterization p, double raw) {
  double theta = 0.0;
  switch (p) {
    case Parameterization::Theta: theta = raw; break;
    case Parameterization::Log10Theta: theta = std::pow(10.0, raw); break;
    case Parameterization::InverseTheta:
      if (!(raw > 0.0)) throw Error(ErrorKind::NonPositiveParameter, "lengthscale d must be > 0");
      theta = 1.0 / raw;
      break;
    case Parameterization::LengthScaleSq:
      if (!(raw > 0.0)) throw Error(ErrorKind::NonPositiveParameter, "lengthscale ell must be > 0");
      theta = 1.0 / (2.0 * raw * raw);
      break;
  }
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw Error(ErrorKind::NonPositiveParameter,
                "parameter " + std::to_string(raw) + " does not map to a positive finite theta");
  return theta;
}

double theta_to_param(Parameterization p, double theta) {
  if (!(theta > 0.0)) throw Error(ErrorKind::NonPositiveParameter, "theta must be > 0");
  switch (p) {
    case Parameterization::Theta: return theta;
    case Parameterization::Log10Theta: return std::log10(theta);
    case Parameterization::InverseTheta: return 1.0 / theta;
    case Parameterization::LengthScaleSq: return std::sqrt(1.0 / (2.0 * theta));
  }
  return theta;
}

KernelSpec KernelSpec::reparameterized(Parameterization target) const {
  KernelSpec out = *this;
  out.parameterization = target;
  for (std::size_t k = 0; k < params.size(); ++k)
    out.params[k] = theta_to_param(target, param_to_theta(parameterization, params[k]));
  return out;
}

void KernelSpec::validate() const {
  if (params.empty()) throw Error(ErrorKind::InvalidArgument, "kernel needs at least one dimension");
  if (family == KernelFamily::PowerExponential && !(exponent >= 1.0 && exponent <= 2.0))
    throw Error(ErrorKind::InvalidArgument, "power-exponential exponent must lie in [1,2]");
  (void)to_canonical_theta(*this);
}

Vector to_canonical_theta(const KernelSpec& spec) {
  Vector theta(spec.params.size());
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = param_to_theta(spec.parameterization, spec.params[k]);
  return theta;
}

Correlation::Correlation(KernelFamily family, double exponent, Vector theta)
    : family_(family), exponent_(exponent), theta_(std::move(theta)), two_theta_(theta_.size()) {
  for (std::size_t k = 0; k < theta_.size(); ++k) {
    if (!(theta_[k] > 0.0) || !std::isfinite(theta_[k]))
      throw Error(ErrorKind::NonPositiveParameter, "theta must be positive and finite");
    two_theta_[k] = 2.0 * theta_[k];
  }
  if (family_ == KernelFamily::PowerExponential && !(exponent_ >= 1.0 && exponent_ <= 2.0))
    throw Error(ErrorKind::InvalidArgument, "power-exponential exponent must lie in [1,2]");
}

Correlation::Correlation(const KernelSpec& spec)
    : Correlation(spec.family, spec.exponent, to_canonical_theta(spec)) {}

double Correlation::operator()(std::span<const double> a, std::span<const double> b) const {
  if (family_ == KernelFamily::Matern52) {
    const double h = std::sqrt(simd::weighted_sq_dist(a, b, two_theta_));
    return (1.0 + kSqrt5 * h + (5.0 / 3.0) * h * h) * std::exp(-kSqrt5 * h);
  }
  if (exponent_ == 2.0) return std::exp(-simd::weighted_sq_dist(a, b, theta_));
  double s = 0.0;
  for (std::size_t k = 0; k < theta_.size(); ++k) s += theta_[k] * abs_pow(a[k] - b[k], exponent_);
  return std::exp(-s);
}

double Correlation::gradient(std::span<const double> a, std::span<const double> b,
                             std::span<double> out) const {
  const std::size_t d = theta_.size();
  if (family_ == KernelFamily::Matern52) {
    // g(h) = (1 + sqrt5 h + 5/3 h^2) e^{-sqrt5 h},  h^2 = sum 2 theta_k dx_k^2
    // dg/dtheta_k = -(5/3)(1 + sqrt5 h) e^{-sqrt5 h} dx_k^2
    const double h = std::sqrt(simd::weighted_sq_dist(a, b, two_theta_));
    const double e = std::exp(-kSqrt5 * h);
    const double scale = -(5.0 / 3.0) * (1.0 + kSqrt5 * h) * e;
    for (std::size_t k = 0; k < d; ++k) {
      const double dx = a[k] - b[k];
      out[k] = scale * dx * dx;
    }
    return (1.0 + kSqrt5 * h + (5.0 / 3.0) * h * h) * e;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    out[k] = abs_pow(a[k] - b[k], exponent_);
    s += theta_[k] * out[k];
  }
  const double r = std::exp(-s);
  for (std::size_t k = 0; k < d; ++k) out[k] *= -r;
  return r;
}

double correlation(const KernelSpec& spec, std::span<const double> xi, std::span<const double> xj) {
  if (xi.size() != spec.dims() || xj.size() != spec.dims())
    throw Error(ErrorKind::DimensionMismatch, "correlation: point dimension differs from kernel");
  return Correlation(spec)(xi, xj);
}

Matrix correlation_matrix(const Correlation& corr, const Matrix& x) {
  if (x.cols() != corr.dims())
    throw Error(ErrorKind::DimensionMismatch, "correlation_matrix: design width differs from kernel");
  const std::size_t n = x.rows();
  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double v = corr(x.row(i), x.row(j));
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

Matrix correlation_matrix(const KernelSpec& spec, const Matrix& x) {
  return correlation_matrix(Correlation(spec), x);
}

Vector cross_correlation(const Correlation& corr, const Matrix& x, std::span<const double> point) {
  if (x.cols() != corr.dims() || point.size() != corr.dims())
    throw Error(ErrorKind::DimensionMismatch, "cross_correlation: dimension differs from kernel");
  Vector r(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) r[i] = corr(x.row(i), point);
  return r;
}

Vector cross_correlation(const KernelSpec& spec, const Matrix& x, std::span<const double> point) {
  return cross_correlation(Correlation(spec), x, point);
}

}  // namespace krig
