#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "krig/designs.hpp"
#include "krig/kernels.hpp"
#include "krig/linalg.hpp"
#include "krig/ml_estimation.hpp"
#include "krig/nugget.hpp"

namespace krig {

/// (1^T R^{-1} 1)^{-1} 1^T R^{-1} y
double mu_hat(const linalg::SpdFactor& f, std::span<const double> y);

/// (1/n) (y - mu 1)^T R^{-1} (y - mu 1)
double sigma2_hat(const linalg::SpdFactor& f, std::span<const double> y, double mu);

struct Prediction {
  double mean = 0.0;
  double mse = 0.0;      // clamped at 0
  double raw_mse = 0.0;  // before clamping
  /// raw_mse fell below -1e-8 sigma2 (numerical warning, not an error).
  bool negative_mse = false;
};

/// Fitted ordinary-kriging model. Immutable after construction; predictions
/// are read-only and safe to call from several threads.
class GpModel {
 public:
  /// Builds the predictive state from fixed hyperparameters. `theta` is the
  /// canonical theta; `nugget` is the realized inflation (length 1 or n) and
  /// is used as given, without the jitter ladder. `y` is in scaled units.
  static GpModel assemble(const KernelSpec& kernel, Vector theta, Vector nugget, Matrix x, Vector y,
                          designs::ScalingRecord scaling, bool degenerate = false);

  /// Same, but escalates the nugget with the jitter ladder when the
  /// factorization fails; `escalations` receives the number of steps taken.
  static GpModel assemble_with_jitter(const KernelSpec& kernel, Vector theta, Vector nugget, Matrix x, Vector y,
                                      designs::ScalingRecord scaling, std::size_t* escalations = nullptr);

  /// Predictions in scaled output units.
  Prediction predict_scaled(std::span<const double> point) const;
  /// Predictions in original output units.
  Prediction predict(std::span<const double> point) const;
  double predict_mean(std::span<const double> point) const { return predict(point).mean; }
  double predict_mse(std::span<const double> point) const { return predict(point).mse; }

  const KernelSpec& kernel() const noexcept { return kernel_; }
  const Vector& theta() const noexcept { return theta_; }
  double mu_hat() const noexcept { return mu_; }
  double sigma2_hat() const noexcept { return sigma2_; }
  const Vector& nugget() const noexcept { return nugget_; }
  const linalg::SpdFactor& factor() const noexcept { return chol_; }
  const Matrix& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  const Vector& alpha() const noexcept { return alpha_; }
  const designs::ScalingRecord& scaling() const noexcept { return scaling_; }
  bool degenerate() const noexcept { return degenerate_; }
  std::size_t size() const noexcept { return x_.rows(); }
  std::size_t dims() const noexcept { return x_.cols(); }

 private:
  GpModel() = default;
  void finish();

  KernelSpec kernel_;
  Vector theta_;
  Vector nugget_;
  Matrix x_;
  Vector y_;
  designs::ScalingRecord scaling_;
  bool degenerate_ = false;

  linalg::SpdFactor chol_;
  double mu_ = 0.0;
  double sigma2_ = 0.0;
  Vector alpha_;     // R_delta^{-1} (y - mu 1)
  Vector rinv_one_;  // R_delta^{-1} 1
  double one_rinv_one_ = 1.0;
};

struct FitDiagnostics {
  double deviance = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t starts = 0;
  std::size_t best_start = 0;
  std::string termination;
  std::size_t objective_failures = 0;
  std::size_t jitter_escalations = 0;  // during optimization and final assembly
  std::size_t noise_scale_rounds = 0;  // fixed-point rounds for sigma2-relative per-point noise
  bool degenerate = false;
  std::vector<StartOutcome> runs;
};

struct FitResult {
  GpModel model;
  FitDiagnostics diagnostics;
};

/// Scales y to mean 0 / range 1, maximizes the profile likelihood over theta
/// (and the nugget when estimated), and assembles the model. `kernel` supplies
/// the family, exponent and reporting parameterization; its params are
/// ignored. Constant y yields a mean-only model with sigma2 = 0 and the
/// degenerate flag set. Throws Error{FactorizationFailure} when the jitter
/// ladder cannot stabilize the final model.
FitResult fit(const Matrix& x, std::span<const double> y, const KernelSpec& kernel, const FitConfig& config);

/// Same as fit() for outputs that are already scaled; the model's scaling
/// record is the identity.
FitResult fit_scaled(const Matrix& x, std::span<const double> y_scaled, const KernelSpec& kernel,
                     const FitConfig& config);

// Model file: line-oriented "key value..." text, see README for the field list.
inline constexpr int kModelFormatVersion = 1;
void write_model(std::ostream& os, const GpModel& model);
GpModel read_model(std::istream& is);
void save_model(const std::string& path, const GpModel& model);
GpModel load_model(const std::string& path);

}  // namespace krig
