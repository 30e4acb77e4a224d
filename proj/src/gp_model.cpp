#include "krig/gp_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "krig/simd.hpp"

namespace krig {

namespace {

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void check_inputs(const Matrix& x, std::span<const double> y) {
  if (x.rows() < 2) throw Error(ErrorKind::InvalidArgument, "fit needs at least 2 points");
  if (x.cols() == 0) throw Error(ErrorKind::InvalidArgument, "fit needs at least 1 input dimension");
  if (x.rows() != y.size()) throw Error(ErrorKind::DimensionMismatch, "X rows differ from y length");
  for (double v : x.data())
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "X contains a non-finite value");
  for (double v : y)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "y contains a non-finite value");
}

KernelSpec reported_kernel(const KernelSpec& proto, const Vector& theta) {
  KernelSpec k = proto;
  k.params.resize(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) k.params[i] = theta_to_param(proto.parameterization, theta[i]);
  return k;
}

}  // namespace

double mu_hat(const linalg::SpdFactor& f, std::span<const double> y) {
  const Vector ones(f.order(), 1.0);
  const Vector a = linalg::solve_spd(f, ones);
  const Vector b = linalg::solve_spd(f, y);
  return sum(b) / sum(a);
}

double sigma2_hat(const linalg::SpdFactor& f, std::span<const double> y, double mu) {
  Vector res(y.begin(), y.end());
  for (double& v : res) v -= mu;
  const Vector z = linalg::solve_lower(f, res);
  return std::max(simd::dot(z, z) / static_cast<double>(y.size()), 0.0);
}

GpModel GpModel::assemble(const KernelSpec& kernel, Vector theta, Vector nugget, Matrix x, Vector y,
                          designs::ScalingRecord scaling, bool degenerate) {
  if (x.rows() != y.size()) throw Error(ErrorKind::DimensionMismatch, "assemble: X rows differ from y length");
  if (theta.size() != x.cols()) throw Error(ErrorKind::DimensionMismatch, "assemble: theta length differs from X width");
  if (nugget.size() != 1 && nugget.size() != x.rows())
    throw Error(ErrorKind::DimensionMismatch, "assemble: nugget must be scalar or length n");
  GpModel m;
  m.kernel_ = reported_kernel(kernel, theta);
  m.theta_ = std::move(theta);
  m.nugget_ = std::move(nugget);
  m.x_ = std::move(x);
  m.y_ = std::move(y);
  m.scaling_ = scaling;
  m.degenerate_ = degenerate;
  const Correlation corr(m.kernel_.family, m.kernel_.exponent, m.theta_);
  m.chol_ = linalg::cholesky(add_nugget(correlation_matrix(corr, m.x_), m.nugget_));
  m.finish();
  return m;
}

GpModel GpModel::assemble_with_jitter(const KernelSpec& kernel, Vector theta, Vector nugget, Matrix x, Vector y,
                                      designs::ScalingRecord scaling, std::size_t* escalations) {
  const Correlation corr(kernel.family, kernel.exponent, theta);
  JitteredFactor jf = factor_with_jitter(correlation_matrix(corr, x), nugget);
  if (escalations) *escalations = jf.escalations;
  GpModel m;
  m.kernel_ = reported_kernel(kernel, theta);
  m.theta_ = std::move(theta);
  m.nugget_ = std::move(jf.nugget);
  m.x_ = std::move(x);
  m.y_ = std::move(y);
  m.scaling_ = scaling;
  m.chol_ = std::move(jf.factor);
  m.finish();
  return m;
}

void GpModel::finish() {
  const std::size_t n = x_.rows();
  rinv_one_ = linalg::solve_spd(chol_, Vector(n, 1.0));
  one_rinv_one_ = sum(rinv_one_);
  const Vector rinv_y = linalg::solve_spd(chol_, y_);
  mu_ = sum(rinv_y) / one_rinv_one_;
  alpha_.resize(n);
  for (std::size_t i = 0; i < n; ++i) alpha_[i] = rinv_y[i] - mu_ * rinv_one_[i];
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += (y_[i] - mu_) * alpha_[i];
  sigma2_ = std::max(quad / static_cast<double>(n), 0.0);
  if (degenerate_) sigma2_ = 0.0;
}

Prediction GpModel::predict_scaled(std::span<const double> point) const {
  if (point.size() != dims()) throw Error(ErrorKind::DimensionMismatch, "predict: point dimension differs from model");
  const Correlation corr(kernel_.family, kernel_.exponent, theta_);
  const Vector r = cross_correlation(corr, x_, point);

  Prediction p;
  p.mean = mu_ + simd::dot(r, alpha_);
  const Vector z = linalg::solve_lower(chol_, r);
  const double r_rinv_r = simd::dot(z, z);
  const double one_rinv_r = simd::dot(rinv_one_, r);
  const double gap = 1.0 - one_rinv_r;
  p.raw_mse = sigma2_ * (1.0 - r_rinv_r + gap * gap / one_rinv_one_);
  p.negative_mse = p.raw_mse < -1e-8 * sigma2_;
  p.mse = std::max(p.raw_mse, 0.0);
  return p;
}

Prediction GpModel::predict(std::span<const double> point) const {
  Prediction p = predict_scaled(point);
  p.mean = scaling_.invert(p.mean);
  p.mse = scaling_.invert_variance(p.mse);
  p.raw_mse = scaling_.invert_variance(p.raw_mse);
  return p;
}

namespace {

FitResult fit_core(const Matrix& x, Vector ys, designs::ScalingRecord record, const KernelSpec& kernel,
                   const FitConfig& config) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  config.nugget.validate(n);
  FitDiagnostics diag;

  if (record.degenerate) {
    // Constant response: mean-only model, nothing to estimate.
    Vector theta(d, 1.0);
    const Vector nugget = config.nugget.per_point_noise ? Vector(n, 0.0) : Vector{0.0};
    std::size_t esc = 0;
    GpModel m = GpModel::assemble_with_jitter(kernel, theta, nugget, x, ys, record, &esc);
    GpModel degenerate = GpModel::assemble(kernel, m.theta(), m.nugget(), x, std::move(ys), record, true);
    diag.degenerate = true;
    diag.jitter_escalations = esc;
    diag.termination = "degenerate";
    return {std::move(degenerate), std::move(diag)};
  }

  FitConfig cfg = config;
  const bool relative_noise = cfg.nugget.stochastic() && cfg.nugget.mode == NuggetStrategy::Mode::Fixed;
  MultistartResult best;
  Vector theta;
  Vector nugget;
  const std::size_t rounds = relative_noise ? 8 : 1;
  for (std::size_t round = 0; round < rounds; ++round) {
    const DevianceObjective objective(x, ys, kernel.family, kernel.exponent, cfg.search_transform, cfg.nugget);
    best = multistart_fit(x, ys, kernel, cfg);
    theta = objective.theta(best.argmin);
    const Correlation corr(kernel.family, kernel.exponent, theta);
    nugget = objective.nugget_at(best.argmin, correlation_matrix(corr, x));
    diag.noise_scale_rounds = round + 1;
    if (!relative_noise) break;

    // delta_i = v_i / sigma2: refit until sigma2 settles.
    const GpModel trial = GpModel::assemble_with_jitter(kernel, theta, nugget, x, ys, record);
    const double sigma2 = trial.sigma2_hat();
    const double target = sigma2 > 0.0 ? objective.noise_divisor() / sigma2 : cfg.nugget.value;
    const double change = std::abs(target - cfg.nugget.value) / std::max(cfg.nugget.value, 1e-300);
    cfg.nugget.value = target;
    if (change < 1e-3) break;
  }

  std::size_t esc = 0;
  GpModel model = GpModel::assemble_with_jitter(kernel, theta, nugget, x, std::move(ys), record, &esc);

  diag.deviance = best.value;
  diag.starts = best.runs.size();
  diag.best_start = best.best_start;
  for (const StartOutcome& r : best.runs) {
    diag.iterations += r.iterations;
    diag.evaluations += r.evaluations;
  }
  diag.termination = std::string(optimize::to_string(best.runs[best.best_start].reason));
  diag.objective_failures = best.objective_failures;
  diag.jitter_escalations = best.jitter_escalations + esc;
  diag.runs = std::move(best.runs);
  return {std::move(model), std::move(diag)};
}

}  // namespace

FitResult fit(const Matrix& x, std::span<const double> y, const KernelSpec& kernel, const FitConfig& config) {
  check_inputs(x, y);
  designs::ScaledOutputs scaled = designs::scale_outputs(y);
  if (!config.nugget.per_point_noise) return fit_core(x, std::move(scaled.values), scaled.record, kernel, config);
  // Noise variances are in output units; the fit runs on scaled outputs.
  FitConfig cfg = config;
  const double r2 = scaled.record.y_range * scaled.record.y_range;
  for (double& v : *cfg.nugget.per_point_noise) v /= r2;
  return fit_core(x, std::move(scaled.values), scaled.record, kernel, cfg);
}

FitResult fit_scaled(const Matrix& x, std::span<const double> y_scaled, const KernelSpec& kernel,
                     const FitConfig& config) {
  check_inputs(x, y_scaled);
  const auto [lo, hi] = std::minmax_element(y_scaled.begin(), y_scaled.end());
  designs::ScalingRecord record = designs::ScalingRecord::identity();
  record.degenerate = !(*hi - *lo > 0.0);
  return fit_core(x, Vector(y_scaled.begin(), y_scaled.end()), record, kernel, config);
}

// ---------------------------------------------------------------------------
// Model file

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_values(std::ostream& os, const char* key, std::span<const double> v) {
  os << key;
  for (double x : v) os << ' ' << fmt_double(x);
  os << '\n';
}

struct Reader {
  std::istream& is;
  std::size_t line_no = 0;

  std::vector<std::string> next(const char* expected_key) {
    std::string line;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (tokens.empty()) continue;
      if (tokens[0] != expected_key)
        fail(std::string("expected key '") + expected_key + "', found '" + tokens[0] + "'");
      tokens.erase(tokens.begin());
      return tokens;
    }
    fail(std::string("unexpected end of file, expected '") + expected_key + "'");
    return {};
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::ParseError, "model file line " + std::to_string(line_no) + ": " + msg);
  }

  double number(const std::string& token) const {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) fail("bad number '" + token + "'");
    return v;
  }

  Vector numbers(const std::vector<std::string>& tokens, std::size_t expected) const {
    if (tokens.size() != expected)
      fail("expected " + std::to_string(expected) + " values, found " + std::to_string(tokens.size()));
    Vector v;
    for (const auto& t : tokens) v.push_back(number(t));
    return v;
  }

  std::string word(const char* key) {
    auto t = next(key);
    if (t.size() != 1) fail(std::string("key '") + key + "' takes one value");
    return t[0];
  }

  std::size_t count(const char* key) {
    const double v = numbers(next(key), 1)[0];
    if (v < 0 || v != std::floor(v)) fail(std::string("key '") + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }
};

}  // namespace

void write_model(std::ostream& os, const GpModel& m) {
  os << "krig-model " << kModelFormatVersion << '\n';
  os << "family " << to_string(m.kernel().family) << '\n';
  os << "exponent " << fmt_double(m.kernel().exponent) << '\n';
  os << "parameterization " << to_string(m.kernel().parameterization) << '\n';
  os << "dims " << m.dims() << '\n';
  os << "points " << m.size() << '\n';
  os << "degenerate " << (m.degenerate() ? 1 : 0) << '\n';
  write_values(os, "theta", m.theta());
  write_values(os, "params", m.kernel().params);
  os << "mu_hat " << fmt_double(m.mu_hat()) << '\n';
  os << "sigma2_hat " << fmt_double(m.sigma2_hat()) << '\n';
  os << "nugget_kind " << (m.nugget().size() == 1 ? "scalar" : "vector") << '\n';
  write_values(os, "nugget", m.nugget());
  os << "scale_mean " << fmt_double(m.scaling().y_mean) << '\n';
  os << "scale_range " << fmt_double(m.scaling().y_range) << '\n';
  os << "scale_degenerate " << (m.scaling().degenerate ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) write_values(os, "x", m.x().row(i));
  write_values(os, "y", m.y());
  os << "end\n";
}

GpModel read_model(std::istream& is) {
  Reader rd{is};
  const auto header = rd.next("krig-model");
  if (header.size() != 1 || header[0] != std::to_string(kModelFormatVersion))
    rd.fail("unsupported model format version");

  KernelSpec kernel;
  try {
    kernel.family = parse_family(rd.word("family"));
    kernel.exponent = rd.number(rd.word("exponent"));
    kernel.parameterization = parse_parameterization(rd.word("parameterization"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) rd.fail(e.what());
    throw;
  }
  const std::size_t d = rd.count("dims");
  const std::size_t n = rd.count("points");
  const bool degenerate = rd.count("degenerate") != 0;
  Vector theta = rd.numbers(rd.next("theta"), d);
  kernel.params = rd.numbers(rd.next("params"), d);
  (void)rd.next("mu_hat");
  (void)rd.next("sigma2_hat");
  const std::string kind = rd.word("nugget_kind");
  if (kind != "scalar" && kind != "vector") rd.fail("nugget_kind must be scalar or vector");
  Vector nugget = rd.numbers(rd.next("nugget"), kind == "scalar" ? 1 : n);
  designs::ScalingRecord scaling;
  scaling.y_mean = rd.number(rd.word("scale_mean"));
  scaling.y_range = rd.number(rd.word("scale_range"));
  scaling.degenerate = rd.count("scale_degenerate") != 0;
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector row = rd.numbers(rd.next("x"), d);
    std::copy(row.begin(), row.end(), x.row(i).begin());
  }
  Vector y = rd.numbers(rd.next("y"), n);
  (void)rd.next("end");
  return GpModel::assemble(kernel, std::move(theta), std::move(nugget), std::move(x), std::move(y), scaling,
                           degenerate);
}

void save_model(const std::string& path, const GpModel& model) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "' for writing");
  write_model(os, model);
  if (!os) throw Error(ErrorKind::InvalidArgument, "failed writing '" + path + "'");
}

GpModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::ParseError, "cannot open model file '" + path + "'");
  return read_model(is);
}

}  // namespace krig
