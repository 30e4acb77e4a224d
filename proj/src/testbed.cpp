#include "krig/testbed.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "krig/random.hpp"

namespace krig::testbed {

namespace {

void require_dims(std::span<const double> x, std::size_t d, const char* name) {
  if (x.size() != d)
    throw Error(ErrorKind::DimensionMismatch,
                std::string(name) + " expects " + std::to_string(d) + " inputs, got " + std::to_string(x.size()));
}

}  // namespace

double borehole(std::span<const double> x) {
  require_dims(x, 8, "borehole");
  const double rw = kBoreholeRanges[0].at(x[0]);
  const double r = kBoreholeRanges[1].at(x[1]);
  const double tu = kBoreholeRanges[2].at(x[2]);
  const double hu = kBoreholeRanges[3].at(x[3]);
  const double tl = kBoreholeRanges[4].at(x[4]);
  const double hl = kBoreholeRanges[5].at(x[5]);
  const double len = kBoreholeRanges[6].at(x[6]);
  const double kw = kBoreholeRanges[7].at(x[7]);
  const double log_ratio = std::log(r / rw);
  const double denom = log_ratio * (1.0 + 2.0 * len * tu / (log_ratio * rw * rw * kw) + tu / tl);
  return 2.0 * std::numbers::pi * tu * (hu - hl) / denom;
}

double borehole_4d(std::span<const double> x) {
  require_dims(x, 4, "borehole4");
  const double full[8] = {x[0], 0.5, x[1], 0.5, x[2], 0.5, x[3], 0.5};
  return borehole(full);
}

double otl_vb1(double rb1, double rb2) noexcept { return 12.0 * rb2 / (rb1 + rb2); }

double otl_circuit(std::span<const double> x, bool literal) {
  require_dims(x, 6, "otl");
  const double rb1 = kOtlRanges[0].at(x[0]);
  const double rb2 = kOtlRanges[1].at(x[1]);
  const double rf = kOtlRanges[2].at(x[2]);
  const double rc1 = kOtlRanges[3].at(x[3]);
  const double rc2 = kOtlRanges[4].at(x[4]);
  const double beta = kOtlRanges[5].at(x[5]);
  const double vb1 = otl_vb1(rb1, rb2);
  const double gain = beta * (rc2 + 9.0);
  const double denom = gain + rf;
  const double lead = literal ? rb1 : vb1;
  return (lead + 0.74) * gain / denom + 11.35 * rf / denom + 0.74 * rf * gain / (denom * rc1);
}

double dette_pepelyshev(std::span<const double> x) {
  require_dims(x, 8, "detpep");
  const double a = x[0] - 2.0 + 8.0 * x[1] - 8.0 * x[1] * x[1];
  const double b = 3.0 - 4.0 * x[1];
  const double c = 2.0 * x[2] - 1.0;
  double value = 4.0 * a * a + b * b + 16.0 * std::sqrt(x[2] + 1.0) * c * c;
  // Nested sum over x_3..x_k for k = 4..8 (1-based).
  double inner = x[2];
  for (std::size_t k = 4; k <= 8; ++k) {
    inner += x[k - 1];
    value += static_cast<double>(k) * std::log(1.0 + inner);
  }
  return value;
}

double morris_w(std::size_t i, double x) noexcept {
  if (i == 3 || i == 5 || i == 7) return 2.0 * (1.1 * x / (x + 0.1) - 0.5);
  return 2.0 * (x - 0.5);
}

double morris_beta1(std::size_t i) noexcept { return i <= 10 ? 20.0 : (i % 2 == 0 ? 1.0 : -1.0); }

double morris_beta2(std::size_t i, std::size_t j) noexcept {
  if (i <= 6 && j <= 6) return -15.0;
  return (i + j) % 2 == 0 ? 1.0 : -1.0;
}

double morris_beta3(std::size_t i, std::size_t j, std::size_t l) noexcept {
  return (i <= 5 && j <= 5 && l <= 5) ? 10.0 : 0.0;
}

double morris(std::span<const double> x) {
  require_dims(x, 20, "morris");
  double w[21];
  for (std::size_t i = 1; i <= 20; ++i) w[i] = morris_w(i, x[i - 1]);
  double value = 5.0 * w[1] * w[2] * w[3] * w[4];
  for (std::size_t i = 1; i <= 20; ++i) value += morris_beta1(i) * w[i];
  for (std::size_t i = 1; i <= 20; ++i)
    for (std::size_t j = i + 1; j <= 20; ++j) value += morris_beta2(i, j) * w[i] * w[j];
  // Third-order coefficients vanish outside the first five inputs.
  for (std::size_t i = 1; i <= 5; ++i)
    for (std::size_t j = i + 1; j <= 5; ++j)
      for (std::size_t l = j + 1; l <= 5; ++l) value += morris_beta3(i, j, l) * w[i] * w[j] * w[l];
  return value;
}

const std::vector<TestFunction>& functions() {
  static const std::vector<TestFunction> registry = [] {
    std::vector<TestFunction> v;
    v.push_back({"borehole", 8, {std::begin(kBoreholeRanges), std::end(kBoreholeRanges)}, borehole});
    v.push_back({"borehole4",
                 4,
                 {kBoreholeRanges[0], kBoreholeRanges[2], kBoreholeRanges[4], kBoreholeRanges[6]},
                 borehole_4d});
    v.push_back({"otl", 6, {std::begin(kOtlRanges), std::end(kOtlRanges)},
                 [](std::span<const double> x) { return otl_circuit(x, false); }});
    v.push_back({"otl-literal", 6, {std::begin(kOtlRanges), std::end(kOtlRanges)},
                 [](std::span<const double> x) { return otl_circuit(x, true); }});
    v.push_back({"detpep", 8, std::vector<Range>(8, Range{0.0, 1.0}), dette_pepelyshev});
    v.push_back({"morris", 20, std::vector<Range>(20, Range{0.0, 1.0}), morris});
    return v;
  }();
  return registry;
}

std::vector<std::string> function_names() {
  std::vector<std::string> names;
  for (const auto& f : functions()) names.push_back(f.name);
  return names;
}

const TestFunction& find_function(const std::string& name, std::size_t d) {
  std::string key = name;
  if (name == "borehole" && d == 4) key = "borehole4";
  for (const auto& f : functions()) {
    if (f.name != key) continue;
    if (d != 0 && f.dims != d)
      throw Error(ErrorKind::InvalidArgument,
                  "function '" + name + "' has dimension " + std::to_string(f.dims) + ", not " + std::to_string(d));
    return f;
  }
  std::string valid;
  for (const auto& n : function_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::InvalidArgument, "unknown function '" + name + "' (valid: " + valid + ")");
}

std::pair<double, double> mm1_analytic(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw Error(ErrorKind::DomainError, "M/M/1 arrival rate must lie in [0, 1)");
  return {x / (1.0 - x), x / ((1.0 - x) * (1.0 - x))};
}

double mm1_simulate(const Mm1Config& cfg) {
  if (!(cfg.arrival_rate >= 0.0 && cfg.arrival_rate < 1.0))
    throw Error(ErrorKind::DomainError, "M/M/1 arrival rate must lie in [0, 1)");
  if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0))
    throw Error(ErrorKind::InvalidArgument, "warmup fraction must lie in [0, 1)");
  if (cfg.arrival_rate == 0.0 || cfg.customers == 0) return 0.0;

  // Arrival times first, so the horizon (last arrival) and warmup cut are known
  // before the queue is swept.
  Rng rng(cfg.seed);
  std::vector<double> arrivals(cfg.customers);
  std::vector<double> services(cfg.customers);
  double t = 0.0;
  for (std::size_t i = 0; i < cfg.customers; ++i) {
    t += rng.exponential(cfg.arrival_rate);
    arrivals[i] = t;
    services[i] = rng.exponential(1.0);
  }
  const double horizon = t;
  const double warmup = cfg.warmup_fraction * horizon;

  // FIFO single server: departure_i = max(arrival_i, departure_{i-1}) + service_i.
  // Integrate the number in system over [warmup, horizon] from the event list.
  std::vector<double> departures(cfg.customers);
  double last = 0.0;
  for (std::size_t i = 0; i < cfg.customers; ++i) {
    last = std::max(arrivals[i], last) + services[i];
    departures[i] = last;
  }

  double area = 0.0;
  std::size_t in_system = 0;
  double clock = 0.0;
  std::size_t ai = 0;
  std::size_t di = 0;
  auto advance = [&](double next) {
    const double lo = std::max(clock, warmup);
    const double hi = std::min(next, horizon);
    if (hi > lo) area += static_cast<double>(in_system) * (hi - lo);
    clock = next;
  };
  while (ai < cfg.customers || di < cfg.customers) {
    const bool arrival_next = ai < cfg.customers && arrivals[ai] <= departures[di];
    const double next = arrival_next ? arrivals[ai] : departures[di];
    if (next > horizon) break;
    advance(next);
    if (arrival_next) {
      ++in_system;
      ++ai;
    } else {
      --in_system;
      ++di;
    }
  }
  advance(horizon);
  return area / (horizon - warmup);
}

double LinearModel::predict(std::span<const double> x) const {
  if (x.size() != slopes.size()) throw Error(ErrorKind::DimensionMismatch, "lm_predict: wrong input dimension");
  double v = intercept;
  for (std::size_t k = 0; k < slopes.size(); ++k) v += slopes[k] * x[k];
  return v;
}

LinearModel lm_fit(const Matrix& x, std::span<const double> y) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n != y.size()) throw Error(ErrorKind::DimensionMismatch, "lm_fit: X rows differ from y length");
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "lm_fit: no data");

  Eigen::MatrixXd a(n, d + 1);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (std::size_t k = 0; k < d; ++k) a(i, k + 1) = x(i, k);
    b(i) = y[i];
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd coef = cod.solve(b);

  LinearModel lm;
  lm.intercept = coef(0);
  lm.slopes.resize(d);
  for (std::size_t k = 0; k < d; ++k) lm.slopes[k] = coef(k + 1);
  lm.rank_deficient = static_cast<std::size_t>(cod.rank()) < d + 1;
  return lm;
}

Vector lm_predict(const LinearModel& lm, const Matrix& x) {
  Vector out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = lm.predict(x.row(i));
  return out;
}

}  // namespace krig::testbed
