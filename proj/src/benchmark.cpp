#include "krig/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "krig/designs.hpp"
#include "krig/random.hpp"
#include "krig/testbed.hpp"

namespace krig::bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
// handled exactly once; results must be written to per-index slots.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::uint64_t fnv1a(std::uint64_t h, std::span<const double> v) {
  for (double x : v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &x, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

FitConfig config_for(const FitProfile& p, std::uint64_t seed) {
  FitConfig cfg;
  cfg.nugget = p.nugget;
  cfg.n_starts = p.n_starts;
  cfg.max_iters = p.max_iters;
  cfg.seed = seed;
  return cfg;
}

BenchResult failed_row(BenchResult row, const std::string& why) {
  row.emrmse_gp = row.pmrmse_gp = row.xi = row.pi = kNaN;
  row.failed = true;
  row.failure = why;
  ++row.warnings;
  return row;
}

// Fits one profile on scaled data and scores it against scaled truths.
BenchResult score_profile(BenchResult row, const FitProfile& profile, const FitConfig& cfg, const Matrix& x,
                          const Vector& ys, const Matrix& pred_x, const Vector& truth, double emrmse_lm) {
  try {
    const auto t0 = Clock::now();
    FitResult fr = fit_scaled(x, ys, profile.kernel, cfg);
    row.fit_seconds = seconds_since(t0);
    row.warnings += fr.diagnostics.objective_failures + fr.diagnostics.jitter_escalations;

    const auto t1 = Clock::now();
    Vector mean(pred_x.rows());
    Vector mse(pred_x.rows());
    for (std::size_t i = 0; i < pred_x.rows(); ++i) {
      const Prediction p = fr.model.predict(pred_x.row(i));
      mean[i] = p.mean;
      mse[i] = p.mse;
      if (p.negative_mse) ++row.warnings;
    }
    row.predict_seconds = seconds_since(t1);

    row.emrmse_gp = emrmse(mean, truth);
    row.pmrmse_gp = pmrmse(mse);
    try {
      std::tie(row.xi, row.pi) = xi_pi(row.emrmse_gp, row.pmrmse_gp, emrmse_lm);
    } catch (const Error&) {
      row.xi = row.pi = kNaN;
      ++row.warnings;
    }
    return row;
  } catch (const Error& e) {
    return failed_row(std::move(row), e.what());
  }
}

void sort_rows(std::vector<BenchResult>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const BenchResult& a, const BenchResult& b) {
    return std::tie(a.function, a.n, a.profile, a.macrorep) < std::tie(b.function, b.n, b.profile, b.macrorep);
  });
}

}  // namespace

const std::vector<FitProfile>& builtin_profiles() {
  static const std::vector<FitProfile> profiles = [] {
    using P = Parameterization;
    auto gauss = [](P param) {
      KernelSpec k = KernelSpec::gaussian({});
      k.parameterization = param;
      return k;
    };
    KernelSpec pexp = KernelSpec::power_exponential(1.95, {});
    pexp.parameterization = P::Log10Theta;
    KernelSpec matern = KernelSpec::matern52({});
    matern.parameterization = P::LengthScaleSq;
    const Vector placeholder;
    return std::vector<FitProfile>{
        {"gauss-nugE", gauss(P::Theta), NuggetStrategy::estimated(1e-6)},
        {"gauss-nug0", gauss(P::Theta), NuggetStrategy::fixed(0.0)},
        {"gauss-nug6", gauss(P::InverseTheta), NuggetStrategy::fixed(1e-6)},
        {"gauss-dace", gauss(P::Theta), NuggetStrategy::dace_default()},
        {"gauss-dlb", gauss(P::Log10Theta), NuggetStrategy::stability_lower_bound()},
        {"pexp195-dlb", pexp, NuggetStrategy::stability_lower_bound()},
        {"matern52-nugE", matern, NuggetStrategy::estimated(1e-6)},
        {"sk-joint", gauss(P::Theta), NuggetStrategy::stochastic_joint(placeholder), 5, 200, true},
        {"sk-fixed", gauss(P::Theta), NuggetStrategy::stochastic_relative(placeholder), 5, 200, true},
    };
  }();
  return profiles;
}

std::vector<std::string> profile_names(bool stochastic) {
  std::vector<std::string> names;
  for (const auto& p : builtin_profiles())
    if (p.stochastic == stochastic) names.push_back(p.label);
  return names;
}

const FitProfile& find_profile(const std::string& label) {
  for (const auto& p : builtin_profiles())
    if (p.label == label) return p;
  std::string valid;
  for (const auto& p : builtin_profiles()) valid += (valid.empty() ? "" : ", ") + p.label;
  throw Error(ErrorKind::InvalidArgument, "unknown profile '" + label + "' (valid: " + valid + ")");
}

std::vector<FitProfile> parse_profiles(const std::string& list, bool stochastic) {
  std::vector<FitProfile> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    item = item.substr(b, item.find_last_not_of(" \t") - b + 1);
    const FitProfile& p = find_profile(item);
    if (p.stochastic != stochastic) {
      std::string valid;
      for (const auto& n : profile_names(stochastic)) valid += (valid.empty() ? "" : ", ") + n;
      throw Error(ErrorKind::InvalidArgument, "profile '" + item + "' is not usable here (valid: " + valid + ")");
    }
    for (const auto& q : out)
      if (q.label == p.label) throw Error(ErrorKind::InvalidArgument, "duplicate profile '" + item + "'");
    out.push_back(p);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no profiles given");
  return out;
}

double emrmse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size())
    throw Error(ErrorKind::DimensionMismatch, "emrmse: prediction and truth lengths differ");
  if (predictions.empty()) throw Error(ErrorKind::InvalidArgument, "emrmse: no points");
  double s = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double e = predictions[i] - truths[i];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(truths.size()));
}

double pmrmse(std::span<const double> mse) {
  if (mse.empty()) throw Error(ErrorKind::InvalidArgument, "pmrmse: no points");
  double s = 0.0;
  for (double v : mse) {
    if (v < 0.0) throw Error(ErrorKind::NegativeVariance, "pmrmse: negative predictive variance");
    s += v;
  }
  return std::sqrt(s / static_cast<double>(mse.size()));
}

std::pair<double, double> xi_pi(double emrmse_gp, double pmrmse_gp, double emrmse_lm) {
  if (!(emrmse_lm > 0.0)) throw Error(ErrorKind::ZeroBaseline, "linear baseline has zero error");
  return {emrmse_gp / emrmse_lm, pmrmse_gp / emrmse_lm};
}

std::uint64_t MacrorepSeeds::fit(const std::string& profile_label) const noexcept {
  return mix_seed(macrorep, fnv1a(profile_label));
}

MacrorepSeeds macrorep_seeds(std::uint64_t base_seed, std::size_t macrorep) noexcept {
  const std::uint64_t m = mix_seed(base_seed, macrorep);
  return {m, mix_seed(m, 0), mix_seed(m, 1)};
}

std::vector<BenchResult> run_experiment(const ExperimentConfig& config) {
  const testbed::TestFunction& fn = testbed::find_function(config.function, config.d);
  const std::size_t d = fn.dims;
  if (config.n < 2) throw Error(ErrorKind::InvalidArgument, "benchmark: n must be at least 2");
  if (config.m < 1) throw Error(ErrorKind::InvalidArgument, "benchmark: m must be at least 1");
  if (config.macroreps < 1) throw Error(ErrorKind::InvalidArgument, "benchmark: macroreps must be at least 1");
  if (config.profiles.empty()) throw Error(ErrorKind::InvalidArgument, "benchmark: no profiles");
  for (const auto& p : config.profiles)
    if (p.stochastic) throw Error(ErrorKind::InvalidArgument, "profile '" + p.label + "' needs replicated data");

  struct Data {
    MacrorepSeeds seeds;
    Matrix x, pred_x;
    Vector ys, truth;
    double emrmse_lm = 0.0;
    bool lm_rank_deficient = false;
    std::uint64_t hash = 0;
  };
  auto hash_of = [](const Data& dt) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, dt.x.data());
    h = fnv1a(h, dt.ys);
    h = fnv1a(h, dt.pred_x.data());
    return fnv1a(h, dt.truth);
  };

  std::vector<Data> data(config.macroreps);
  parallel_for(config.macroreps, config.jobs, [&](std::size_t r) {
    Data& dt = data[r];
    dt.seeds = macrorep_seeds(config.base_seed, r);
    dt.x = designs::maximin_lhs(config.n, d, dt.seeds.design, config.design_swaps);
    dt.pred_x = designs::maximin_lhs(config.m, d, dt.seeds.prediction, config.prediction_swaps);
    Vector y(config.n);
    for (std::size_t i = 0; i < config.n; ++i) y[i] = fn.evaluate(dt.x.row(i));
    const designs::ScaledOutputs scaled = designs::scale_outputs(y);
    dt.ys = scaled.values;
    dt.truth.resize(config.m);
    for (std::size_t i = 0; i < config.m; ++i) dt.truth[i] = scaled.record.apply(fn.evaluate(dt.pred_x.row(i)));
    const testbed::LinearModel lm = testbed::lm_fit(dt.x, dt.ys);
    dt.lm_rank_deficient = lm.rank_deficient;
    dt.emrmse_lm = emrmse(testbed::lm_predict(lm, dt.pred_x), dt.truth);
    dt.hash = hash_of(dt);
  });

  const std::size_t np = config.profiles.size();
  std::vector<BenchResult> rows(config.macroreps * np);
  parallel_for(rows.size(), config.jobs, [&](std::size_t cell) {
    const std::size_t r = cell / np;
    const FitProfile& profile = config.profiles[cell % np];
    const Data& dt = data[r];
    if (hash_of(dt) != dt.hash) throw std::logic_error("benchmark: shared macroreplicate data changed");

    BenchResult row;
    row.function = fn.name;
    row.d = d;
    row.n = config.n;
    row.profile = profile.label;
    row.macrorep = r;
    row.seed = dt.seeds.macrorep;
    row.emrmse_lm = dt.emrmse_lm;
    row.warnings = dt.lm_rank_deficient ? 1 : 0;
    rows[cell] = score_profile(std::move(row), profile, config_for(profile, dt.seeds.fit(profile.label)), dt.x,
                               dt.ys, dt.pred_x, dt.truth, dt.emrmse_lm);
  });
  sort_rows(rows);
  return rows;
}

std::vector<std::size_t> allocate_replicates(std::span<const double> weights, std::size_t total) {
  const std::size_t k = weights.size();
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "allocate_replicates: no points");
  if (total < k) throw Error(ErrorKind::InvalidArgument, "allocate_replicates: total below one per point");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidArgument, "allocate_replicates: bad weight");

  std::vector<std::size_t> out(k, 0);
  std::vector<bool> pinned(k, false);
  const bool all_zero = std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
  Vector w(weights.begin(), weights.end());
  if (all_zero) std::fill(w.begin(), w.end(), 1.0);

  // Pin points whose proportional share is below one, then re-split.
  Vector quota(k, 0.0);
  for (;;) {
    std::size_t remaining = total;
    double wsum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i])
        --remaining;
      else
        wsum += w[i];
    }
    bool changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i]) continue;
      quota[i] = wsum > 0.0 ? static_cast<double>(remaining) * w[i] / wsum : 0.0;
      if (quota[i] < 1.0) {
        pinned[i] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::size_t assigned = 0;
  std::vector<std::pair<double, std::size_t>> remainders;
  for (std::size_t i = 0; i < k; ++i) {
    if (pinned[i]) {
      out[i] = 1;
    } else {
      out[i] = static_cast<std::size_t>(std::floor(quota[i]));
      remainders.emplace_back(quota[i] - static_cast<double>(out[i]), i);
    }
    assigned += out[i];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; assigned < total && !remainders.empty(); ++j, ++assigned)
    ++out[remainders[j % remainders.size()].second];
  return out;
}

SkOutput run_sk_mm1(const SkConfig& config) {
  constexpr std::size_t k = std::size(kMm1Design);
  if (config.n1 < 2) throw Error(ErrorKind::InvalidArgument, "sk-mm1: n1 must be at least 2");
  if (config.n2 < k) throw Error(ErrorKind::InvalidArgument, "sk-mm1: n2 must be at least 7");
  if (config.profiles.empty()) throw Error(ErrorKind::InvalidArgument, "sk-mm1: no profiles");
  if (config.grid_points < 2) throw Error(ErrorKind::InvalidArgument, "sk-mm1: grid needs at least 2 points");
  for (const auto& p : config.profiles)
    if (!p.stochastic) throw Error(ErrorKind::InvalidArgument, "profile '" + p.label + "' is not a stochastic-kriging profile");

  const double lo = kMm1Design[0];
  const double span_x = kMm1Design[k - 1] - lo;

  struct Data {
    std::uint64_t seed = 0;
    SkMacrorep rep;
    Matrix x, grid;
    Vector ys, noise_scaled, truth;
    double emrmse_lm = 0.0;
  };
  std::vector<Data> data(config.macroreps);

  parallel_for(config.macroreps, config.jobs, [&](std::size_t r) {
    Data& dt = data[r];
    dt.seed = mix_seed(config.base_seed, r);
    auto simulate = [&](std::size_t point, std::size_t rep) {
      testbed::Mm1Config c;
      c.arrival_rate = kMm1Design[point];
      c.customers = config.customers;
      c.seed = mix_seed(mix_seed(dt.seed, point), rep);
      return testbed::mm1_simulate(c);
    };
    std::vector<Vector> obs(k);
    Vector sd(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < config.n1; ++j) obs[i].push_back(simulate(i, j));
      const double mean = std::accumulate(obs[i].begin(), obs[i].end(), 0.0) / static_cast<double>(config.n1);
      double ss = 0.0;
      for (double v : obs[i]) ss += (v - mean) * (v - mean);
      sd[i] = std::sqrt(ss / static_cast<double>(config.n1 - 1));
    }
    dt.rep.allocation = allocate_replicates(sd, config.n2);
    dt.rep.means.resize(k);
    dt.rep.noise.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < dt.rep.allocation[i]; ++j) obs[i].push_back(simulate(i, config.n1 + j));
      const double cnt = static_cast<double>(obs[i].size());
      const double mean = std::accumulate(obs[i].begin(), obs[i].end(), 0.0) / cnt;
      double ss = 0.0;
      for (double v : obs[i]) ss += (v - mean) * (v - mean);
      dt.rep.means[i] = mean;
      dt.rep.noise[i] = ss / (cnt - 1.0) / cnt;
    }

    // Inputs mapped onto [0, 1].
    dt.x = Matrix(k, 1);
    for (std::size_t i = 0; i < k; ++i) dt.x(i, 0) = (kMm1Design[i] - lo) / span_x;
    const designs::ScaledOutputs scaled = designs::scale_outputs(dt.rep.means);
    dt.ys = scaled.values;
    const double r2 = scaled.record.y_range * scaled.record.y_range;
    dt.noise_scaled.resize(k);
    for (std::size_t i = 0; i < k; ++i) dt.noise_scaled[i] = dt.rep.noise[i] / r2;
    dt.grid = Matrix(config.grid_points, 1);
    dt.truth.resize(config.grid_points);
    for (std::size_t g = 0; g < config.grid_points; ++g) {
      const double u = static_cast<double>(g) / static_cast<double>(config.grid_points - 1);
      dt.grid(g, 0) = u;
      dt.truth[g] = scaled.record.apply(testbed::mm1_analytic(lo + u * span_x).first);
    }
    const testbed::LinearModel lm = testbed::lm_fit(dt.x, dt.ys);
    dt.emrmse_lm = emrmse(testbed::lm_predict(lm, dt.grid), dt.truth);
  });

  const std::size_t np = config.profiles.size();
  std::vector<BenchResult> rows(config.macroreps * np);
  parallel_for(rows.size(), config.jobs, [&](std::size_t cell) {
    const std::size_t r = cell / np;
    const FitProfile& profile = config.profiles[cell % np];
    const Data& dt = data[r];
    FitProfile concrete = profile;
    concrete.nugget.per_point_noise = dt.noise_scaled;

    BenchResult row;
    row.function = "mm1";
    row.d = 1;
    row.n = config.n2;
    row.profile = profile.label;
    row.macrorep = r;
    row.seed = dt.seed;
    row.emrmse_lm = dt.emrmse_lm;
    rows[cell] = score_profile(std::move(row), concrete, config_for(concrete, mix_seed(dt.seed, fnv1a(profile.label))),
                               dt.x, dt.ys, dt.grid, dt.truth, dt.emrmse_lm);
  });
  sort_rows(rows);

  SkOutput out;
  out.rows = std::move(rows);
  for (auto& dt : data) out.macroreps.push_back(std::move(dt.rep));
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_results_csv(std::ostream& os, const std::vector<BenchResult>& rows, bool timing) {
  os << kResultsHeader << '\n';
  for (const auto& r : rows) {
    os << r.function << ',' << r.d << ',' << r.n << ',' << r.profile << ',' << r.macrorep << ',' << r.seed << ','
       << format_double(r.emrmse_gp) << ',' << format_double(r.emrmse_lm) << ',' << format_double(r.pmrmse_gp) << ','
       << format_double(r.xi) << ',' << format_double(r.pi) << ',';
    if (timing) os << format_double(r.fit_seconds) << ',' << format_double(r.predict_seconds);
    else os << ',';
    os << ',' << r.warnings << '\n';
  }
}

namespace {

double parse_double_cell(const std::string& s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s.empty()) return 0.0;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError, "results CSV: bad number '" + s + "'");
  return v;
}

std::uint64_t parse_uint_cell(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError, "results CSV: bad integer '" + s + "'");
  return v;
}

}  // namespace

std::vector<BenchResult> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kResultsHeader)
    throw Error(ErrorKind::ParseError, "results CSV: unexpected header");
  std::vector<BenchResult> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 14)
      throw Error(ErrorKind::ParseError, "results CSV line " + std::to_string(lineno) + ": expected 14 fields");
    BenchResult r;
    r.function = f[0];
    r.d = parse_uint_cell(f[1]);
    r.n = parse_uint_cell(f[2]);
    r.profile = f[3];
    r.macrorep = parse_uint_cell(f[4]);
    r.seed = parse_uint_cell(f[5]);
    r.emrmse_gp = parse_double_cell(f[6]);
    r.emrmse_lm = parse_double_cell(f[7]);
    r.pmrmse_gp = parse_double_cell(f[8]);
    r.xi = parse_double_cell(f[9]);
    r.pi = parse_double_cell(f[10]);
    r.fit_seconds = parse_double_cell(f[11]);
    r.predict_seconds = parse_double_cell(f[12]);
    r.warnings = parse_uint_cell(f[13]);
    r.failed = std::isnan(r.emrmse_gp);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_plot_data(std::ostream& os, const std::vector<BenchResult>& rows) {
  os << "function,d,n,profile,macrorep,metric,value,style\n";
  for (const auto& r : rows) {
    const std::string key =
        r.function + ',' + std::to_string(r.d) + ',' + std::to_string(r.n) + ',' + r.profile + ',' + std::to_string(r.macrorep);
    os << key << ",xi," << format_double(r.xi) << ",solid\n";
    os << key << ",pi," << format_double(r.pi) << ",gray\n";
  }
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::vector<UnderestimationSummary> summarize(const std::vector<BenchResult>& rows) {
  std::map<std::tuple<std::string, std::size_t, std::string>, std::vector<const BenchResult*>> groups;
  for (const auto& r : rows) groups[{r.function, r.n, r.profile}].push_back(&r);
  std::vector<UnderestimationSummary> out;
  for (const auto& [key, members] : groups) {
    UnderestimationSummary s;
    std::tie(s.function, s.n, s.profile) = key;
    std::vector<double> xs, ps;
    for (const BenchResult* r : members) {
      ++s.rows;
      if (r->pi < r->xi) ++s.pi_below_xi;
      xs.push_back(r->xi);
      ps.push_back(r->pi);
    }
    s.median_xi = median(xs);
    s.median_pi = median(ps);
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<UnderestimationSummary>& summary) {
  os << "function,n,profile,rows,pi_below_xi,fraction_pi_below_xi,median_xi,median_pi\n";
  for (const auto& s : summary) {
    const double frac = s.rows ? static_cast<double>(s.pi_below_xi) / static_cast<double>(s.rows) : kNaN;
    os << s.function << ',' << s.n << ',' << s.profile << ',' << s.rows << ',' << s.pi_below_xi << ','
       << format_double(frac) << ',' << format_double(s.median_xi) << ',' << format_double(s.median_pi) << '\n';
  }
}

}  // namespace krig::bench
