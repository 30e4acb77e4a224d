#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "krig/gp_model.hpp"
#include "krig/kernels.hpp"
#include "krig/ml_estimation.hpp"
#include "krig/nugget.hpp"

namespace krig::bench {

/// A named fitting configuration. Stochastic-kriging profiles carry a
/// placeholder noise vector; the SK driver fills in the replicate variances.
struct FitProfile {
  std::string label;
  KernelSpec kernel;  // family, exponent and reporting parameterization; params unused
  NuggetStrategy nugget;
  std::size_t n_starts = 5;
  std::size_t max_iters = 200;
  bool stochastic = false;
};

/// gauss-nugE, gauss-nug0, gauss-nug6, gauss-dace, gauss-dlb, pexp195-dlb,
/// matern52-nugE (deterministic) and sk-joint, sk-fixed (stochastic kriging).
const std::vector<FitProfile>& builtin_profiles();
std::vector<std::string> profile_names(bool stochastic);
/// Throws Error{InvalidArgument} listing the valid labels.
const FitProfile& find_profile(const std::string& label);
/// Comma-separated list; duplicates rejected.
std::vector<FitProfile> parse_profiles(const std::string& list, bool stochastic);

struct BenchResult {
  std::string function;
  std::size_t d = 0;
  std::size_t n = 0;
  std::string profile;
  std::size_t macrorep = 0;
  std::uint64_t seed = 0;
  double emrmse_gp = 0.0;
  double emrmse_lm = 0.0;
  double pmrmse_gp = 0.0;
  double xi = 0.0;
  double pi = 0.0;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
  std::size_t warnings = 0;
  bool failed = false;
  std::string failure;  // message when failed
};

double emrmse(std::span<const double> predictions, std::span<const double> truths);
/// Throws Error{NegativeVariance} on a negative entry.
double pmrmse(std::span<const double> mse);
/// (emrmse_gp / emrmse_lm, pmrmse_gp / emrmse_lm). Throws Error{ZeroBaseline}.
std::pair<double, double> xi_pi(double emrmse_gp, double pmrmse_gp, double emrmse_lm);

struct ExperimentConfig {
  std::string function;
  std::size_t d = 0;  // 0 -> native dimension
  std::size_t n = 0;
  std::size_t m = designs::kPredictionPoints;
  std::vector<FitProfile> profiles;
  std::size_t macroreps = 5;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 1;
  std::size_t design_swaps = designs::kDesignSwaps;
  std::size_t prediction_swaps = designs::kPredictionSwaps;
};

/// Seeds of one macroreplicate. All are derived from the base seed, so a
/// macroreplicate can be rerun in isolation.
struct MacrorepSeeds {
  std::uint64_t macrorep;
  std::uint64_t design;
  std::uint64_t prediction;
  std::uint64_t fit(const std::string& profile_label) const noexcept;
};
MacrorepSeeds macrorep_seeds(std::uint64_t base_seed, std::size_t macrorep) noexcept;

/// Fresh design and prediction sets per macroreplicate, shared by every
/// profile; outputs scaled to mean 0 / range 1 from the design responses;
/// metrics on the scaled data. Rows are sorted by (function, n, profile,
/// macrorep) whatever the job count. A failing profile yields a row with NaN
/// metrics and `failed` set.
std::vector<BenchResult> run_experiment(const ExperimentConfig& config);

// Stochastic kriging on the M/M/1 queue.

inline constexpr double kMm1Design[7] = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

struct SkConfig {
  std::size_t n1 = 5;
  std::size_t n2 = 100;
  std::vector<FitProfile> profiles;
  std::size_t macroreps = 5;
  std::uint64_t base_seed = 0;
  std::size_t customers = 10000;
  std::size_t grid_points = 1000;
  std::size_t jobs = 1;
};

/// Replicate counts proportional to `weights` summing to `total`, each at
/// least 1: points whose share falls below 1 are pinned to 1 and the rest is
/// re-split; fractional parts go by largest remainder, ties to the lower
/// index. All-zero weights split equally.
std::vector<std::size_t> allocate_replicates(std::span<const double> weights, std::size_t total);

struct SkMacrorep {
  std::vector<std::size_t> allocation;  // stage-2 replicates per design point
  Vector means;                         // averaged response per point
  Vector noise;                         // variance of each average
};

struct SkOutput {
  std::vector<BenchResult> rows;
  std::vector<SkMacrorep> macroreps;
};

/// Two-stage experiment: n1 replicates at each of the seven points, then n2
/// more allotted by the square root of the stage-1 variances. Truth is the
/// analytic mean on an even grid over [0.3, 0.9].
SkOutput run_sk_mm1(const SkConfig& config);

// Output.

inline constexpr const char* kResultsHeader =
    "function,d,n,profile,macrorep,seed,emrmse_gp,emrmse_lm,pmrmse_gp,xi,pi,fit_seconds,predict_seconds,warnings";

/// Shortest round-trip text for a double; "nan"/"inf" for non-finite values.
std::string format_double(double v);

/// `timing = false` writes empty timing cells, for byte comparisons.
void write_results_csv(std::ostream& os, const std::vector<BenchResult>& rows, bool timing = true);
std::vector<BenchResult> read_results_csv(std::istream& is);

/// Long format, one row per (row, metric): function,d,n,profile,macrorep,metric,value,style
/// with metric xi drawn solid and pi gray.
void write_plot_data(std::ostream& os, const std::vector<BenchResult>& rows);

struct UnderestimationSummary {
  std::string function;
  std::size_t n = 0;
  std::string profile;
  std::size_t rows = 0;
  std::size_t pi_below_xi = 0;
  double median_xi = 0.0;
  double median_pi = 0.0;
};
/// Per (function, n, profile): how many macroreplicates have pi < xi.
std::vector<UnderestimationSummary> summarize(const std::vector<BenchResult>& rows);
void write_summary_csv(std::ostream& os, const std::vector<UnderestimationSummary>& summary);

double median(std::vector<double> v);

}  // namespace krig::bench
