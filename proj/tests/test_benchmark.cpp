#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "krig/benchmark.hpp"
#include "krig/random.hpp"

using namespace krig;
using namespace krig::bench;

namespace {

std::string csv(const std::vector<BenchResult>& rows) {
  std::ostringstream os;
  write_results_csv(os, rows, false);
  return os.str();
}

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.function = "otl";
  cfg.n = 12;
  cfg.m = 60;
  cfg.macroreps = 3;
  cfg.base_seed = 4;
  cfg.design_swaps = 200;
  cfg.prediction_swaps = 50;
  cfg.profiles = parse_profiles("gauss-nugE,gauss-dlb", false);
  return cfg;
}

}  // namespace

TEST_SUITE("benchmark") {
  TEST_CASE("error metrics") {
    CHECK(emrmse(Vector{1, 2, 3}, Vector{1, 2, 3}) == 0.0);
    CHECK(emrmse(Vector{1.5, 2.5}, Vector{1, 2}) == doctest::Approx(0.5));
    CHECK(emrmse(Vector{3, 4}, Vector{0, 0}) == doctest::Approx(std::sqrt(12.5)));
    CHECK_THROWS_AS(emrmse(Vector{1}, Vector{1, 2}), Error);

    CHECK(pmrmse(Vector{0, 0}) == 0.0);
    CHECK(pmrmse(Vector{4, 4, 4}) == doctest::Approx(2.0));
    CHECK(pmrmse(Vector{1, 9}) == doctest::Approx(std::sqrt(5.0)));
    try {
      pmrmse(Vector{1.0, -1e-3});
      FAIL("expected NegativeVariance");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NegativeVariance);
    }

    CHECK(xi_pi(0.5, 0.2, 0.5).first == 1.0);
    CHECK(xi_pi(0.0, 0.2, 0.5).first == 0.0);
    CHECK(xi_pi(0.05, 0.0, 0.5).first == doctest::Approx(0.1));
    try {
      xi_pi(0.1, 0.1, 0.0);
      FAIL("expected ZeroBaseline");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ZeroBaseline);
    }
  }

  TEST_CASE("replicate allocation") {
    const auto equal = allocate_replicates(Vector(7, 2.0), 200);
    CHECK(std::accumulate(equal.begin(), equal.end(), std::size_t{0}) == 200);
    // 200 = 7 * 28 + 4; the remainder goes to the lowest indices.
    CHECK(equal == std::vector<std::size_t>{29, 29, 29, 29, 28, 28, 28});

    Vector extreme(7, 0.0);
    extreme[6] = 3.0;
    CHECK(allocate_replicates(extreme, 200) == std::vector<std::size_t>{1, 1, 1, 1, 1, 1, 194});
    CHECK(allocate_replicates(Vector(7, 0.0), 14) == std::vector<std::size_t>(7, 2));
    CHECK(allocate_replicates(Vector{1, 1, 1, 1, 1, 1, 100}, 7) == std::vector<std::size_t>(7, 1));

    Rng rng(8);
    for (int rep = 0; rep < 200; ++rep) {
      Vector w(7);
      for (double& v : w) v = rng.below(3) == 0 ? 0.0 : rng.uniform() * 10.0;
      const std::size_t total = 7 + rng.below(400);
      const auto a = allocate_replicates(w, total);
      CHECK(std::accumulate(a.begin(), a.end(), std::size_t{0}) == total);
      CHECK(*std::min_element(a.begin(), a.end()) >= 1);
    }
    CHECK_THROWS_AS(allocate_replicates(Vector(7, 1.0), 6), Error);
  }

  TEST_CASE("profiles") {
    CHECK(find_profile("gauss-nugE").nugget.mode == NuggetStrategy::Mode::Estimated);
    CHECK(find_profile("pexp195-dlb").kernel.exponent == 1.95);
    CHECK(find_profile("gauss-dace").nugget.mode == NuggetStrategy::Mode::DaceDefault);
    CHECK(find_profile("sk-joint").stochastic);
    CHECK_THROWS_AS(find_profile("bogus"), Error);
    CHECK_THROWS_AS(parse_profiles("gauss-nugE,gauss-nugE", false), Error);
    CHECK_THROWS_AS(parse_profiles("sk-joint", false), Error);
    CHECK_THROWS_AS(parse_profiles("gauss-nugE", true), Error);
    CHECK(parse_profiles("gauss-nug0, matern52-nugE", false).size() == 2);
    CHECK(profile_names(true) == std::vector<std::string>{"sk-joint", "sk-fixed"});
  }

  TEST_CASE("seed derivation") {
    const auto a = macrorep_seeds(11, 0), b = macrorep_seeds(11, 1);
    CHECK(a.macrorep != b.macrorep);
    CHECK(a.design != a.prediction);
    CHECK(macrorep_seeds(11, 1).design == b.design);
    CHECK(a.fit("gauss-nugE") != a.fit("gauss-dlb"));
  }

  TEST_CASE("experiment rows, stored ratios and determinism") {
    ExperimentConfig cfg = small_experiment();
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      CHECK(r.function == "otl");
      CHECK(r.d == 6);
      CHECK(r.n == 12);
      CHECK_FALSE(r.failed);
      CHECK(r.xi == r.emrmse_gp / r.emrmse_lm);
      CHECK(r.pi == r.pmrmse_gp / r.emrmse_lm);
      CHECK(r.emrmse_gp > 0.0);
    }
    // Sorted by profile then macrorep.
    CHECK(rows[0].profile == "gauss-dlb");
    CHECK(rows[2].macrorep == 2);
    CHECK(rows[3].profile == "gauss-nugE");
    // Profiles share the data of a macroreplicate, hence the LM column too.
    CHECK(rows[0].emrmse_lm == rows[3].emrmse_lm);

    const std::string first = csv(rows);
    CHECK(first == csv(run_experiment(cfg)));
    cfg.jobs = 4;
    CHECK(first == csv(run_experiment(cfg)));
    cfg.base_seed = 5;
    CHECK(first != csv(run_experiment(cfg)));
  }

  TEST_CASE("single macroreplicate, single profile") {
    ExperimentConfig cfg = small_experiment();
    cfg.macroreps = 1;
    cfg.profiles = parse_profiles("matern52-nugE", false);
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].seed == macrorep_seeds(cfg.base_seed, 0).macrorep);
    CHECK(std::isfinite(rows[0].xi));
    CHECK(std::isfinite(rows[0].pi));
    CHECK(rows[0].fit_seconds >= 0.0);
  }

  TEST_CASE("bad experiment configurations") {
    ExperimentConfig cfg = small_experiment();
    cfg.function = "nope";
    CHECK_THROWS_AS(run_experiment(cfg), Error);
    cfg = small_experiment();
    cfg.profiles.clear();
    CHECK_THROWS_AS(run_experiment(cfg), Error);
  }

  TEST_CASE("CSV round trip") {
    std::vector<BenchResult> rows(2);
    rows[0] = {"borehole", 8, 80, "gauss-nugE", 0, 123456789012345ull, 0.1, 0.3, 0.05, 0.1 / 0.3, 0.05 / 0.3,
               1.25, 0.5, 0, false, ""};
    rows[1] = rows[0];
    rows[1].macrorep = 1;
    rows[1].emrmse_gp = std::numeric_limits<double>::quiet_NaN();
    rows[1].xi = rows[1].pi = rows[1].emrmse_gp;
    rows[1].warnings = 1;
    std::stringstream ss;
    write_results_csv(ss, rows);
    CHECK(ss.str().rfind(std::string(kResultsHeader) + "\n", 0) == 0);
    const auto back = read_results_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].seed == rows[0].seed);
    CHECK(back[0].xi == rows[0].xi);
    CHECK(back[0].pi == rows[0].pi);
    CHECK(back[0].fit_seconds == 1.25);
    CHECK(std::isnan(back[1].xi));
    CHECK(back[1].warnings == 1);

    std::istringstream bad(std::string(kResultsHeader) + "\nborehole,8\n");
    CHECK_THROWS_AS(read_results_csv(bad), Error);
  }

  TEST_CASE("format_double is shortest round trip") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) {
      const std::string s = format_double(v);
      CHECK(std::stod(s) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  }

  TEST_CASE("summary and plot data") {
    std::vector<BenchResult> rows;
    for (std::size_t r = 0; r < 5; ++r) {
      BenchResult b{"borehole", 8, 80, "gauss-nugE", r, 0, 0, 0, 0, 0.1 * (r + 1), 0.05 * (r + 1), 0, 0, 0, false, ""};
      if (r == 4) b.pi = 1.0;
      rows.push_back(b);
    }
    const auto s = summarize(rows);
    REQUIRE(s.size() == 1);
    CHECK(s[0].rows == 5);
    CHECK(s[0].pi_below_xi == 4);
    CHECK(s[0].median_xi == doctest::Approx(0.3));
    CHECK(median({3.0, std::numeric_limits<double>::quiet_NaN(), 1.0}) == 2.0);

    std::ostringstream plot;
    write_plot_data(plot, rows);
    const std::string text = plot.str();
    CHECK(text.rfind("function,d,n,profile,macrorep,metric,value,style\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 11);
    CHECK(text.find(",xi,") != std::string::npos);
    CHECK(text.find(",pi,") != std::string::npos);
  }

  TEST_CASE("stochastic kriging experiment") {
    SkConfig cfg;
    cfg.n2 = 70;
    cfg.macroreps = 2;
    cfg.customers = 2000;
    cfg.grid_points = 50;
    cfg.profiles = parse_profiles("sk-joint,sk-fixed", true);
    const SkOutput out = run_sk_mm1(cfg);
    REQUIRE(out.rows.size() == 4);
    REQUIRE(out.macroreps.size() == 2);
    for (const auto& m : out.macroreps) {
      CHECK(std::accumulate(m.allocation.begin(), m.allocation.end(), std::size_t{0}) == 70);
      CHECK(*std::min_element(m.allocation.begin(), m.allocation.end()) >= 1);
      for (double v : m.noise) CHECK(v > 0.0);
    }
    for (const auto& r : out.rows) {
      CHECK(r.function == "mm1");
      CHECK_FALSE(r.failed);
      CHECK(r.xi == r.emrmse_gp / r.emrmse_lm);
    }
    cfg.jobs = 3;
    CHECK(csv(out.rows) == csv(run_sk_mm1(cfg).rows));

    cfg.n2 = 6;
    CHECK_THROWS_AS(run_sk_mm1(cfg), Error);
  }
}
