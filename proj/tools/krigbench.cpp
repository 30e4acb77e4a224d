// krigbench: fit, predict, designs, test functions and benchmark runs.
//
// Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "krig/benchmark.hpp"
#include "krig/designs.hpp"
#include "krig/gp_model.hpp"
#include "krig/random.hpp"
#include "krig/simd.hpp"
#include "krig/testbed.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace krig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

// Input problems, reported with exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::DomainError:
    case ErrorKind::ParseError:
    case ErrorKind::NonPositiveParameter:
      return kExitInput;
    default:
      return kExitNumerical;
  }
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& where) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InputError(where + ": '" + text + "' is not a number");
  if (!std::isfinite(v)) throw InputError(where + ": non-finite value");
  return v;
}

struct Table {
  std::vector<std::string> header;
  Matrix rows;
};

// Numeric CSV with a header line. `expected` lists required column names.
Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file (missing header)");
  for (auto& h : split(line)) t.header.push_back(trim(h));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    const std::string where = path + " line " + std::to_string(lineno);
    if (cells.size() != t.header.size())
      throw InputError(where + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    std::vector<double> values;
    for (const auto& c : cells) values.push_back(parse_number(c, where));
    if (t.rows.cols() == 0 && t.rows.rows() == 0) t.rows = Matrix(0, t.header.size());
    t.rows.append_row(values);
  }
  if (t.rows.cols() == 0) t.rows = Matrix(0, t.header.size());
  return t;
}

void check_x_header(const std::vector<std::string>& header, std::size_t d, const std::string& path) {
  for (std::size_t k = 0; k < d; ++k)
    if (header[k] != "x" + std::to_string(k + 1))
      throw InputError(path + ": column " + std::to_string(k + 1) + " should be named x" + std::to_string(k + 1));
}

void ensure_parent(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream open_out(const std::string& path) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

void write_x_header(std::ostream& os, std::size_t d) {
  for (std::size_t k = 0; k < d; ++k) os << (k ? "," : "") << 'x' << k + 1;
}

void write_row(std::ostream& os, std::span<const double> x) {
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? "," : "") << bench::format_double(x[k]);
}

// Every run writes one of these next to its outputs.
struct Manifest {
  json doc;
  explicit Manifest(const std::string& sub) {
    doc["subcommand"] = sub;
    doc["flags"] = json::object();
    doc["seeds"] = json::object();
    doc["outputs"] = json::array();
    doc["simd"] = std::string(simd::to_string(simd::active()));
  }
  void write(const std::string& path) {
    doc["outputs"].push_back(path);
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
  }
};

std::string manifest_path_for(const std::string& out_file) { return out_file + ".manifest.json"; }

KernelSpec parse_kernel(const std::string& text, const std::string& param) {
  KernelSpec k;
  if (text == "gauss") {
    k = KernelSpec::gaussian({});
  } else if (text == "matern52") {
    k = KernelSpec::matern52({});
  } else if (text.rfind("pexp:", 0) == 0) {
    const double p = parse_number(text.substr(5), "--kernel");
    if (!(p >= 1.0 && p <= 2.0)) throw InputError("--kernel: power-exponential exponent must lie in [1, 2]");
    k = KernelSpec::power_exponential(p, {});
  } else {
    throw InputError("--kernel: expected gauss, pexp:P or matern52, got '" + text + "'");
  }
  try {
    k.parameterization = parse_parameterization(param);
  } catch (const Error&) {
    throw InputError("--param: expected theta, log10, inv or lensq, got '" + param + "'");
  }
  return k;
}

NuggetStrategy parse_nugget(const std::string& text) {
  if (text == "estimate") return NuggetStrategy::estimated();
  if (text == "dlb") return NuggetStrategy::stability_lower_bound();
  if (text == "dace") return NuggetStrategy::dace_default();
  if (text.rfind("fixed:", 0) == 0) {
    const double v = parse_number(text.substr(6), "--nugget");
    if (v < 0.0) throw InputError("--nugget: fixed value must be non-negative");
    return NuggetStrategy::fixed(v);
  }
  throw InputError("--nugget: expected fixed:V, estimate, dlb or dace, got '" + text + "'");
}

json vec_json(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data, kernel = "gauss", nugget = "estimate", param = "theta", out;
  std::uint64_t seed = 0;
  std::size_t starts = 5;
};

int cmd_fit(const FitArgs& a) {
  const Table t = read_csv(a.data);
  if (t.header.size() < 2 || t.header.back() != "y")
    throw InputError(a.data + ": header must be x1..xd,y");
  const std::size_t d = t.header.size() - 1;
  check_x_header(t.header, d, a.data);
  const std::size_t n = t.rows.rows();
  if (n < 2) throw InputError(a.data + ": need at least 2 data rows");
  Matrix x(n, d);
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) x(i, k) = t.rows(i, k);
    y[i] = t.rows(i, d);
  }

  const KernelSpec kernel = parse_kernel(a.kernel, a.param);
  FitConfig cfg;
  cfg.nugget = parse_nugget(a.nugget);
  cfg.seed = a.seed;
  cfg.n_starts = a.starts;

  FitResult fr = [&] {
    try {
      return fit(x, y, kernel, cfg);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("fit stage: ") + e.what());
    }
  }();
  save_model(a.out, fr.model);

  const GpModel& m = fr.model;
  json diag;
  diag["deviance"] = fr.diagnostics.deviance;
  diag["theta"] = vec_json(m.theta());
  diag["params"] = vec_json(m.kernel().params);
  diag["parameterization"] = std::string(to_string(m.kernel().parameterization));
  diag["nugget"] = vec_json(m.nugget());
  diag["mu_hat"] = m.scaling().invert(m.mu_hat());
  diag["sigma2_hat"] = m.scaling().invert_variance(m.sigma2_hat());
  diag["mu_hat_scaled"] = m.mu_hat();
  diag["sigma2_hat_scaled"] = m.sigma2_hat();
  diag["iterations"] = fr.diagnostics.iterations;
  diag["evaluations"] = fr.diagnostics.evaluations;
  diag["starts"] = fr.diagnostics.starts;
  diag["best_start"] = fr.diagnostics.best_start;
  diag["termination"] = fr.diagnostics.termination;
  diag["objective_failures"] = fr.diagnostics.objective_failures;
  diag["jitter_escalations"] = fr.diagnostics.jitter_escalations;
  diag["degenerate"] = fr.diagnostics.degenerate;
  const std::string diag_path = a.out + ".diagnostics.json";
  open_out(diag_path) << diag.dump(2) << '\n';

  Manifest man("fit");
  man.doc["flags"] = {{"data", a.data}, {"kernel", a.kernel}, {"nugget", a.nugget}, {"param", a.param},
                      {"seed", a.seed}, {"starts", a.starts}, {"out", a.out}};
  man.doc["seeds"]["fit"] = a.seed;
  man.doc["outputs"].push_back(a.out);
  man.doc["outputs"].push_back(diag_path);
  man.write(manifest_path_for(a.out));

  std::cout << "fitted " << n << " points in " << d << " dimensions; deviance "
            << bench::format_double(fr.diagnostics.deviance) << (fr.diagnostics.degenerate ? " (degenerate)" : "")
            << "\n";
  return kExitOk;
}

struct PredictArgs {
  std::string model, points, out;
};

int cmd_predict(const PredictArgs& a) {
  GpModel m = [&] {
    try {
      return load_model(a.model);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ParseError) throw InputError(e.what());
      throw;
    }
  }();
  const Table t = read_csv(a.points);
  if (t.header.size() != m.dims())
    throw InputError(a.points + ": model has " + std::to_string(m.dims()) + " inputs, file has " +
                     std::to_string(t.header.size()) + " columns");
  check_x_header(t.header, m.dims(), a.points);
  auto out = open_out(a.out);
  write_x_header(out, m.dims());
  out << ",yhat,mse\n";
  for (std::size_t i = 0; i < t.rows.rows(); ++i) {
    const Prediction p = m.predict(t.rows.row(i));
    write_row(out, t.rows.row(i));
    out << ',' << bench::format_double(p.mean) << ',' << bench::format_double(p.mse) << '\n';
  }
  Manifest man("predict");
  man.doc["flags"] = {{"model", a.model}, {"points", a.points}, {"out", a.out}};
  man.doc["outputs"].push_back(a.out);
  man.write(manifest_path_for(a.out));
  return kExitOk;
}

struct DesignArgs {
  std::size_t n = 0, d = 0, iters = designs::kDesignSwaps;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_design(const DesignArgs& a) {
  if (a.n < 1 || a.d < 1) throw InputError("--n and --d must be positive");
  const Matrix x = designs::maximin_lhs(a.n, a.d, a.seed, a.iters);
  auto out = open_out(a.out);
  write_x_header(out, a.d);
  out << '\n';
  for (std::size_t i = 0; i < x.rows(); ++i) {
    write_row(out, x.row(i));
    out << '\n';
  }
  Manifest man("gen-design");
  man.doc["flags"] = {{"n", a.n}, {"d", a.d}, {"iters", a.iters}, {"seed", a.seed}, {"out", a.out}};
  man.doc["seeds"]["design"] = a.seed;
  man.doc["outputs"].push_back(a.out);
  man.write(manifest_path_for(a.out));
  return kExitOk;
}

std::string resolve_function(const std::string& name, bool literal) {
  if (!literal) return name;
  if (name != "otl") throw InputError("--otl-literal applies only to the otl function");
  return "otl-literal";
}

struct EvalArgs {
  std::string function, input, out;
  bool otl_literal = false;
};

int cmd_eval_fn(const EvalArgs& a) {
  const std::string name = resolve_function(a.function, a.otl_literal);
  const testbed::TestFunction& fn = [&]() -> const testbed::TestFunction& {
    try {
      return testbed::find_function(name);
    } catch (const Error& e) {
      throw InputError(e.what());
    }
  }();
  const Table t = read_csv(a.input);
  if (t.header.size() != fn.dims)
    throw InputError(a.input + ": " + fn.name + " takes " + std::to_string(fn.dims) + " inputs");
  check_x_header(t.header, fn.dims, a.input);
  auto out = open_out(a.out);
  write_x_header(out, fn.dims);
  out << ",y\n";
  for (std::size_t i = 0; i < t.rows.rows(); ++i) {
    for (double v : t.rows.row(i))
      if (v < 0.0 || v > 1.0) throw InputError(a.input + " line " + std::to_string(i + 2) + ": input outside [0, 1]");
    write_row(out, t.rows.row(i));
    out << ',' << bench::format_double(fn.evaluate(t.rows.row(i))) << '\n';
  }
  Manifest man("eval-fn");
  man.doc["flags"] = {{"function", a.function}, {"input", a.input}, {"out", a.out}, {"otl_literal", a.otl_literal}};
  man.doc["outputs"].push_back(a.out);
  man.write(manifest_path_for(a.out));
  return kExitOk;
}

void write_bench_outputs(const std::string& dir, const std::vector<bench::BenchResult>& rows, Manifest& man) {
  fs::create_directories(dir);
  const std::string results = (fs::path(dir) / "results.csv").string();
  const std::string plot = (fs::path(dir) / "plot_data.csv").string();
  const std::string summary = (fs::path(dir) / "summary.csv").string();
  {
    auto out = open_out(results);
    bench::write_results_csv(out, rows);
  }
  {
    auto out = open_out(plot);
    bench::write_plot_data(out, rows);
  }
  {
    auto out = open_out(summary);
    bench::write_summary_csv(out, bench::summarize(rows));
  }
  man.doc["outputs"].push_back(results);
  man.doc["outputs"].push_back(plot);
  man.doc["outputs"].push_back(summary);
  json failures = json::array();
  for (const auto& r : rows)
    if (r.failed) failures.push_back({{"profile", r.profile}, {"macrorep", r.macrorep}, {"error", r.failure}});
  man.doc["failures"] = failures;
  man.write((fs::path(dir) / "manifest.json").string());
}

struct BenchArgs {
  std::string function, profiles = "gauss-nugE,pexp195-dlb,matern52-nugE", out;
  std::size_t d = 0, n = 0, m = designs::kPredictionPoints, macroreps = 5, jobs = 1;
  std::uint64_t seed = 0;
  bool otl_literal = false;
};

int cmd_benchmark(const BenchArgs& a) {
  bench::ExperimentConfig cfg;
  cfg.function = resolve_function(a.function, a.otl_literal);
  try {
    cfg.d = testbed::find_function(cfg.function, a.d).dims;
    cfg.profiles = bench::parse_profiles(a.profiles, false);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  if (a.n < 2) throw InputError("--n must be at least 2");
  cfg.n = a.n;
  cfg.m = a.m;
  cfg.macroreps = a.macroreps;
  cfg.base_seed = a.seed;
  cfg.jobs = a.jobs;
  const auto rows = bench::run_experiment(cfg);

  Manifest man("benchmark");
  man.doc["flags"] = {{"function", a.function}, {"d", cfg.d},         {"n", a.n},       {"m", a.m},
                      {"profiles", a.profiles}, {"macroreps", a.macroreps}, {"seed", a.seed}, {"jobs", a.jobs},
                      {"otl_literal", a.otl_literal}, {"out", a.out}};
  for (std::size_t r = 0; r < a.macroreps; ++r) {
    const auto s = bench::macrorep_seeds(a.seed, r);
    json fits = json::object();
    for (const auto& p : cfg.profiles) fits[p.label] = s.fit(p.label);
    man.doc["seeds"][std::to_string(r)] = {
        {"macrorep", s.macrorep}, {"design", s.design}, {"prediction", s.prediction}, {"fit", fits}};
  }
  write_bench_outputs(a.out, rows, man);
  std::cout << rows.size() << " rows written to " << a.out << "\n";
  return kExitOk;
}

struct SkArgs {
  std::string profiles = "sk-joint,sk-fixed", out;
  std::size_t n1 = 5, n2 = 100, macroreps = 5, customers = 10000, grid = 1000, jobs = 1;
  std::uint64_t seed = 0;
};

int cmd_sk_mm1(const SkArgs& a) {
  if (a.n2 < 7) throw InputError("--n2 must be at least 7 (one replicate per design point)");
  if (a.n1 < 2) throw InputError("--n1 must be at least 2");
  bench::SkConfig cfg;
  try {
    cfg.profiles = bench::parse_profiles(a.profiles, true);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  cfg.n1 = a.n1;
  cfg.n2 = a.n2;
  cfg.macroreps = a.macroreps;
  cfg.customers = a.customers;
  cfg.grid_points = a.grid;
  cfg.base_seed = a.seed;
  cfg.jobs = a.jobs;
  const auto result = bench::run_sk_mm1(cfg);

  Manifest man("sk-mm1");
  man.doc["flags"] = {{"n1", a.n1},         {"n2", a.n2},     {"profiles", a.profiles}, {"macroreps", a.macroreps},
                      {"customers", a.customers}, {"grid", a.grid}, {"seed", a.seed},         {"jobs", a.jobs},
                      {"out", a.out}};
  json reps = json::array();
  for (std::size_t r = 0; r < result.macroreps.size(); ++r) {
    const auto& mr = result.macroreps[r];
    reps.push_back({{"seed", mix_seed(a.seed, r)},
                    {"allocation", mr.allocation},
                    {"means", mr.means},
                    {"noise_variance", mr.noise}});
  }
  man.doc["macroreps"] = reps;
  write_bench_outputs(a.out, result.rows, man);
  std::cout << result.rows.size() << " rows written to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process metamodel fitting and benchmarking"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model to x1..xd,y data");
  fit_cmd->add_option("--data", fa.data, "Training CSV (x1..xd,y)")->required();
  fit_cmd->add_option("--kernel", fa.kernel, "gauss | pexp:P | matern52");
  fit_cmd->add_option("--nugget", fa.nugget, "fixed:V | estimate | dlb | dace");
  fit_cmd->add_option("--param", fa.param, "theta | log10 | inv | lensq");
  fit_cmd->add_option("--seed", fa.seed, "Random seed");
  fit_cmd->add_option("--starts", fa.starts, "Optimizer starts")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fa.out, "Model file")->required();

  PredictArgs pa;
  auto* pred_cmd = app.add_subcommand("predict", "Predict at points with a saved model");
  pred_cmd->add_option("--model", pa.model)->required();
  pred_cmd->add_option("--points", pa.points, "CSV with header x1..xd")->required();
  pred_cmd->add_option("--out", pa.out)->required();

  DesignArgs da;
  auto* design_cmd = app.add_subcommand("gen-design", "Maximin Latin hypercube design");
  design_cmd->add_option("--n", da.n)->required();
  design_cmd->add_option("--d", da.d)->required();
  design_cmd->add_option("--seed", da.seed);
  design_cmd->add_option("--iters", da.iters, "Point-exchange swaps");
  design_cmd->add_option("--out", da.out)->required();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval-fn", "Evaluate a test function at unit-cube inputs");
  eval_cmd->add_option("--function", ea.function)->required();
  eval_cmd->add_option("--input", ea.input, "CSV with header x1..xd")->required();
  eval_cmd->add_option("--out", ea.out)->required();
  eval_cmd->add_flag("--otl-literal", ea.otl_literal, "OTL with R_b1 in the first term");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("benchmark", "Macroreplicated accuracy experiment");
  bench_cmd->add_option("--function", ba.function)->required();
  bench_cmd->add_option("--d", ba.d, "Dimension (borehole: 8 or 4)");
  bench_cmd->add_option("--n", ba.n)->required();
  bench_cmd->add_option("--m", ba.m, "Prediction points")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--profiles", ba.profiles, "Comma-separated profile labels");
  bench_cmd->add_option("--macroreps", ba.macroreps)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", ba.seed);
  bench_cmd->add_option("--jobs", ba.jobs)->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--otl-literal", ba.otl_literal);
  bench_cmd->add_option("--out", ba.out, "Output directory")->required();

  SkArgs sa;
  auto* sk_cmd = app.add_subcommand("sk-mm1", "Two-stage stochastic kriging on the M/M/1 queue");
  sk_cmd->add_option("--n1", sa.n1, "Stage-1 replicates per point");
  sk_cmd->add_option("--n2", sa.n2, "Stage-2 replicates in total")->required();
  sk_cmd->add_option("--profiles", sa.profiles);
  sk_cmd->add_option("--macroreps", sa.macroreps)->check(CLI::PositiveNumber);
  sk_cmd->add_option("--customers", sa.customers, "Customers per replicate")->check(CLI::PositiveNumber);
  sk_cmd->add_option("--grid", sa.grid, "Prediction grid size");
  sk_cmd->add_option("--seed", sa.seed);
  sk_cmd->add_option("--jobs", sa.jobs)->check(CLI::PositiveNumber);
  sk_cmd->add_option("--out", sa.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit_cmd) return cmd_fit(fa);
    if (*pred_cmd) return cmd_predict(pa);
    if (*design_cmd) return cmd_gen_design(da);
    if (*eval_cmd) return cmd_eval_fn(ea);
    if (*bench_cmd) return cmd_benchmark(ba);
    if (*sk_cmd) return cmd_sk_mm1(sa);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
