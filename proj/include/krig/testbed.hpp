#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "krig/matrix.hpp"

namespace krig::testbed {

struct Range {
  double lo;
  double hi;
  double at(double u) const noexcept { return lo + u * (hi - lo); }
};

/// Analytic surface on the unit cube; the evaluator rescales to physical units.
struct TestFunction {
  std::string name;
  std::size_t dims = 0;
  std::vector<Range> ranges;  // physical ranges, one per input
  std::function<double(std::span<const double>)> evaluate;
};

// Physical ranges of the borehole inputs, in argument order
// r_w, r, T_u, H_u, T_l, H_l, L, K_w.
inline constexpr Range kBoreholeRanges[8] = {
    {0.05, 0.15}, {100.0, 50000.0}, {63070.0, 115600.0}, {990.0, 1110.0},
    {63.1, 116.0}, {700.0, 820.0},  {1120.0, 1680.0},    {9855.0, 12045.0}};

/// Water flow through a borehole, 8 inputs in [0,1].
double borehole(std::span<const double> x);

/// Borehole restricted to (r_w, T_u, T_l, L); the other inputs sit at 0.5.
double borehole_4d(std::span<const double> x);

// R_b1, R_b2, R_f, R_c1, R_c2, beta.
inline constexpr Range kOtlRanges[6] = {{50.0, 150.0}, {25.0, 70.0}, {0.5, 3.0},
                                        {1.2, 2.5},    {0.25, 1.2},  {50.0, 300.0}};

/// Midpoint voltage of the OTL push-pull circuit, 6 inputs in [0,1].
/// `literal` evaluates the first term with R_b1 in place of V_b1.
double otl_circuit(std::span<const double> x, bool literal = false);
double otl_vb1(double rb1, double rb2) noexcept;

/// Dette-Pepelyshev curved 8-D function on its native [0,1]^8.
double dette_pepelyshev(std::span<const double> x);

/// 20-D Morris screening function.
double morris(std::span<const double> x);
double morris_w(std::size_t i, double x) noexcept;          // i is 1-based
double morris_beta1(std::size_t i) noexcept;                 // 1-based
double morris_beta2(std::size_t i, std::size_t j) noexcept;  // 1-based, i < j
double morris_beta3(std::size_t i, std::size_t j, std::size_t l) noexcept;

/// Registry: borehole (d=8), borehole4 (d=4), otl, detpep, morris, otl-literal.
const std::vector<TestFunction>& functions();
/// Looks up by name and dimension; "borehole" with d=4 resolves to borehole4.
/// d = 0 accepts the function's native dimension. Throws Error{InvalidArgument}.
const TestFunction& find_function(const std::string& name, std::size_t d = 0);
std::vector<std::string> function_names();

// M/M/1 queue, service rate 1.

struct Mm1Config {
  double arrival_rate = 0.5;         // in [0, 1)
  std::size_t customers = 10000;     // arrivals simulated per replicate
  double warmup_fraction = 0.1;      // leading share of the time horizon discarded
  std::uint64_t seed = 0;
};

/// Stationary mean and variance of the number of customers in the system.
std::pair<double, double> mm1_analytic(double x);

/// Time-average number of customers in the system over the post-warmup
/// horizon. The horizon ends at the last arrival.
double mm1_simulate(const Mm1Config& cfg);

// Linear model baseline.

struct LinearModel {
  double intercept = 0.0;
  Vector slopes;
  bool rank_deficient = false;

  double predict(std::span<const double> x) const;
};

/// Ordinary least squares with intercept. Rank-deficient designs get the
/// minimum-norm solution and the flag set.
LinearModel lm_fit(const Matrix& x, std::span<const double> y);
Vector lm_predict(const LinearModel& lm, const Matrix& x);

}  // namespace krig::testbed
