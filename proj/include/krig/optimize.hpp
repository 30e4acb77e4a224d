#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>

#include "krig/matrix.hpp"

namespace krig::optimize {

struct Bounds {
  Vector lower;
  Vector upper;

  std::size_t size() const noexcept { return lower.size(); }
  bool contains(std::span<const double> x) const noexcept;
  void validate() const;
};

/// Objective returning f(x) and writing the gradient into `grad`. May return
/// +infinity for points where the objective is undefined.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

enum class Termination {
  GradientTolerance,
  StepTolerance,
  FunctionTolerance,
  MaxIterations,
  LineSearchFailed,
};

std::string_view to_string(Termination t) noexcept;

struct Options {
  std::size_t max_iters = 200;
  double grad_tol = 1e-6;         // on the infinity norm of the projected gradient
  double step_tol = 1e-10;        // on the infinity norm of the accepted step
  double rel_f_tol = 1e7 * 2.220446049250313e-16;  // relative decrease per iteration
  std::size_t memory = 10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  std::size_t max_line_search = 30;
};

struct Result {
  Vector x;
  double value = 0.0;
  double start_value = 0.0;
  double projected_grad_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  Termination reason = Termination::MaxIterations;
};

/// Limited-memory BFGS restricted to the free variables of a box, with a
/// strong-Wolfe line search truncated at the first bound hit. Variables held
/// at a bound by the sign of their gradient are fixed for the iteration.
/// Throws Error{ObjectiveNonFinite} if the objective is not finite at the
/// (clamped) start.
Result minimize(const Objective& objective, std::span<const double> start, const Bounds& bounds,
                const Options& options = {});

/// Infinity norm of P(x - g) - x.
double projected_gradient_norm(std::span<const double> x, std::span<const double> g, const Bounds& bounds);

}  // namespace krig::optimize
