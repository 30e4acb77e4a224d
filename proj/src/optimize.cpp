#include "krig/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "krig/simd.hpp"

namespace krig::optimize {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Pair {
  Vector s;
  Vector y;
  double rho;
};

double dot(std::span<const double> a, std::span<const double> b) { return simd::dot(a, b); }

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Two-loop recursion: returns -H q.
Vector lbfgs_direction(const std::deque<Pair>& memory, const Vector& q_in) {
  Vector q = q_in;
  std::vector<double> a(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    a[i] = memory[i].rho * dot(memory[i].s, q);
    simd::axpy(-a[i], memory[i].y, q);
  }
  if (!memory.empty()) {
    const Pair& last = memory.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double b = memory[i].rho * dot(memory[i].y, q);
    simd::axpy(a[i] - b, memory[i].s, q);
  }
  for (double& v : q) v = -v;
  return q;
}

struct Trial {
  double alpha = 0.0;
  double f = kInf;
  double slope = 0.0;
  Vector x;
  Vector g;
};

class LineSearch {
 public:
  LineSearch(const Objective& obj, const Bounds& bounds, const Vector& x0, const Vector& dir,
             double f0, double slope0, double alpha_max, const Options& opt, std::size_t& evals)
      : obj_(obj), bounds_(bounds), x0_(x0), dir_(dir), f0_(f0), slope0_(slope0),
        alpha_max_(alpha_max), opt_(opt), evals_(evals) {}

  bool run(double alpha, Trial& out) {
    Trial prev{0.0, f0_, slope0_, x0_, {}};
    alpha = std::min(alpha, alpha_max_);
    for (std::size_t i = 0; i < opt_.max_line_search; ++i) {
      Trial cur = evaluate(alpha);
      if (!std::isfinite(cur.f)) {
        // Undefined region: pull back towards the last good point.
        alpha = prev.alpha + 0.5 * (alpha - prev.alpha);
        if (alpha - prev.alpha <= 1e-16 * std::max(1.0, alpha)) break;
        continue;
      }
      if (cur.f > f0_ + opt_.wolfe_c1 * cur.alpha * slope0_ || (i > 0 && cur.f >= prev.f))
        return zoom(prev, cur, out);
      if (std::abs(cur.slope) <= -opt_.wolfe_c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      if (cur.alpha >= alpha_max_) {
        // Armijo holds at the bound; accept the truncated step.
        out = std::move(cur);
        return true;
      }
      prev = std::move(cur);
      alpha = std::min(2.0 * prev.alpha, alpha_max_);
    }
    return best_armijo(out);
  }

 private:
  Trial evaluate(double alpha) {
    Trial t;
    t.alpha = alpha;
    t.x.resize(x0_.size());
    t.g.assign(x0_.size(), 0.0);
    for (std::size_t i = 0; i < x0_.size(); ++i)
      t.x[i] = std::clamp(x0_[i] + alpha * dir_[i], bounds_.lower[i], bounds_.upper[i]);
    if (alpha >= alpha_max_) snap_to_bound(t.x);
    t.f = obj_(t.x, t.g);
    ++evals_;
    if (!std::isfinite(t.f)) {
      t.f = kInf;
      return t;
    }
    t.slope = dot(t.g, dir_);
    if (t.f <= f0_ + opt_.wolfe_c1 * alpha * slope0_ && t.f < best_.f) best_ = t;
    return t;
  }

  // The step that reaches alpha_max lands exactly on the blocking bound.
  void snap_to_bound(Vector& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (dir_[i] > 0.0 && (bounds_.upper[i] - x0_[i]) / dir_[i] <= alpha_max_) x[i] = bounds_.upper[i];
      if (dir_[i] < 0.0 && (bounds_.lower[i] - x0_[i]) / dir_[i] <= alpha_max_) x[i] = bounds_.lower[i];
    }
  }

  bool zoom(Trial lo, Trial hi, Trial& out) {
    for (std::size_t i = 0; i < opt_.max_line_search; ++i) {
      double alpha = cubic_min(lo, hi);
      const double left = std::min(lo.alpha, hi.alpha);
      const double right = std::max(lo.alpha, hi.alpha);
      const double width = right - left;
      if (!(alpha > left + 0.1 * width && alpha < right - 0.1 * width)) alpha = 0.5 * (lo.alpha + hi.alpha);
      if (width <= 1e-16 * std::max(1.0, right)) break;
      Trial cur = evaluate(alpha);
      if (!std::isfinite(cur.f) || cur.f > f0_ + opt_.wolfe_c1 * alpha * slope0_ || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.slope) <= -opt_.wolfe_c2 * slope0_) {
          out = std::move(cur);
          return true;
        }
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    return best_armijo(out);
  }

  static double cubic_min(const Trial& a, const Trial& b) {
    if (!std::isfinite(a.f) || !std::isfinite(b.f)) return 0.5 * (a.alpha + b.alpha);
    const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (disc < 0.0) return 0.5 * (a.alpha + b.alpha);
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom == 0.0) return 0.5 * (a.alpha + b.alpha);
    return b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
  }

  bool best_armijo(Trial& out) {
    if (!std::isfinite(best_.f)) return false;
    out = best_;
    return true;
  }

  const Objective& obj_;
  const Bounds& bounds_;
  const Vector& x0_;
  const Vector& dir_;
  double f0_;
  double slope0_;
  double alpha_max_;
  const Options& opt_;
  std::size_t& evals_;
  Trial best_;
};

}  // namespace

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::GradientTolerance: return "gradient_tolerance";
    case Termination::StepTolerance: return "step_tolerance";
    case Termination::FunctionTolerance: return "function_tolerance";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

bool Bounds::contains(std::span<const double> x) const noexcept {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

void Bounds::validate() const {
  if (lower.size() != upper.size()) throw Error(ErrorKind::DimensionMismatch, "bounds: lower/upper sizes differ");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i])) throw Error(ErrorKind::InvalidArgument, "bounds: lower must be < upper");
}

double projected_gradient_norm(std::span<const double> x, std::span<const double> g, const Bounds& bounds) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = std::clamp(x[i] - g[i], bounds.lower[i], bounds.upper[i]) - x[i];
    m = std::max(m, std::abs(p));
  }
  return m;
}

Result minimize(const Objective& objective, std::span<const double> start, const Bounds& bounds,
                const Options& options) {
  bounds.validate();
  const std::size_t n = bounds.size();
  if (start.size() != n) throw Error(ErrorKind::DimensionMismatch, "minimize: start length differs from bounds");

  Result res;
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(start[i], bounds.lower[i], bounds.upper[i]);
  Vector g(n, 0.0);
  double f = objective(x, g);
  res.evaluations = 1;
  if (!std::isfinite(f)) throw Error(ErrorKind::ObjectiveNonFinite, "objective is not finite at the start point");
  res.start_value = f;

  std::deque<Pair> memory;
  auto finish = [&](Termination reason) {
    res.x = x;
    res.value = f;
    res.projected_grad_norm = projected_gradient_norm(x, g, bounds);
    res.reason = reason;
    return res;
  };

  for (res.iterations = 0; res.iterations < options.max_iters; ++res.iterations) {
    if (projected_gradient_norm(x, g, bounds) < options.grad_tol) return finish(Termination::GradientTolerance);

    // Variables pinned at a bound by their gradient stay put this iteration.
    std::vector<bool> fixed(n, false);
    for (std::size_t i = 0; i < n; ++i)
      fixed[i] = (x[i] <= bounds.lower[i] && g[i] > 0.0) || (x[i] >= bounds.upper[i] && g[i] < 0.0);

    auto restrict = [&](Vector& v) {
      for (std::size_t i = 0; i < n; ++i) {
        if (fixed[i]) v[i] = 0.0;
        if (x[i] <= bounds.lower[i] && v[i] < 0.0) v[i] = 0.0;
        if (x[i] >= bounds.upper[i] && v[i] > 0.0) v[i] = 0.0;
      }
    };

    Vector q = g;
    for (std::size_t i = 0; i < n; ++i)
      if (fixed[i]) q[i] = 0.0;
    Vector dir = lbfgs_direction(memory, q);
    restrict(dir);
    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = q;
      for (double& v : dir) v = -v;
      restrict(dir);
      slope = dot(g, dir);
      if (!(slope < 0.0)) return finish(Termination::GradientTolerance);
    }

    double alpha_max = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (dir[i] > 0.0) alpha_max = std::min(alpha_max, (bounds.upper[i] - x[i]) / dir[i]);
      if (dir[i] < 0.0) alpha_max = std::min(alpha_max, (bounds.lower[i] - x[i]) / dir[i]);
    }
    // Without curvature information the first step length is set by the
    // gradient scale.
    const double alpha0 = memory.empty() ? std::min(1.0, 1.0 / std::max(inf_norm(dir), 1e-300)) : 1.0;

    LineSearch search(objective, bounds, x, dir, f, slope, alpha_max, options, res.evaluations);
    Trial step;
    if (!search.run(alpha0, step)) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      return finish(Termination::LineSearchFailed);
    }

    Vector s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = step.x[i] - x[i];
      y[i] = step.g[i] - g[i];
    }
    const double step_norm = inf_norm(s);
    const bool truncated = step.alpha >= alpha_max;
    const double f_prev = f;
    x = std::move(step.x);
    g = std::move(step.g);
    f = step.f;

    const double sy = dot(s, y);
    if (sy > 1e-10 * dot(y, y)) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (memory.size() > options.memory) memory.pop_front();
    }

    if (step_norm < options.step_tol) {
      ++res.iterations;
      return finish(Termination::StepTolerance);
    }
    if (!truncated && f_prev - f <= options.rel_f_tol * std::max({std::abs(f_prev), std::abs(f), 1.0})) {
      ++res.iterations;
      if (projected_gradient_norm(x, g, bounds) < options.grad_tol) return finish(Termination::GradientTolerance);
      return finish(Termination::FunctionTolerance);
    }
  }
  return finish(Termination::MaxIterations);
}

}  // namespace krig::optimize
