#include "krig/ml_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "krig/designs.hpp"
#include "krig/linalg.hpp"
#include "krig/random.hpp"

namespace krig {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn10 = 2.302585092994045684;

double dtheta_dsearch(SearchTransform t, double theta) noexcept {
  switch (t) {
    case SearchTransform::Log10Theta: return theta * kLn10;
    case SearchTransform::LogTheta: return theta;
    case SearchTransform::Raw: return 1.0;
  }
  return 1.0;
}

double sample_variance(const Vector& y) {
  if (y.size() < 2) return 0.0;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double s = 0.0;
  for (double v : y) s += (v - mean) * (v - mean);
  return s / static_cast<double>(y.size() - 1);
}

double sq_dist(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

std::string_view to_string(SearchTransform t) noexcept {
  switch (t) {
    case SearchTransform::Log10Theta: return "log10";
    case SearchTransform::LogTheta: return "log";
    case SearchTransform::Raw: return "raw";
  }
  return "unknown";
}

double search_to_theta(SearchTransform t, double s) noexcept {
  switch (t) {
    case SearchTransform::Log10Theta: return std::pow(10.0, s);
    case SearchTransform::LogTheta: return std::exp(s);
    case SearchTransform::Raw: return s;
  }
  return s;
}

double theta_to_search(SearchTransform t, double theta) noexcept {
  switch (t) {
    case SearchTransform::Log10Theta: return std::log10(theta);
    case SearchTransform::LogTheta: return std::log(theta);
    case SearchTransform::Raw: return theta;
  }
  return theta;
}

void FitConfig::validate(std::size_t d) const {
  if (n_starts == 0) throw Error(ErrorKind::InvalidArgument, "n_starts must be >= 1");
  if (clusters() == 0) throw Error(ErrorKind::InvalidArgument, "n_clusters must be >= 1");
  if (clusters() > lhs_candidates(d))
    throw Error(ErrorKind::InvalidArgument, "n_clusters must not exceed the number of LHS candidates");
  if (max_iters == 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 1");
  if (bounds) {
    bounds->validate();
    if (bounds->size() != d) throw Error(ErrorKind::DimensionMismatch, "bounds must have one pair per input dimension");
  }
}

optimize::Bounds default_bounds(const Matrix& x, KernelFamily /*family*/, SearchTransform transform) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorKind::InvalidArgument, "default_bounds: empty design");
  const std::size_t d = x.cols();
  return {Vector(d, theta_to_search(transform, kThetaLower)), Vector(d, theta_to_search(transform, kThetaUpper))};
}

optimize::Bounds search_bounds(const Matrix& x, KernelFamily family, const FitConfig& config) {
  optimize::Bounds b = config.bounds ? *config.bounds : default_bounds(x, family, config.search_transform);
  if (config.nugget.searched()) {
    if (config.nugget.stochastic()) {
      b.lower.push_back(kLogNoiseScaleLower);
      b.upper.push_back(kLogNoiseScaleUpper);
    } else {
      b.lower.push_back(kLogNuggetLower);
      b.upper.push_back(kLogNuggetUpper);
    }
  }
  return b;
}

DevianceObjective::DevianceObjective(const Matrix& x, const Vector& y, KernelFamily family, double exponent,
                                     SearchTransform transform, NuggetStrategy nugget)
    : x_(x), y_(y), family_(family), exponent_(exponent), transform_(transform), nugget_(std::move(nugget)),
      d_(x.cols()) {
  if (x.rows() != y.size()) throw Error(ErrorKind::DimensionMismatch, "deviance: X rows differ from y length");
  if (x.rows() == 0 || d_ == 0) throw Error(ErrorKind::InvalidArgument, "deviance: empty data");
  nugget_.validate(x.rows());
  const double yy = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
  residual_floor_ = std::numeric_limits<double>::epsilon() * yy;
  if (!(residual_floor_ > 0.0)) residual_floor_ = std::numeric_limits<double>::min();
  noise_divisor_ = sample_variance(y);
  if (!(noise_divisor_ > 0.0)) noise_divisor_ = 1.0;
}

Vector DevianceObjective::theta(std::span<const double> s) const {
  Vector t(d_);
  for (std::size_t k = 0; k < d_; ++k) t[k] = search_to_theta(transform_, s[k]);
  return t;
}

Vector DevianceObjective::nugget_at(std::span<const double> s, const Matrix& r) const {
  const double searched = nugget_.searched() ? std::exp(s[d_]) : 0.0;
  return realize_nugget(nugget_, r, searched, noise_divisor_);
}

double DevianceObjective::value(std::span<const double> s) const { return evaluate(s, {}, false); }

double DevianceObjective::value_and_gradient(std::span<const double> s, std::span<double> grad) const {
  return evaluate(s, grad, true);
}

optimize::Objective DevianceObjective::as_objective() const {
  return [this](std::span<const double> s, std::span<double> g) { return value_and_gradient(s, g); };
}

double DevianceObjective::evaluate(std::span<const double> s, std::span<double> grad, bool want_grad) const {
  if (s.size() != search_dims()) throw Error(ErrorKind::DimensionMismatch, "deviance: search vector has wrong length");
  const std::size_t n = x_.rows();

  Vector th = theta(s);
  for (double t : th)
    if (!(t > 0.0) || !std::isfinite(t)) {
      ++failures_;
      return kInf;
    }
  const Correlation corr(family_, exponent_, th);
  const Matrix r = correlation_matrix(corr, x_);
  const Vector nug = nugget_at(s, r);

  JitteredFactor jf;
  try {
    jf = factor_with_jitter(r, nug);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::FactorizationFailure) throw;
    ++failures_;
    return kInf;
  }
  escalations_ += jf.escalations;

  const Vector ones(n, 1.0);
  const Vector rinv_one = linalg::solve_spd(jf.factor, ones);
  const Vector rinv_y = linalg::solve_spd(jf.factor, y_);
  const double one_r_one = std::accumulate(rinv_one.begin(), rinv_one.end(), 0.0);
  const double one_r_y = std::accumulate(rinv_y.begin(), rinv_y.end(), 0.0);
  const double mu = one_r_y / one_r_one;

  Vector alpha(n);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = rinv_y[i] - mu * rinv_one[i];
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += (y_[i] - mu) * alpha[i];
  const bool floored = !(quad > residual_floor_);
  if (floored) quad = residual_floor_;

  const double dn = static_cast<double>(n);
  const double dev = jf.factor.logdet + dn * std::log(quad);
  if (!std::isfinite(dev)) {
    ++failures_;
    return kInf;
  }
  if (!want_grad) return dev;

  // d dev / d p = tr(W dR/dp) with W = R^{-1} - (n / quad) alpha alpha^T.
  // mu drops out because it minimizes the quadratic form. The realized
  // nugget is held fixed except along its own searched coordinate.
  Matrix w = linalg::spd_inverse(jf.factor);
  if (!floored) {
    const double c = dn / quad;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w(i, j) -= c * alpha[i] * alpha[j];
  }

  std::fill(grad.begin(), grad.end(), 0.0);
  Vector dr(d_);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      corr.gradient(x_.row(i), x_.row(j), dr);
      const double wij = 2.0 * w(i, j);
      for (std::size_t k = 0; k < d_; ++k) grad[k] += wij * dr[k];
    }
  }
  for (std::size_t k = 0; k < d_; ++k) grad[k] *= dtheta_dsearch(transform_, th[k]);

  if (nugget_.searched()) {
    const double scale = std::exp(s[d_]);
    double g = 0.0;
    if (nugget_.stochastic()) {
      const Vector& v = *nugget_.per_point_noise;
      for (std::size_t i = 0; i < n; ++i) g += w(i, i) * v[i] / noise_divisor_;
    } else {
      for (std::size_t i = 0; i < n; ++i) g += w(i, i);
    }
    grad[d_] = g * scale;
  }
  return dev;
}

double deviance(std::span<const double> s, const Matrix& x, const Vector& y, KernelFamily family, double exponent,
                SearchTransform transform, const NuggetStrategy& nugget) {
  return DevianceObjective(x, y, family, exponent, transform, nugget).value(s);
}

Vector deviance_gradient(std::span<const double> s, const Matrix& x, const Vector& y, KernelFamily family,
                         double exponent, SearchTransform transform, const NuggetStrategy& nugget) {
  DevianceObjective obj(x, y, family, exponent, transform, nugget);
  Vector g(obj.search_dims());
  obj.value_and_gradient(s, g);
  return g;
}

KMeansResult kmeans(const std::vector<Vector>& points, std::size_t k, std::uint64_t seed,
                    std::span<const double> priority, std::size_t max_iters) {
  const std::size_t m = points.size();
  if (k == 0 || m == 0) throw Error(ErrorKind::InvalidArgument, "kmeans: need k >= 1 and at least one point");
  if (priority.size() != m) throw Error(ErrorKind::DimensionMismatch, "kmeans: priority length differs from points");
  k = std::min(k, m);
  const std::size_t dim = points.front().size();

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return priority[a] < priority[b]; });

  KMeansResult res;
  Rng rng(seed);

  // k-means++ seeding, starting from the highest-priority point.
  std::vector<std::size_t> seeds{order.front()};
  std::vector<double> d2(m, kInf);
  while (seeds.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      d2[i] = std::min(d2[i], sq_dist(points[i], points[seeds.back()]));
      total += d2[i];
    }
    std::size_t pick = order.front();
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < m; ++i) {
        u -= d2[i];
        if (u <= 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
        if (d2[i] > 0.0) pick = i;
      }
    } else {
      // All remaining points coincide with existing seeds.
      for (std::size_t idx : order)
        if (std::find(seeds.begin(), seeds.end(), idx) == seeds.end()) {
          pick = idx;
          break;
        }
    }
    seeds.push_back(pick);
  }
  for (std::size_t s : seeds) res.centers.push_back(points[s]);

  res.assignment.assign(m, 0);
  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    bool changed = res.iterations == 0;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t best = 0;
      double bd = kInf;
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = sq_dist(points[i], res.centers[c]);
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      if (res.assignment[i] != best) changed = true;
      res.assignment[i] = best;
    }
    if (!changed) break;

    std::vector<Vector> sums(k, Vector(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < m; ++i) {
      ++counts[res.assignment[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[res.assignment[i]][j] += points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: re-seed at the best point not already serving as a centre.
        ++res.reseeds;
        for (std::size_t idx : order) {
          const bool used = std::any_of(res.centers.begin(), res.centers.end(),
                                        [&](const Vector& ctr) { return ctr == points[idx]; });
          if (!used) {
            res.centers[c] = points[idx];
            break;
          }
        }
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) res.centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }
  return res;
}

StartSet generate_starts(const optimize::Bounds& bounds, const FitConfig& config, const DevianceObjective& objective) {
  const std::size_t d = objective.dims();
  const std::size_t n_cand = config.lhs_candidates(d);
  StartSet out;

  const Matrix unit = designs::random_lhs(n_cand, d, mix_seed(config.seed, 0x73746172ULL));
  const double nugget_start = config.nugget.searched() ? std::log(config.nugget.value) : 0.0;
  Vector s(objective.search_dims());
  for (std::size_t i = 0; i < n_cand; ++i) {
    Vector c(d);
    for (std::size_t k = 0; k < d; ++k) c[k] = bounds.lower[k] + unit(i, k) * (bounds.upper[k] - bounds.lower[k]);
    std::copy(c.begin(), c.end(), s.begin());
    if (config.nugget.searched()) s[d] = nugget_start;
    out.candidate_values.push_back(objective.value(s));
    out.candidates.push_back(std::move(c));
  }

  std::vector<std::size_t> order(n_cand);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.candidate_values[a] < out.candidate_values[b]; });

  const std::size_t k = config.clusters();
  std::size_t keep = static_cast<std::size_t>(std::ceil(kSurvivorFraction * static_cast<double>(n_cand)));
  keep = std::clamp(keep, std::min(k, n_cand), n_cand);
  std::vector<Vector> survivors;
  std::vector<double> priority;
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t idx = order[i];
    if (!std::isfinite(out.candidate_values[idx])) break;
    survivors.push_back(out.candidates[idx]);
    priority.push_back(out.candidate_values[idx]);
  }
  out.survivors = survivors.size();

  auto with_nugget = [&](Vector v) {
    if (config.nugget.searched()) v.push_back(nugget_start);
    return v;
  };
  if (survivors.empty()) {
    // Nothing finite: fall back to the box centre and let the optimizer report it.
    Vector mid(d);
    for (std::size_t j = 0; j < d; ++j) mid[j] = 0.5 * (bounds.lower[j] + bounds.upper[j]);
    out.starts.push_back(with_nugget(std::move(mid)));
    return out;
  }

  const KMeansResult km = kmeans(survivors, k, mix_seed(config.seed, 0x6b6d65616e73ULL), priority);
  for (const Vector& c : km.centers) out.starts.push_back(with_nugget(c));
  const Vector& best = survivors.front();
  if (std::none_of(km.centers.begin(), km.centers.end(), [&](const Vector& c) { return c == best; }))
    out.starts.push_back(with_nugget(best));
  return out;
}

MultistartResult multistart_fit(const Matrix& x, const Vector& y, const KernelSpec& kernel, const FitConfig& config) {
  config.validate(x.cols());
  const DevianceObjective objective(x, y, kernel.family, kernel.exponent, config.search_transform, config.nugget);
  const optimize::Bounds bounds = search_bounds(x, kernel.family, config);

  std::vector<Vector> starts;
  if (!config.explicit_starts.empty()) {
    for (const KernelSpec& spec : config.explicit_starts) {
      if (spec.dims() != x.cols())
        throw Error(ErrorKind::DimensionMismatch, "explicit start has wrong number of dimensions");
      const Vector th = to_canonical_theta(spec);
      Vector s(objective.search_dims());
      for (std::size_t k = 0; k < th.size(); ++k) s[k] = theta_to_search(config.search_transform, th[k]);
      if (config.nugget.searched()) s.back() = std::log(config.nugget.value);
      starts.push_back(std::move(s));
    }
  } else {
    starts = generate_starts(bounds, config, objective).starts;
  }

  optimize::Options opt;
  opt.max_iters = config.max_iters;
  opt.grad_tol = config.grad_tol;
  opt.step_tol = config.step_tol;
  opt.rel_f_tol = config.rel_f_tol;

  MultistartResult res;
  res.value = kInf;
  const optimize::Objective fn = objective.as_objective();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    StartOutcome run;
    run.start = starts[i];
    try {
      const optimize::Result r = optimize::minimize(fn, starts[i], bounds, opt);
      run.argmin = r.x;
      run.value = r.value;
      run.start_value = r.start_value;
      run.iterations = r.iterations;
      run.evaluations = r.evaluations;
      run.reason = r.reason;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ObjectiveNonFinite) throw;
      run.skipped = true;
      run.value = kInf;
    }
    if (!run.skipped && run.value < res.value) {
      res.value = run.value;
      res.argmin = run.argmin;
      res.best_start = i;
    }
    res.runs.push_back(std::move(run));
  }
  res.objective_failures = objective.failures();
  res.jitter_escalations = objective.jitter_escalations();
  if (!std::isfinite(res.value)) throw Error(ErrorKind::AllStartsFailed, "no start produced a finite deviance");
  return res;
}

}  // namespace krig
