#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "krig/designs.hpp"
#include "krig/kernels.hpp"
#include "krig/nugget.hpp"

using namespace krig;
using namespace testutil;

TEST_SUITE("nugget") {
  TEST_CASE("stability lower bound") {
    // Identity: kappa = 1, lambda = 1, so the bound clamps to zero.
    CHECK(realize_nugget(NuggetStrategy::stability_lower_bound(), Matrix::identity(4)) == Vector{0.0});
    const double ea = std::exp(25.0);
    CHECK(stability_lower_bound(3.0, 1e12, 25.0) ==
          doctest::Approx(3.0 * (1e12 - ea) / (1e12 * (ea - 1.0))).epsilon(1e-14));
    CHECK(stability_lower_bound(2.0, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(2.0 / (ea - 1.0)));
    // Exactly singular: all-ones matrix gets the kappa = infinity limit.
    const Vector d = realize_nugget(NuggetStrategy::stability_lower_bound(), Matrix(5, 5, 1.0));
    CHECK(d[0] == doctest::Approx(5.0 / (ea - 1.0)).epsilon(1e-10));
  }

  TEST_CASE("stability bound makes the condition number at most e^a") {
    Matrix x(12, 1);
    for (std::size_t i = 0; i < 12; ++i) x(i, 0) = static_cast<double>(i) / 11.0;
    const Matrix r = correlation_matrix(KernelSpec::gaussian({0.5}), x);
    const Vector d = realize_nugget(NuggetStrategy::stability_lower_bound(), r);
    CHECK(d[0] > 0.0);
    const double kappa = linalg::condition_number(add_nugget(r, d));
    CHECK(kappa <= std::exp(25.0) * 1.01);
  }

  TEST_CASE("DACE default and fixed values") {
    CHECK(realize_nugget(NuggetStrategy::dace_default(), Matrix::identity(80))[0] ==
          doctest::Approx(2.22 * 90 * 1e-16).epsilon(1e-14));
    CHECK(dace_default_nugget(80) == doctest::Approx(1.998e-14).epsilon(1e-12));
    CHECK(realize_nugget(NuggetStrategy::fixed(1e-6), Matrix::identity(3)) == Vector{1e-6});
    CHECK(realize_nugget(NuggetStrategy::estimated(), Matrix::identity(3), 0.25) == Vector{0.25});
  }

  TEST_CASE("per-point noise realization") {
    const Vector v{1.0, 2.0, 4.0};
    const Vector joint = realize_nugget(NuggetStrategy::stochastic_joint(v), Matrix::identity(3), 3.0, 2.0);
    CHECK(joint == Vector{1.5, 3.0, 6.0});
    const Vector rel = realize_nugget(NuggetStrategy::stochastic_relative(v), Matrix::identity(3), 0.0, 4.0);
    CHECK(rel == Vector{0.25, 0.5, 1.0});
  }

  TEST_CASE("strategy validation") {
    CHECK_THROWS_AS(NuggetStrategy::fixed(-1.0).validate(3), Error);
    CHECK_THROWS_AS(NuggetStrategy::estimated(0.0).validate(3), Error);
    CHECK_THROWS_AS(NuggetStrategy::stochastic_joint(Vector{1.0, 1.0}).validate(3), Error);
    CHECK_THROWS_AS(NuggetStrategy::stochastic_joint(Vector{1.0, -1.0, 1.0}).validate(3), Error);
    CHECK_NOTHROW(NuggetStrategy::stochastic_joint(Vector{1.0, 0.0, 1.0}).validate(3));
  }

  TEST_CASE("jitter ladder") {
    // Rank-one matrix: needs jitter, and the ladder reaches it.
    const Matrix ones(4, 4, 1.0);
    const JitteredFactor f = factor_with_jitter(ones, Vector{0.0});
    CHECK(f.escalations >= 1);
    CHECK(f.nugget[0] >= kJitterStart);
    CHECK(f.nugget[0] <= kJitterCap);

    // Positive definite input: no escalation and nugget untouched.
    const JitteredFactor g = factor_with_jitter(Matrix::identity(3), Vector{0.0});
    CHECK(g.escalations == 0);
    CHECK(g.nugget == Vector{0.0});

    // Per-point nugget gets the same additive ladder.
    const JitteredFactor h = factor_with_jitter(ones, Vector{0.0, 0.0, 0.0, 0.0});
    CHECK(h.escalations >= 1);
    CHECK(h.nugget[0] == h.nugget[3]);

    // Beyond the cap: a matrix no jitter <= 1e-4 can repair.
    Matrix bad = Matrix::identity(2);
    bad(0, 1) = bad(1, 0) = 1.5;
    try {
      factor_with_jitter(bad, Vector{0.0});
      FAIL("expected FactorizationFailure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::FactorizationFailure);
    }
  }
}

TEST_SUITE("designs") {
  TEST_CASE("scale_outputs") {
    const auto s = designs::scale_outputs(Vector{0, 5, 10});
    CHECK(s.values == Vector{-0.5, 0.0, 0.5});
    CHECK_FALSE(s.record.degenerate);

    const auto c = designs::scale_outputs(Vector{7, 7});
    CHECK(c.values == Vector{0.0, 0.0});
    CHECK(c.record.degenerate);
    CHECK(c.record.y_range == 1.0);
    CHECK(c.record.invert(0.0) == 7.0);
  }

  TEST_CASE("scale_outputs properties") {
    Rng rng(99);
    for (int rep = 0; rep < 200; ++rep) {
      const std::size_t n = 2 + rng.below(50);
      const double scale = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
      const Vector y = random_vector(n, rng, -scale, 2.0 * scale);
      const auto s = designs::scale_outputs(y);
      const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
      CHECK(*hi - *lo == 1.0);
      double mean = 0.0;
      for (double v : s.values) mean += v;
      CHECK(std::abs(mean / static_cast<double>(n)) < 1e-12);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(s.record.invert(s.values[i]) - y[i]) <= 1e-12 * scale);
    }
  }

  TEST_CASE("LHS stratification") {
    Rng rng(5);
    for (int rep = 0; rep < 40; ++rep) {
      const std::size_t n = 1 + rng.below(40), d = 1 + rng.below(6);
      for (const Matrix& x : {designs::random_lhs(n, d, rep), designs::maximin_lhs(n, d, rep, 500)}) {
        for (std::size_t k = 0; k < d; ++k) {
          std::vector<int> hits(n, 0);
          for (std::size_t i = 0; i < n; ++i) {
            const double v = x(i, k);
            REQUIRE(v > 0.0);
            REQUIRE(v < 1.0);
            const auto cell = static_cast<std::size_t>(std::floor(v * static_cast<double>(n)));
            REQUIRE(cell < n);
            ++hits[cell];
          }
          CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
        }
      }
    }
  }

  TEST_CASE("n = 5, d = 1 has one value per stratum") {
    const Matrix x = designs::maximin_lhs(5, 1, 1);
    std::vector<double> v(x.data().begin(), x.data().end());
    std::sort(v.begin(), v.end());
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(v[i] >= 0.2 * static_cast<double>(i));
      CHECK(v[i] < 0.2 * static_cast<double>(i + 1));
    }
    const Matrix one = designs::maximin_lhs(1, 3, 1);
    for (double c : one.data()) CHECK((c > 0.0 && c < 1.0));
  }

  TEST_CASE("maximin exchange never lowers the minimum distance") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      designs::MaximinStats st;
      const Matrix x = designs::maximin_lhs(10, 2, seed, 2000, &st);
      const Matrix start = designs::random_lhs(10, 2, seed);
      CHECK(st.initial_min_distance == doctest::Approx(designs::min_pairwise_distance(start)));
      CHECK(designs::min_pairwise_distance(x) >= designs::min_pairwise_distance(start));
      CHECK(st.final_min_distance == doctest::Approx(designs::min_pairwise_distance(x)));
    }
  }

  TEST_CASE("designs are deterministic per seed") {
    CHECK(designs::maximin_lhs(20, 3, 42) == designs::maximin_lhs(20, 3, 42));
    CHECK_FALSE(designs::maximin_lhs(20, 3, 42) == designs::maximin_lhs(20, 3, 43));
  }
}
