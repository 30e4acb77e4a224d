#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "krig/linalg.hpp"
#include "krig/simd.hpp"

using namespace krig;
using namespace testutil;

TEST_SUITE("linalg") {
  TEST_CASE("cholesky of identity and diagonal") {
    const auto f = linalg::cholesky(Matrix::identity(3));
    CHECK(f.lower == Matrix::identity(3));
    CHECK(f.logdet == 0.0);

    Matrix d(2, 2);
    d(0, 0) = 4;
    d(1, 1) = 9;
    const auto g = linalg::cholesky(d);
    CHECK(g.lower(0, 0) == 2.0);
    CHECK(g.lower(1, 1) == 3.0);
    CHECK(g.lower(1, 0) == 0.0);
    CHECK(g.logdet == doctest::Approx(std::log(36.0)).epsilon(1e-15));
  }

  TEST_CASE("cholesky reconstructs random SPD matrices") {
    Rng rng(11);
    for (std::size_t n = 1; n <= 20; ++n) {
      const Matrix a = random_spd(n, rng);
      const auto f = linalg::cholesky(a);
      const Matrix b = linalg::reconstruct(f);
      Matrix diff = a;
      for (std::size_t i = 0; i < a.data().size(); ++i) diff.data()[i] -= b.data()[i];
      CHECK(frobenius(diff) / frobenius(a) < 1e-10);
      for (std::size_t i = 0; i < n; ++i) CHECK(f.lower(i, i) > 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) CHECK(f.lower(i, j) == 0.0);
    }
  }

  TEST_CASE("cholesky rejects indefinite and non-finite input") {
    Matrix a(2, 2);
    a(0, 0) = 1;
    a(0, 1) = a(1, 0) = 2;
    a(1, 1) = 1;
    CHECK_THROWS_AS(linalg::cholesky(a), Error);
    try {
      linalg::cholesky(a);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
    }
    Matrix b = Matrix::identity(2);
    b(1, 1) = std::nan("");
    CHECK_THROWS_AS(linalg::cholesky(b), Error);
    CHECK_THROWS_AS(linalg::cholesky(Matrix(2, 3)), Error);
  }

  TEST_CASE("solve_spd") {
    const auto id = linalg::cholesky(Matrix::identity(3));
    const Vector b{1, 2, 3};
    CHECK(linalg::solve_spd(id, b) == b);

    Matrix d(2, 2);
    d(0, 0) = 4;
    d(1, 1) = 9;
    const Vector x = linalg::solve_spd(linalg::cholesky(d), Vector{4, 9});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));

    CHECK_THROWS_AS(linalg::solve_spd(id, Vector{1, 2}), Error);
  }

  TEST_CASE("solve_spd residual on random systems") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
      const Matrix a = random_spd(6, rng);
      const Vector b = random_vector(6, rng);
      const Vector x = linalg::solve_spd(linalg::cholesky(a), b);
      double r2 = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        double s = -b[i];
        for (std::size_t j = 0; j < 6; ++j) s += a(i, j) * x[j];
        r2 += s * s;
      }
      CHECK(std::sqrt(r2) < 1e-9);
    }
  }

  TEST_CASE("solve_spd recovers x for moderately conditioned matrices") {
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 2 + rep % 10;
      const Matrix a = random_spd(n, rng, 1e-3);
      REQUIRE(linalg::condition_number(a) < 1e8);
      const Vector x = random_vector(n, rng);
      Vector b(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b[i] += a(i, j) * x[j];
      const Vector got = linalg::solve_spd(linalg::cholesky(a), b);
      const double kappa = linalg::condition_number(a);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - x[i]) < 1e-9 * std::max(1.0, kappa * 1e-6));
    }
  }

  TEST_CASE("spd_inverse times matrix is identity") {
    Rng rng(3);
    const Matrix a = random_spd(7, rng);
    const Matrix inv = linalg::spd_inverse(linalg::cholesky(a));
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 7; ++k) s += a(i, k) * inv(k, j);
        CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
      }
  }

  TEST_CASE("largest eigenvalue") {
    CHECK(linalg::largest_eigenvalue(Matrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-12));
    Matrix d(3, 3);
    d(0, 0) = 1;
    d(1, 1) = 5;
    d(2, 2) = 2;
    CHECK(linalg::largest_eigenvalue(d) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(linalg::largest_eigenvalue(Matrix(4, 4, 1.0)) == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("condition number") {
    CHECK(linalg::condition_number(Matrix::identity(5)) == 1.0);
    Matrix d(2, 2);
    d(0, 0) = 100;
    d(1, 1) = 1;
    CHECK(linalg::condition_number(d) == doctest::Approx(100.0).epsilon(1e-10));
    Matrix r(2, 2, 1.0);
    r(0, 1) = r(1, 0) = 0.99;
    CHECK(linalg::condition_number(r) == doctest::Approx(199.0).epsilon(1e-4));
    // Singular matrices report the +infinity sentinel.
    CHECK(std::isinf(linalg::condition_number(Matrix(3, 3, 1.0))));
  }

  TEST_CASE("condition number is scale invariant") {
    Rng rng(9);
    for (int rep = 0; rep < 10; ++rep) {
      Matrix a = random_spd(5, rng);
      const double k1 = linalg::condition_number(a);
      for (double& v : a.data()) v *= 37.5;
      CHECK(linalg::condition_number(a) == doctest::Approx(k1).epsilon(1e-8));
    }
  }
}

TEST_SUITE("simd") {
  TEST_CASE("vector kernels agree with the scalar reference") {
    Rng rng(1234);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 101u, 400u}) {
      const Vector a = random_vector(n, rng), b = random_vector(n, rng), w = random_vector(n, rng, 0.0, 3.0);
      const double ref_dot = simd::scalar::dot(a.data(), b.data(), n);
      const double ref_wsd = simd::scalar::weighted_sq_dist(a.data(), b.data(), w.data(), n);
      Vector y_ref = b;
      simd::scalar::axpy(0.75, a.data(), y_ref.data(), n);
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
#if defined(__x86_64__)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        CHECK(std::abs(simd::avx2::dot(a.data(), b.data(), n) - ref_dot) <= 1e-14 * (mag + 1.0));
        CHECK(simd::avx2::weighted_sq_dist(a.data(), b.data(), w.data(), n) ==
              doctest::Approx(ref_wsd).epsilon(1e-13));
        Vector y = b;
        simd::avx2::axpy(0.75, a.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(y_ref[i]).epsilon(1e-15));
      }
#endif
#if defined(__aarch64__)
      CHECK(std::abs(simd::neon::dot(a.data(), b.data(), n) - ref_dot) <= 1e-14 * (mag + 1.0));
#endif
    }
  }

  TEST_CASE("dispatch level can be forced to scalar") {
    const simd::Level before = simd::active();
    CHECK(simd::set_active(simd::Level::Scalar) == simd::Level::Scalar);
    CHECK(simd::active() == simd::Level::Scalar);
    const Vector a{1, 2, 3}, b{4, 5, 6};
    CHECK(simd::dot(a, b) == 32.0);
    simd::set_active(before);
    CHECK(simd::dot(a, b) == 32.0);
  }

  TEST_CASE("cholesky agrees across dispatch levels") {
    Rng rng(77);
    const Matrix a = random_spd(40, rng);
    const simd::Level before = simd::active();
    simd::set_active(simd::Level::Scalar);
    const auto ref = linalg::cholesky(a);
    simd::set_active(simd::detect());
    const auto vec = linalg::cholesky(a);
    simd::set_active(before);
    for (std::size_t i = 0; i < a.data().size(); ++i)
      CHECK(vec.lower.data()[i] == doctest::Approx(ref.lower.data()[i]).epsilon(1e-12).scale(1.0));
    CHECK(vec.logdet == doctest::Approx(ref.logdet).epsilon(1e-12));
  }
}
