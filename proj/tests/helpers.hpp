#pragma once

#include <cmath>
#include <cstdint>

#include "krig/matrix.hpp"
#include "krig/random.hpp"

namespace testutil {

using krig::Matrix;
using krig::Vector;

inline Matrix random_matrix(std::size_t r, std::size_t c, krig::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = lo + (hi - lo) * rng.uniform();
  return m;
}

inline Vector random_vector(std::size_t n, krig::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (double& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

/// M^T M + shift I.
inline Matrix random_spd(std::size_t n, krig::Rng& rng, double shift = 1.0) {
  const Matrix m = random_matrix(n, n, rng);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += m(k, i) * m(k, j);
      a(i, j) = s + (i == j ? shift : 0.0);
    }
  return a;
}

inline double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil
