#pragma once

#include <cstddef>
#include <span>

#include "krig/matrix.hpp"

namespace krig::linalg {

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// The strict upper triangle of `lower` is zero.
struct SpdFactor {
  Matrix lower;
  double logdet = 0.0;  // log|A| = 2 * sum log L_ii

  std::size_t order() const noexcept { return lower.rows(); }
};

/// Throws Error{NotPositiveDefinite} when a pivot is not strictly positive or
/// not finite. Never regularizes; callers decide how to add jitter.
SpdFactor cholesky(const Matrix& a);

/// Solves L z = b.
Vector solve_lower(const SpdFactor& f, std::span<const double> b);
/// Solves L^T x = z.
Vector solve_upper(const SpdFactor& f, std::span<const double> z);
/// Solves A x = b with A = L L^T.
Vector solve_spd(const SpdFactor& f, std::span<const double> b);

/// A^{-1} assembled column by column from the factor. Only the likelihood
/// gradient needs the full inverse (for trace terms); predictions use solves.
Matrix spd_inverse(const SpdFactor& f);

/// L L^T, used by tests and reconstruction checks.
Matrix reconstruct(const SpdFactor& f);

struct EigenRange {
  double min = 0.0;
  double max = 0.0;
};

/// Smallest and largest eigenvalue of a symmetric matrix.
EigenRange symmetric_eigen_range(const Matrix& a);

double largest_eigenvalue(const Matrix& a);

/// 2-norm condition number lambda_max / lambda_min. Returns +infinity when
/// lambda_min is not above n * eps * lambda_max, which is the resolution
/// limit of a double-precision eigensolve.
double condition_number(const Matrix& a);

}  // namespace krig::linalg
