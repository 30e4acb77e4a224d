#include "krig/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "krig/simd.hpp"

namespace krig::linalg {

SpdFactor cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::DimensionMismatch, "cholesky: matrix is not square");

  SpdFactor f{Matrix(n, n), 0.0};
  Matrix& l = f.lower;
  for (std::size_t j = 0; j < n; ++j) {
    auto lj = l.row(j);
    for (std::size_t i = 0; i < j; ++i) {
      auto li = l.row(i);
      const double s = a(j, i) - simd::dot(lj.first(i), li.first(i));
      lj[i] = s / li[i];
    }
    const double pivot = a(j, j) - simd::dot(lj.first(j), lj.first(j));
    if (!(pivot > 0.0) || !std::isfinite(pivot))
      throw Error(ErrorKind::NotPositiveDefinite,
                  "pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    lj[j] = std::sqrt(pivot);
    f.logdet += 2.0 * std::log(lj[j]);
  }
  return f;
}

Vector solve_lower(const SpdFactor& f, std::span<const double> b) {
  const std::size_t n = f.order();
  if (b.size() != n) throw Error(ErrorKind::DimensionMismatch, "solve: rhs length differs from factor order");
  Vector z(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    auto li = f.lower.row(i);
    z[i] = (z[i] - simd::dot(li.first(i), std::span<const double>(z).first(i))) / li[i];
  }
  return z;
}

Vector solve_upper(const SpdFactor& f, std::span<const double> z) {
  const std::size_t n = f.order();
  if (z.size() != n) throw Error(ErrorKind::DimensionMismatch, "solve: rhs length differs from factor order");
  Vector x(z.begin(), z.end());
  // Column sweep of L^T == row sweep of L, keeps memory access contiguous.
  for (std::size_t i = n; i-- > 0;) {
    auto li = f.lower.row(i);
    x[i] /= li[i];
    simd::axpy(-x[i], li.first(i), std::span<double>(x).first(i));
  }
  return x;
}

Vector solve_spd(const SpdFactor& f, std::span<const double> b) {
  return solve_upper(f, solve_lower(f, b));
}

Matrix spd_inverse(const SpdFactor& f) {
  const std::size_t n = f.order();
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector col = solve_spd(f, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  // Symmetrize; the two triangles differ only by rounding.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  return inv;
}

Matrix reconstruct(const SpdFactor& f) {
  const std::size_t n = f.order();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = simd::dot(f.lower.row(i).first(j + 1), f.lower.row(j).first(j + 1));
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

EigenRange symmetric_eigen_range(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::DimensionMismatch, "eigen: matrix is not square");
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "eigen: empty matrix");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      a.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::NoConvergence, "symmetric eigensolver did not converge");
  const auto& ev = solver.eigenvalues();  // ascending
  return {ev(0), ev(static_cast<Eigen::Index>(n) - 1)};
}

double largest_eigenvalue(const Matrix& a) { return symmetric_eigen_range(a).max; }

double condition_number(const Matrix& a) {
  const EigenRange r = symmetric_eigen_range(a);
  const double floor = static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() *
                       std::abs(r.max);
  if (!(r.min > floor)) return std::numeric_limits<double>::infinity();
  return r.max / r.min;
}

}  // namespace krig::linalg
