#pragma once

// Data-parallel inner loops used by the Cholesky factorization, triangular
// solves and correlation assembly. Every kernel has a scalar reference
// implementation; vector variants (AVX2+FMA on x86-64, NEON on aarch64) are
// selected once at runtime and must agree with the reference to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace krig::simd {

enum class Level { Scalar, Avx2, Neon };

std::string_view to_string(Level level) noexcept;

/// Best level the running CPU supports. Honors KRIG_SIMD=scalar in the
/// environment to force the reference path.
Level detect() noexcept;

/// Level currently used by the dispatching entry points below.
Level active() noexcept;

/// Override the dispatch level. Requests the CPU cannot run fall back to
/// Scalar. Returns the level actually installed.
Level set_active(Level level) noexcept;

// Dispatching entry points.
double dot(std::span<const double> a, std::span<const double> b) noexcept;
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
/// sum_k w_k (a_k - b_k)^2
double weighted_sq_dist(std::span<const double> a, std::span<const double> b,
                        std::span<const double> w) noexcept;

// Per-level implementations, exposed for equivalence testing.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double weighted_sq_dist(const double* a, const double* b, const double* w, std::size_t n) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double weighted_sq_dist(const double* a, const double* b, const double* w, std::size_t n) noexcept;
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double weighted_sq_dist(const double* a, const double* b, const double* w, std::size_t n) noexcept;
}  // namespace neon
#endif

}  // namespace krig::simd
