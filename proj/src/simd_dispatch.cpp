#include <atomic>
#include <cstdlib>
#include <cstring>

#include "krig/simd.hpp"

namespace krig::simd {

namespace {

bool cpu_has(Level level) noexcept {
  switch (level) {
    case Level::Scalar:
      return true;
    case Level::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Level::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Level initial_level() noexcept { return detect(); }

std::atomic<Level>& current() noexcept {
  static std::atomic<Level> level{initial_level()};
  return level;
}

}  // namespace

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::Scalar: return "scalar";
    case Level::Avx2: return "avx2";
    case Level::Neon: return "neon";
  }
  return "unknown";
}

Level detect() noexcept {
  if (const char* env = std::getenv("KRIG_SIMD"); env != nullptr && std::strcmp(env, "scalar") == 0)
    return Level::Scalar;
  if (cpu_has(Level::Avx2)) return Level::Avx2;
  if (cpu_has(Level::Neon)) return Level::Neon;
  return Level::Scalar;
}

Level active() noexcept { return current().load(std::memory_order_relaxed); }

Level set_active(Level level) noexcept {
  if (!cpu_has(level)) level = Level::Scalar;
  current().store(level, std::memory_order_relaxed);
  return level;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  switch (active()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::Avx2: return avx2::dot(a.data(), b.data(), n);
#endif
#if defined(__aarch64__)
    case Level::Neon: return neon::dot(a.data(), b.data(), n);
#endif
    default: return scalar::dot(a.data(), b.data(), n);
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  const std::size_t n = x.size() < y.size() ? x.size() : y.size();
  switch (active()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::Avx2: avx2::axpy(alpha, x.data(), y.data(), n); return;
#endif
#if defined(__aarch64__)
    case Level::Neon: neon::axpy(alpha, x.data(), y.data(), n); return;
#endif
    default: scalar::axpy(alpha, x.data(), y.data(), n); return;
  }
}

double weighted_sq_dist(std::span<const double> a, std::span<const double> b,
                        std::span<const double> w) noexcept {
  std::size_t n = a.size() < b.size() ? a.size() : b.size();
  if (w.size() < n) n = w.size();
  switch (active()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::Avx2: return avx2::weighted_sq_dist(a.data(), b.data(), w.data(), n);
#endif
#if defined(__aarch64__)
    case Level::Neon: return neon::weighted_sq_dist(a.data(), b.data(), w.data(), n);
#endif
    default: return scalar::weighted_sq_dist(a.data(), b.data(), w.data(), n);
  }
}

}  // namespace krig::simd
