#include <atomic>
#include <cstdlib>
#include <cstring>

#include "msv/simd.hpp"

namespace msv::simd {

namespace {

bool cpu_has_avx2_fma() noexcept {
#if (defined(__x86_64__) || defined(__i386__)) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() noexcept {
  Backend chosen = avx2_usable() ? Backend::avx2 : Backend::scalar;
  if (const char* env = std::getenv("MSV_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) chosen = Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_usable()) chosen = Backend::avx2;
  }
  return chosen;
}

std::atomic<Backend>& backend_slot() noexcept {
  static std::atomic<Backend> slot{initial_backend()};
  return slot;
}

}  // namespace

bool avx2_usable() noexcept { return detail::avx2_compiled() && cpu_has_avx2_fma(); }

Backend active_backend() noexcept { return backend_slot().load(std::memory_order_relaxed); }

const char* backend_name(Backend b) noexcept {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

bool set_backend(Backend b) noexcept {
  if (b == Backend::avx2 && !avx2_usable()) return false;
  backend_slot().store(b, std::memory_order_relaxed);
  return true;
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  return active_backend() == Backend::avx2 ? detail::dot_avx2(a, b, n)
                                           : detail::dot_scalar(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  if (active_backend() == Backend::avx2) {
    detail::axpy_avx2(alpha, x, y, n);
  } else {
    detail::axpy_scalar(alpha, x, y, n);
  }
}

double sum_sq(const double* x, std::size_t n) noexcept {
  return active_backend() == Backend::avx2 ? detail::sum_sq_avx2(x, n)
                                           : detail::sum_sq_scalar(x, n);
}

}  // namespace msv::simd
