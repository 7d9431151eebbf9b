#pragma once

#include <cstddef>

namespace msv::simd {

/// Vector-arithmetic backends for the solver inner loops. The scalar path is
/// the reference implementation; the AVX2 path must agree with it up to
/// floating-point reassociation and is selected at startup only when the CPU
/// reports AVX2+FMA support.
enum class Backend { scalar, avx2 };

Backend active_backend() noexcept;
const char* backend_name(Backend b) noexcept;

/// True when the AVX2 kernels were both compiled in and the CPU supports them.
bool avx2_usable() noexcept;

/// Override the dispatch (tests, or the MSV_SIMD=scalar|avx2 environment
/// variable read at startup). Returns false if the backend is unusable here.
bool set_backend(Backend b) noexcept;

double dot(const double* a, const double* b, std::size_t n) noexcept;
/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
double sum_sq(const double* x, std::size_t n) noexcept;

namespace detail {
// Per-backend entry points, exposed so the equivalence tests can pin both
// implementations regardless of the active dispatch.
double dot_scalar(const double* a, const double* b, std::size_t n) noexcept;
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) noexcept;
double sum_sq_scalar(const double* x, std::size_t n) noexcept;
double dot_avx2(const double* a, const double* b, std::size_t n) noexcept;
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) noexcept;
double sum_sq_avx2(const double* x, std::size_t n) noexcept;
bool avx2_compiled() noexcept;
}  // namespace detail

}  // namespace msv::simd
