#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace shakekey::kernels {

// Data-parallel primitives behind the signal pipeline: magnitude, centering,
// covariance accumulation, projection and per-segment statistics all bottom
// out here. Each operation has a scalar reference implementation and, on
// x86-64, an AVX2 variant selected once at startup. The two lanes are
// equivalence-tested against each other; force_backend() pins a lane and the
// SHAKEKEY_SIMD environment variable ("scalar"/"avx2") overrides the
// automatic pick.

enum class Backend { scalar, avx2 };

Backend active_backend() noexcept;
bool backend_supported(Backend b) noexcept;

/// Pins the dispatch table to one lane. Throws std::invalid_argument if the
/// lane is not supported on this machine. Not safe to call while kernels are
/// executing on other threads.
void force_backend(Backend b);

std::string_view backend_name(Backend b) noexcept;

double sum(std::span<const double> x) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// Sum of squared deviations about a given mean: sum((x[i] - mean)^2).
double sum_sq_dev(std::span<const double> x, double mean) noexcept;

/// out[i] = x[i] - c
void subtract_scalar(std::span<const double> x, double c, std::span<double> out) noexcept;

/// out[i] = ax[i]^2 + ay[i]^2 + az[i]^2
void squared_magnitude(std::span<const double> ax, std::span<const double> ay,
                       std::span<const double> az, std::span<double> out) noexcept;

/// Centered 3-axis projection: out[i] = w[0]*(ax[i]-c[0]) + w[1]*(ay[i]-c[1])
/// + w[2]*(az[i]-c[2]).
void project3(std::span<const double> ax, std::span<const double> ay,
              std::span<const double> az, const std::array<double, 3>& center,
              const std::array<double, 3>& weights, std::span<double> out) noexcept;

// Reference lane. Always available; the dispatch table above falls back to
// these on machines without AVX2.
namespace scalar {
double sum(const double* x, std::size_t n) noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;
double sum_sq_dev(const double* x, std::size_t n, double mean) noexcept;
void subtract_scalar(const double* x, std::size_t n, double c, double* out) noexcept;
void squared_magnitude(const double* ax, const double* ay, const double* az,
                       std::size_t n, double* out) noexcept;
void project3(const double* ax, const double* ay, const double* az, std::size_t n,
              const double* center, const double* weights, double* out) noexcept;
}  // namespace scalar

#if defined(SHAKEKEY_HAVE_AVX2)
namespace avx2 {
double sum(const double* x, std::size_t n) noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;
double sum_sq_dev(const double* x, std::size_t n, double mean) noexcept;
void subtract_scalar(const double* x, std::size_t n, double c, double* out) noexcept;
void squared_magnitude(const double* ax, const double* ay, const double* az,
                       std::size_t n, double* out) noexcept;
void project3(const double* ax, const double* ay, const double* az, std::size_t n,
              const double* center, const double* weights, double* out) noexcept;
}  // namespace avx2
#endif

}  // namespace shakekey::kernels
