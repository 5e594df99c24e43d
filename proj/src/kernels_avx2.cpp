// AVX2 lane. Compiled with -mavx2 -mfma; only reached after the runtime
// dispatch in kernels.cpp has checked cpu support.

#include <immintrin.h>

#include "shakekey/kernels.hpp"

namespace shakekey::kernels::avx2 {

namespace {

inline double hsum(__m256d v) noexcept {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double sum(const double* x, std::size_t n) noexcept {
    const std::size_t limit = n & ~std::size_t{7};
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < limit; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    double result = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) result += x[i];
    return result;
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
    const std::size_t limit = n & ~std::size_t{7};
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < limit; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    double result = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) result += a[i] * b[i];
    return result;
}

double sum_sq_dev(const double* x, std::size_t n, double mean) noexcept {
    const std::size_t limit = n & ~std::size_t{3};
    const __m256d m = _mm256_set1_pd(mean);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < limit; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), m);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double result = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        result += d * d;
    }
    return result;
}

void subtract_scalar(const double* x, std::size_t n, double c, double* out) noexcept {
    const std::size_t limit = n & ~std::size_t{3};
    const __m256d cv = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i < limit; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), cv));
    for (; i < n; ++i) out[i] = x[i] - c;
}

void squared_magnitude(const double* ax, const double* ay, const double* az,
                       std::size_t n, double* out) noexcept {
    const std::size_t limit = n & ~std::size_t{3};
    std::size_t i = 0;
    for (; i < limit; i += 4) {
        const __m256d vx = _mm256_loadu_pd(ax + i);
        const __m256d vy = _mm256_loadu_pd(ay + i);
        const __m256d vz = _mm256_loadu_pd(az + i);
        __m256d acc = _mm256_mul_pd(vx, vx);
        acc = _mm256_fmadd_pd(vy, vy, acc);
        acc = _mm256_fmadd_pd(vz, vz, acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < n; ++i) out[i] = ax[i] * ax[i] + ay[i] * ay[i] + az[i] * az[i];
}

void project3(const double* ax, const double* ay, const double* az, std::size_t n,
              const double* center, const double* weights, double* out) noexcept {
    const std::size_t limit = n & ~std::size_t{3};
    const __m256d cx = _mm256_set1_pd(center[0]);
    const __m256d cy = _mm256_set1_pd(center[1]);
    const __m256d cz = _mm256_set1_pd(center[2]);
    const __m256d wx = _mm256_set1_pd(weights[0]);
    const __m256d wy = _mm256_set1_pd(weights[1]);
    const __m256d wz = _mm256_set1_pd(weights[2]);
    std::size_t i = 0;
    for (; i < limit; i += 4) {
        __m256d acc = _mm256_mul_pd(wx, _mm256_sub_pd(_mm256_loadu_pd(ax + i), cx));
        acc = _mm256_fmadd_pd(wy, _mm256_sub_pd(_mm256_loadu_pd(ay + i), cy), acc);
        acc = _mm256_fmadd_pd(wz, _mm256_sub_pd(_mm256_loadu_pd(az + i), cz), acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < n; ++i) {
        out[i] = weights[0] * (ax[i] - center[0]) + weights[1] * (ay[i] - center[1]) +
                 weights[2] * (az[i] - center[2]);
    }
}

}  // namespace shakekey::kernels::avx2
