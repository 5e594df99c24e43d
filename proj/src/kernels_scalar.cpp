#include "shakekey/kernels.hpp"

namespace shakekey::kernels::scalar {

double sum(const double* x, std::size_t n) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_sq_dev(const double* x, std::size_t n, double mean) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        acc += d * d;
    }
    return acc;
}

void subtract_scalar(const double* x, std::size_t n, double c, double* out) noexcept {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - c;
}

void squared_magnitude(const double* ax, const double* ay, const double* az,
                       std::size_t n, double* out) noexcept {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = ax[i] * ax[i] + ay[i] * ay[i] + az[i] * az[i];
}

void project3(const double* ax, const double* ay, const double* az, std::size_t n,
              const double* center, const double* weights, double* out) noexcept {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = weights[0] * (ax[i] - center[0]) + weights[1] * (ay[i] - center[1]) +
                 weights[2] * (az[i] - center[2]);
    }
}

}  // namespace shakekey::kernels::scalar
