#include "shakekey/kernels.hpp"

#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace shakekey::kernels {

namespace {

struct Table {
    double (*sum)(const double*, std::size_t) noexcept;
    double (*dot)(const double*, const double*, std::size_t) noexcept;
    double (*sum_sq_dev)(const double*, std::size_t, double) noexcept;
    void (*subtract_scalar)(const double*, std::size_t, double, double*) noexcept;
    void (*squared_magnitude)(const double*, const double*, const double*, std::size_t,
                              double*) noexcept;
    void (*project3)(const double*, const double*, const double*, std::size_t,
                     const double*, const double*, double*) noexcept;
};

constexpr Table kScalarTable{scalar::sum,             scalar::dot,
                             scalar::sum_sq_dev,      scalar::subtract_scalar,
                             scalar::squared_magnitude, scalar::project3};

#if defined(SHAKEKEY_HAVE_AVX2)
constexpr Table kAvx2Table{avx2::sum,             avx2::dot,
                           avx2::sum_sq_dev,      avx2::subtract_scalar,
                           avx2::squared_magnitude, avx2::project3};
#endif

bool cpu_has_avx2() noexcept {
#if defined(SHAKEKEY_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend pick_initial_backend() noexcept {
    if (const char* env = std::getenv("SHAKEKEY_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && cpu_has_avx2()) return Backend::avx2;
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

struct Dispatch {
    Backend backend;
    Table table;
};

Dispatch& dispatch() noexcept {
    static Dispatch d = [] {
        [[maybe_unused]] const Backend b = pick_initial_backend();
#if defined(SHAKEKEY_HAVE_AVX2)
        if (b == Backend::avx2) return Dispatch{b, kAvx2Table};
#endif
        return Dispatch{Backend::scalar, kScalarTable};
    }();
    return d;
}

}  // namespace

Backend active_backend() noexcept { return dispatch().backend; }

bool backend_supported(Backend b) noexcept {
    return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

void force_backend(Backend b) {
    if (!backend_supported(b))
        throw std::invalid_argument("kernel backend not supported on this machine");
#if defined(SHAKEKEY_HAVE_AVX2)
    if (b == Backend::avx2) {
        dispatch() = Dispatch{b, kAvx2Table};
        return;
    }
#endif
    dispatch() = Dispatch{Backend::scalar, kScalarTable};
}

std::string_view backend_name(Backend b) noexcept {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

double sum(std::span<const double> x) noexcept {
    return dispatch().table.sum(x.data(), x.size());
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    assert(a.size() == b.size());
    return dispatch().table.dot(a.data(), b.data(), a.size());
}

double sum_sq_dev(std::span<const double> x, double mean) noexcept {
    return dispatch().table.sum_sq_dev(x.data(), x.size(), mean);
}

void subtract_scalar(std::span<const double> x, double c, std::span<double> out) noexcept {
    assert(x.size() == out.size());
    dispatch().table.subtract_scalar(x.data(), x.size(), c, out.data());
}

void squared_magnitude(std::span<const double> ax, std::span<const double> ay,
                       std::span<const double> az, std::span<double> out) noexcept {
    assert(ax.size() == ay.size() && ay.size() == az.size() && az.size() == out.size());
    dispatch().table.squared_magnitude(ax.data(), ay.data(), az.data(), ax.size(),
                                       out.data());
}

void project3(std::span<const double> ax, std::span<const double> ay,
              std::span<const double> az, const std::array<double, 3>& center,
              const std::array<double, 3>& weights, std::span<double> out) noexcept {
    assert(ax.size() == ay.size() && ay.size() == az.size() && az.size() == out.size());
    dispatch().table.project3(ax.data(), ay.data(), az.data(), ax.size(), center.data(),
                              weights.data(), out.data());
}

}  // namespace shakekey::kernels
