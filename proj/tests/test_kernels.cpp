#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "shakekey/kernels.hpp"

using namespace shakekey::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale = 10.0) {
    std::uniform_real_distribution<double> uni(-scale, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = uni(rng);
    return v;
}

// Long-double reference accumulations, written independently of the library.
long double ref_sum(const std::vector<double>& x) {
    long double acc = 0;
    for (double v : x) acc += v;
    return acc;
}

long double ref_dot(const std::vector<double>& a, const std::vector<double>& b) {
    long double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += static_cast<long double>(a[i]) * b[i];
    return acc;
}

long double ref_ssd(const std::vector<double>& x, double mean) {
    long double acc = 0;
    for (double v : x) {
        const long double d = static_cast<long double>(v) - mean;
        acc += d * d;
    }
    return acc;
}

bool close_rel(double got, long double want, double tol = 1e-12) {
    const long double diff = fabsl(static_cast<long double>(got) - want);
    const long double mag = std::max<long double>(fabsl(want), 1.0L);
    return diff / mag <= tol;
}

}  // namespace

TEST_CASE("scalar reference matches long-double oracles") {
    std::mt19937_64 rng(101);
    for (std::size_t n : {0u, 1u, 2u, 3u, 7u, 8u, 64u, 1000u, 1023u}) {
        auto a = random_vec(rng, n);
        auto b = random_vec(rng, n);
        CHECK(close_rel(scalar::sum(a.data(), n), ref_sum(a)));
        CHECK(close_rel(scalar::dot(a.data(), b.data(), n), ref_dot(a, b)));
        CHECK(close_rel(scalar::sum_sq_dev(a.data(), n, 1.5), ref_ssd(a, 1.5)));
    }
}

TEST_CASE("subtract_scalar and squared_magnitude elementwise") {
    std::mt19937_64 rng(102);
    const std::size_t n = 501;
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);
    auto z = random_vec(rng, n);
    std::vector<double> out(n), mag(n);

    subtract_scalar(x, 2.25, out);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == x[i] - 2.25);

    squared_magnitude(x, y, z, mag);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(mag[i] == doctest::Approx(x[i] * x[i] + y[i] * y[i] + z[i] * z[i])
                            .epsilon(1e-14));
}

TEST_CASE("project3 equals explicit centered projection") {
    std::mt19937_64 rng(103);
    const std::size_t n = 333;
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);
    auto z = random_vec(rng, n);
    const std::array<double, 3> c{0.5, -1.25, 9.81};
    const std::array<double, 3> w{0.3, -0.9, 0.1};
    std::vector<double> out(n);
    project3(x, y, z, c, w, out);
    for (std::size_t i = 0; i < n; ++i) {
        const double want =
            w[0] * (x[i] - c[0]) + w[1] * (y[i] - c[1]) + w[2] * (z[i] - c[2]);
        CHECK(out[i] == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("backend control: scalar always available, force round-trips") {
    CHECK(backend_supported(Backend::scalar));
    const Backend before = active_backend();

    force_backend(Backend::scalar);
    CHECK(active_backend() == Backend::scalar);
    CHECK(backend_name(active_backend()) == "scalar");

    if (backend_supported(Backend::avx2)) {
        force_backend(Backend::avx2);
        CHECK(active_backend() == Backend::avx2);
        CHECK(backend_name(active_backend()) == "avx2");
    } else {
        CHECK_THROWS_AS(force_backend(Backend::avx2), std::invalid_argument);
    }
    force_backend(before);
}

TEST_CASE("scalar and avx2 lanes agree on every operation") {
    if (!backend_supported(Backend::avx2)) return;  // nothing to compare on this box

    std::mt19937_64 rng(104);
    // Lengths straddling vector-width boundaries, including remainders.
    for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 15u, 16u, 17u, 400u, 1001u}) {
        auto a = random_vec(rng, n, 50.0);
        auto b = random_vec(rng, n, 50.0);
        auto c = random_vec(rng, n, 50.0);

        CHECK(close_rel(shakekey::kernels::avx2::sum(a.data(), n), ref_sum(a), 1e-12));
        CHECK(close_rel(shakekey::kernels::avx2::dot(a.data(), b.data(), n), ref_dot(a, b),
                        1e-12));
        CHECK(close_rel(shakekey::kernels::avx2::sum_sq_dev(a.data(), n, 0.75),
                        ref_ssd(a, 0.75), 1e-12));

        std::vector<double> s1(n), s2(n);
        scalar::subtract_scalar(a.data(), n, 1.1, s1.data());
        shakekey::kernels::avx2::subtract_scalar(a.data(), n, 1.1, s2.data());
        CHECK(s1 == s2);

        std::vector<double> m1(n), m2(n);
        scalar::squared_magnitude(a.data(), b.data(), c.data(), n, m1.data());
        shakekey::kernels::avx2::squared_magnitude(a.data(), b.data(), c.data(), n,
                                                   m2.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(m1[i] == doctest::Approx(m2[i]).epsilon(1e-13));

        const double ctr[3] = {0.1, 0.2, 0.3};
        const double wts[3] = {0.5, -0.25, 0.8};
        std::vector<double> p1(n), p2(n);
        scalar::project3(a.data(), b.data(), c.data(), n, ctr, wts, p1.data());
        shakekey::kernels::avx2::project3(a.data(), b.data(), c.data(), n, ctr, wts,
                                          p2.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-12));
    }
}

TEST_CASE("dispatched entry points honor the forced lane") {
    std::mt19937_64 rng(105);
    auto a = random_vec(rng, 257);

    force_backend(Backend::scalar);
    const double s_scalar = sum(a);

    if (backend_supported(Backend::avx2)) {
        force_backend(Backend::avx2);
        const double s_avx = sum(a);
        CHECK(close_rel(s_avx, ref_sum(a), 1e-12));
        CHECK(s_scalar == doctest::Approx(s_avx).epsilon(1e-12));
        force_backend(Backend::scalar);
    }
    CHECK(close_rel(s_scalar, ref_sum(a), 1e-12));
}
