#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shakekey/trace.hpp"

using namespace shakekey;

namespace {

MotionTrace make_trace(std::vector<double> x, std::vector<double> y,
                       std::vector<double> z, double rate = 200.0) {
    MotionTrace t;
    t.sample_rate = rate;
    t.ax = std::move(x);
    t.ay = std::move(y);
    t.az = std::move(z);
    return t;
}

// Straight-line implementation of the first-qualifying-peak rule, used as an
// exhaustive-scan oracle against detect_anchor.
std::optional<std::size_t> oracle_anchor(const std::vector<double>& v, double thr) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > thr)) continue;
        const bool left_ok = i == 0 || v[i] >= v[i - 1];
        const bool right_ok = i + 1 == v.size() || v[i] >= v[i + 1];
        if (left_ok && right_ok) return i;
    }
    return std::nullopt;
}

double oracle_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("csv round-trip preserves samples and rate") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-30.0, 30.0);
    MotionTrace t;
    t.sample_rate = 128.0;
    for (int i = 0; i < 250; ++i) {
        t.ax.push_back(uni(rng));
        t.ay.push_back(uni(rng));
        t.az.push_back(uni(rng));
    }
    std::ostringstream out;
    write_trace(t, out);
    std::istringstream in(out.str());
    const MotionTrace back = load_trace(in);

    CHECK(back.sample_rate == doctest::Approx(128.0));
    REQUIRE(back.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        // 6 significant digits in the file
        CHECK(back.ax[i] == doctest::Approx(t.ax[i]).epsilon(1e-5));
        CHECK(back.ay[i] == doctest::Approx(t.ay[i]).epsilon(1e-5));
        CHECK(back.az[i] == doctest::Approx(t.az[i]).epsilon(1e-5));
    }
}

TEST_CASE("csv parser rejects malformed input with line numbers") {
    auto expect_parse_error = [](const std::string& text, const char* fragment) {
        std::istringstream in(text);
        try {
            load_trace(in);
            FAIL("expected ParseError for: " << text);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
            CHECK(std::string(e.name()) == "ParseError");
        }
    };

    expect_parse_error("t,ax,ay\n", "header");
    expect_parse_error("t,ax,ay,az\n0.0,1.0,2.0\n", "line 2");
    expect_parse_error("t,ax,ay,az\n0.0,1.0,2.0,banana\n", "line 2");
    expect_parse_error("t,ax,ay,az\n0.0,1.0,2.0,inf\n", "line 2");
    expect_parse_error("t,ax,ay,az\n0.0,1.0,2.0,nan\n", "line 2");
    expect_parse_error("# rate=abc\nt,ax,ay,az\n", "line 1");
    expect_parse_error("# rate=-5\nt,ax,ay,az\n0,1,2,3\n", "rate");
}

TEST_CASE("header without data rows is an EmptyTrace") {
    std::istringstream in("# rate=200\nt,ax,ay,az\n");
    CHECK_THROWS_AS(load_trace(in), EmptyTrace);
    MotionTrace t;
    CHECK_THROWS_AS(squared_magnitude(t), EmptyTrace);
}

TEST_CASE("squared magnitude matches per-sample arithmetic") {
    const auto t = make_trace({1, -2, 3}, {0, 4, -1}, {2, 2, 2});
    const MagnitudeSeries m = squared_magnitude(t);
    REQUIRE(m.values.size() == 3);
    CHECK(m.values[0] == doctest::Approx(1 + 0 + 4));
    CHECK(m.values[1] == doctest::Approx(4 + 16 + 4));
    CHECK(m.values[2] == doctest::Approx(9 + 1 + 4));
    CHECK(m.sample_rate == t.sample_rate);
}

TEST_CASE("default threshold is five times the median") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(50.0, 150.0);
    for (std::size_t n : {1u, 2u, 5u, 6u, 101u, 200u}) {
        MagnitudeSeries m;
        m.values.resize(n);
        for (auto& v : m.values) v = uni(rng);
        CHECK(default_peak_threshold(m) ==
              doctest::Approx(5.0 * oracle_median(m.values)).epsilon(1e-12));
    }
    MagnitudeSeries empty;
    CHECK_THROWS_AS(default_peak_threshold(empty), EmptyTrace);
}

TEST_CASE("anchor detection equals the exhaustive-scan oracle") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> uni(0.0, 100.0);
    std::uniform_int_distribution<int> len(1, 60);
    for (int trial = 0; trial < 2000; ++trial) {
        MagnitudeSeries m;
        m.values.resize(static_cast<std::size_t>(len(rng)));
        for (auto& v : m.values) v = uni(rng);
        // sprinkle plateaus to exercise the >= tie handling
        if (m.values.size() > 3 && trial % 3 == 0) m.values[2] = m.values[1];
        const double thr = uni(rng);
        CHECK(detect_anchor(m, thr) == oracle_anchor(m.values, thr));
    }
}

TEST_CASE("anchor picks the first peak, not the biggest") {
    MagnitudeSeries m;
    m.values = {1, 1, 20, 1, 1, 80, 1};
    const auto idx = detect_anchor(m, 10.0);
    REQUIRE(idx.has_value());
    CHECK(*idx == 2);
}

TEST_CASE("boundary samples can anchor") {
    MagnitudeSeries m;
    m.values = {50, 3, 2, 1};
    CHECK(detect_anchor(m, 10.0) == std::optional<std::size_t>{0});
    m.values = {1, 2, 3, 50};
    CHECK(detect_anchor(m, 10.0) == std::optional<std::size_t>{3});
    m.values = {42};
    CHECK(detect_anchor(m, 10.0) == std::optional<std::size_t>{0});
    CHECK(detect_anchor(m, 42.0) == std::nullopt);  // strictly above
}

TEST_CASE("rising edge below a later peak is skipped") {
    // 30 exceeds the threshold but its right neighbour is larger, so the
    // qualifying peak is the 40 at index 3.
    MagnitudeSeries m;
    m.values = {1, 30, 35, 40, 2};
    CHECK(detect_anchor(m, 10.0) == std::optional<std::size_t>{3});
}

TEST_CASE("window alignment slices from the anchor and flags truncation") {
    std::vector<double> x(1000), y(1000), z(1000);
    for (int i = 0; i < 1000; ++i) x[i] = i;
    const auto t = make_trace(std::move(x), std::move(y), std::move(z));

    const AnchorWindow full = align_window(t, 100, 2.0);
    CHECK(full.complete);
    CHECK(full.anchor_index == 100);
    REQUIRE(full.window.size() == 400);  // 2 s at 200 Hz
    CHECK(full.window.ax.front() == 100.0);
    CHECK(full.window.ax.back() == 499.0);
    CHECK(full.window.start_time == doctest::Approx(0.5));

    const AnchorWindow cut = align_window(t, 900, 2.0);
    CHECK_FALSE(cut.complete);
    CHECK(cut.window.size() == 100);

    CHECK_THROWS_AS(align_window(t, 1000, 2.0), AnchorOutOfRange);
}

TEST_CASE("file loader reports missing files as ParseError") {
    CHECK_THROWS_AS(load_trace_file("/nonexistent/definitely_missing.csv"), ParseError);
}
