// Acceptance gate for the whole toolkit. Each criterion prints exactly one
// PASS/FAIL line with its runtime; the exit code is the number of failures.
// Bounds live in the `limits` namespace so a reviewer can see every number
// the gate depends on in one place.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "shakekey/crypto.hpp"
#include "shakekey/eval.hpp"
#include "shakekey/feature.hpp"
#include "shakekey/keygen.hpp"
#include "shakekey/protocol.hpp"
#include "shakekey/synth.hpp"
#include "shakekey/trace.hpp"

using namespace shakekey;
using Clock = std::chrono::steady_clock;

namespace limits {

constexpr double c1_runtime_ms = 1.0;
constexpr double c2_runtime_s = 5.0;
constexpr double c3_runtime_s = 10.0;
constexpr double c3_eigen_residual_rel = 1e-8;
constexpr double c3_rotation_rel = 1e-7;
constexpr double c3_min_gap_rel = 1e-6;
constexpr double c4_runtime_s = 30.0;
constexpr double c4_key_success_min = 0.95;
constexpr double c4_mean_agreement_min = 0.97;
constexpr double c5_runtime_s = 60.0;
constexpr double c5_route_ratio_min = 1.5;
constexpr double c6_runtime_s = 60.0;
constexpr double c6_legit_coherence = 0.9;
constexpr double c6_adv_coherence = 0.8;
constexpr int c6_required_of_100 = 95;
constexpr double c7_runtime_s = 10.0;
constexpr std::size_t c7_max_messages = 4;
constexpr double c9_runtime_ms = 50.0;

}  // namespace limits

namespace {

struct Checker {
    std::vector<std::string> failures;
    std::string note;

    void require(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

QuantizedBits bits_from_pattern(const std::string& pattern) {
    QuantizedBits b;
    b.duration_s = static_cast<double>(pattern.size()) / 200.0;
    for (char c : pattern)
        b.states.push_back(c == '1' ? BitState::one
                                    : c == '0' ? BitState::zero : BitState::invalid);
    return b;
}

// ---- criterion 1: the reconciliation example, exact -------------------------

void criterion_reconciliation_example(Checker& c) {
    const QuantizedBits alice = bits_from_pattern("1x0xx11x00");
    const QuantizedBits bob = bits_from_pattern("1x00x11xx0");
    const PositionVector pv_a = position_vector(alice);
    const PositionVector pv_b = position_vector(bob);

    std::vector<std::uint32_t> both;
    std::set_intersection(pv_a.positions.begin(), pv_a.positions.end(),
                          pv_b.positions.begin(), pv_b.positions.end(),
                          std::back_inserter(both));
    c.require(both == std::vector<std::uint32_t>{1, 3, 6, 7, 10},
              "agreed positions are not {1,3,6,7,10}");

    const auto key_a = reconcile(alice, pv_a, pv_b);
    const auto key_b = reconcile(bob, pv_b, pv_a);
    c.require(key_a == std::vector<std::uint8_t>{1, 0, 1, 1, 0},
              "device A key bits are not [10110]");
    c.require(key_b == key_a, "device B disagrees with device A");
}

// ---- criterion 2: quantizer vs an independent oracle ------------------------

void criterion_quantizer_oracle(Checker& c) {
    // 1000 segments of exactly segment_len samples; thresholds recomputed
    // here from scratch in long double, compared sample by sample.
    constexpr std::size_t kSegments = 1000;
    constexpr std::size_t kSegLen = 10;
    std::mt19937_64 rng(0xC2C2);
    std::normal_distribution<double> normal(0.0, 3.0);

    FeatureSeries feature;
    feature.sample_rate = 200.0;
    feature.values.resize(kSegments * kSegLen);
    for (double& v : feature.values) v = normal(rng);

    std::size_t mismatches = 0;
    for (int ki = 1; ki <= 10; ++ki) {
        const double k = ki / 10.0;
        const QuantizedBits got = quantize(feature, k, kSegLen);
        for (std::size_t s = 0; s < kSegments; ++s) {
            const double* seg = feature.values.data() + s * kSegLen;
            long double mu = 0;
            for (std::size_t i = 0; i < kSegLen; ++i) mu += seg[i];
            mu /= kSegLen;
            long double var = 0;
            for (std::size_t i = 0; i < kSegLen; ++i) var += (seg[i] - mu) * (seg[i] - mu);
            const long double sigma = sqrtl(var / kSegLen);
            const long double hi = mu + k * sigma;
            const long double lo = mu - k * sigma;
            for (std::size_t i = 0; i < kSegLen; ++i) {
                const BitState want = seg[i] > hi ? BitState::one
                                      : seg[i] < lo ? BitState::zero : BitState::invalid;
                if (got.states[s * kSegLen + i] != want) ++mismatches;
            }
        }
    }
    c.require(mismatches == 0,
              std::to_string(mismatches) + " samples differ from the oracle");
}

// ---- criterion 3: principal axes on random windows --------------------------

void criterion_principal_axes(Checker& c) {
    std::mt19937_64 rng(0xC3C3);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::size_t rotation_checked = 0;
    double worst_residual = 0, worst_rotation = 0;

    for (int trial = 0; trial < 500; ++trial) {
        MotionTrace t;
        const double sx = 0.5 + 4.0 * uni(rng);
        const double sy = 0.5 + 4.0 * uni(rng);
        const double sz = 0.5 + 4.0 * uni(rng);
        for (int i = 0; i < 200; ++i) {
            t.ax.push_back(sx * normal(rng));
            t.ay.push_back(sy * normal(rng));
            t.az.push_back(sz * normal(rng));
        }

        const PcaDecomposition pca = principal_axes(t);

        // scatter of the centered window, recomputed here in long double
        long double mean[3] = {0, 0, 0};
        for (int i = 0; i < 200; ++i) {
            mean[0] += t.ax[i];
            mean[1] += t.ay[i];
            mean[2] += t.az[i];
        }
        for (auto& m : mean) m /= 200.0L;
        long double s[3][3] = {};
        for (int i = 0; i < 200; ++i) {
            const long double v[3] = {t.ax[i] - mean[0], t.ay[i] - mean[1],
                                      t.az[i] - mean[2]};
            for (int r = 0; r < 3; ++r)
                for (int q = 0; q < 3; ++q) s[r][q] += v[r] * v[q];
        }

        for (int k = 0; k < 3; ++k) {
            long double resid2 = 0;
            for (int r = 0; r < 3; ++r) {
                long double su = 0;
                for (int q = 0; q < 3; ++q) su += s[r][q] * pca.eigenvectors[k][q];
                const long double d = su - (long double)pca.eigenvalues[k] *
                                               pca.eigenvectors[k][r];
                resid2 += d * d;
            }
            const double rel = std::sqrt((double)resid2) / std::max(pca.eigenvalues[0], 1.0);
            worst_residual = std::max(worst_residual, rel);
        }
        c.require(pca.eigenvalues[0] >= pca.eigenvalues[1] &&
                      pca.eigenvalues[1] >= pca.eigenvalues[2] &&
                      pca.eigenvalues[2] >= 0.0,
                  "eigenvalues out of order at trial " + std::to_string(trial));

        // first-component dominance over the other recovered axes
        c.require(pca.eigenvalues[0] + 1e-9 >= pca.eigenvalues[1] &&
                      pca.eigenvalues[0] + 1e-9 >= pca.eigenvalues[2],
                  "first component does not dominate at trial " + std::to_string(trial));

        const double gap =
            (pca.eigenvalues[0] - pca.eigenvalues[1]) / std::max(pca.eigenvalues[0], 1e-30);
        if (gap <= limits::c3_min_gap_rel) continue;
        ++rotation_checked;

        // random rotation from a uniform quaternion
        const double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
        const double tp = 2.0 * std::numbers::pi;
        const double qx = std::sqrt(1 - u1) * std::sin(tp * u2);
        const double qy = std::sqrt(1 - u1) * std::cos(tp * u2);
        const double qz = std::sqrt(u1) * std::sin(tp * u3);
        const double qw = std::sqrt(u1) * std::cos(tp * u3);
        const double rot[3][3] = {
            {1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw)},
            {2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw)},
            {2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)}};
        MotionTrace rt = t;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double v[3] = {t.ax[i], t.ay[i], t.az[i]};
            rt.ax[i] = rot[0][0] * v[0] + rot[0][1] * v[1] + rot[0][2] * v[2];
            rt.ay[i] = rot[1][0] * v[0] + rot[1][1] * v[1] + rot[1][2] * v[2];
            rt.az[i] = rot[2][0] * v[0] + rot[2][1] * v[1] + rot[2][2] * v[2];
        }
        const FeatureSeries base = project_first_pc(t);
        const FeatureSeries rotated = project_first_pc(rt);
        double scale = 0;
        for (double v : base.values) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < base.values.size(); ++i)
            worst_rotation = std::max(
                worst_rotation, std::abs(base.values[i] - rotated.values[i]) / scale);
    }

    c.require(worst_residual < limits::c3_eigen_residual_rel,
              "eigen residual " + fmt(worst_residual) + " over " +
                  fmt(limits::c3_eigen_residual_rel));
    c.require(worst_rotation < limits::c3_rotation_rel,
              "rotation deviation " + fmt(worst_rotation) + " over " +
                  fmt(limits::c3_rotation_rel));
    c.require(rotation_checked > 0, "no window had a usable eigenvalue gap");
    c.note = "residual " + fmt(worst_residual) + ", rotation dev " + fmt(worst_rotation) +
             " over " + std::to_string(rotation_checked) + " windows";
}

// ---- criterion 4: end-to-end agreement on 200 seeded pairs ------------------

void criterion_agreement_rate(Checker& c) {
    const SynthParams base;  // 200 Hz, 2 s window downstream, defaults throughout
    const TrialConfig cfg;   // K = 0.75
    const auto trials = run_population(Population::legitimate, base, 200, 0, cfg);

    const double success = key_success_rate(trials);
    double agreement = 0;
    std::size_t failed = 0;
    for (const auto& t : trials) {
        agreement += t.bit_agreement;
        if (t.failed) ++failed;
    }
    agreement /= static_cast<double>(trials.size());

    c.require(success >= limits::c4_key_success_min,
              "key success " + fmt(success) + " under " + fmt(limits::c4_key_success_min));
    c.require(agreement >= limits::c4_mean_agreement_min,
              "mean agreement " + fmt(agreement) + " under " +
                  fmt(limits::c4_mean_agreement_min));
    c.require(failed == 0, std::to_string(failed) + " trials failed in the pipeline");
    c.note = "key success " + fmt(success) + ", mean agreement " + fmt(agreement);
}

// ---- criterion 5: bit rate vs K, and the two feature routes -----------------

void criterion_bitrate_trend(Checker& c) {
    const SynthParams base;
    const std::vector<double> ks = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

    auto mean_rate = [&](double k, FeatureRoute route) {
        TrialConfig cfg;
        cfg.k_factor = k;
        cfg.route = route;
        const auto trials = run_population(Population::legitimate, base, 100, 0, cfg);
        double sum = 0;
        for (const auto& t : trials) sum += (t.bit_rate_a + t.bit_rate_b) / 2.0;
        return sum / static_cast<double>(trials.size());
    };

    std::vector<double> rates;
    for (double k : ks) rates.push_back(mean_rate(k, FeatureRoute::pca));
    for (std::size_t i = 1; i < rates.size(); ++i)
        c.require(rates[i] <= rates[i - 1] + 1e-9,
                  "rate rose from K=" + fmt(ks[i - 1]) + " (" + fmt(rates[i - 1]) +
                      ") to K=" + fmt(ks[i]) + " (" + fmt(rates[i]) + ")");

    const double pca_07 = rates[4];
    const double mag_07 = mean_rate(0.7, FeatureRoute::magnitude);
    const double ratio = pca_07 / mag_07;
    c.require(ratio >= limits::c5_route_ratio_min,
              "route ratio " + fmt(ratio) + " under " + fmt(limits::c5_route_ratio_min));
    c.note = "rates " + fmt(rates.front()) + ".." + fmt(rates.back()) +
             " bits/s, route ratio " + fmt(ratio) + " at K=0.7";
}

// ---- criterion 6: coherence separation and the error curves -----------------

void criterion_adversary_separation(Checker& c) {
    const SynthParams base;
    const TrialConfig cfg;
    const auto legit = run_population(Population::legitimate, base, 100, 0, cfg);
    const auto adv = run_population(Population::adversarial, base, 100, 100, cfg);

    int legit_high = 0, adv_low = 0;
    std::vector<double> lc, ac;
    for (const auto& t : legit) {
        lc.push_back(t.coherence);
        if (t.coherence > limits::c6_legit_coherence) ++legit_high;
    }
    for (const auto& t : adv) {
        ac.push_back(t.coherence);
        if (t.coherence < limits::c6_adv_coherence) ++adv_low;
    }
    c.require(legit_high >= limits::c6_required_of_100,
              "only " + std::to_string(legit_high) + "/100 legitimate runs over " +
                  fmt(limits::c6_legit_coherence));
    c.require(adv_low >= limits::c6_required_of_100,
              "only " + std::to_string(adv_low) + "/100 adversarial runs under " +
                  fmt(limits::c6_adv_coherence));

    // stochastic dominance: at every observed value the legitimate CDF sits
    // at or below the adversarial one
    std::vector<double> merged = lc;
    merged.insert(merged.end(), ac.begin(), ac.end());
    std::sort(merged.begin(), merged.end());
    auto cdf_at = [](const std::vector<double>& xs, double v) {
        double n = 0;
        for (double x : xs)
            if (x <= v) ++n;
        return n / static_cast<double>(xs.size());
    };
    bool dominated = true;
    for (double v : merged)
        if (cdf_at(lc, v) > cdf_at(ac, v) + 1e-12) dominated = false;
    c.require(dominated, "legitimate coherence CDF fails to dominate");

    std::vector<double> grid;
    for (double t = 20.0; t <= 120.0; t += 5.0) grid.push_back(t);
    const ErrorCurve curve = far_frr_sweep(legit, adv, grid);
    for (std::size_t i = 1; i < curve.far.size(); ++i) {
        c.require(curve.far[i] <= curve.far[i - 1], "FAR is not non-increasing");
        c.require(curve.frr[i] >= curve.frr[i - 1], "FRR is not non-decreasing");
    }
    c.require(std::isfinite(curve.eer) && curve.eer >= 0.0 && curve.eer <= 1.0,
              "EER is not a finite rate");
    c.require(std::isfinite(curve.eer_threshold), "EER threshold is not finite");
    c.note = std::to_string(legit_high) + "/100 legit, " + std::to_string(adv_low) +
             "/100 adversarial, eer " + fmt(curve.eer) + " at " +
             fmt(curve.eer_threshold) + " bits/s";
}

// ---- criterion 7: protocol routing, eavesdropping, message count ------------

QuantizedBits random_bits(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    QuantizedBits b;
    b.duration_s = 2.0;
    for (int i = 0; i < 400; ++i) {
        switch (rng() % 3) {
            case 0: b.states.push_back(BitState::zero); break;
            case 1: b.states.push_back(BitState::one); break;
            default: b.states.push_back(BitState::invalid); break;
        }
    }
    return b;
}

void criterion_protocol(Checker& c) {
    std::size_t correct_runs = 0;
    std::size_t data_seen = 0, data_opened = 0;
    bool pair_fast = true;

    for (std::uint64_t run = 0; run < 100; ++run) {
        // two pairs sharing one channel, partners holding identical bits
        const QuantizedBits x = random_bits(10000 + 2 * run);
        const QuantizedBits y = random_bits(10001 + 2 * run);
        std::vector<DeviceSession> devices;
        devices.emplace_back("A1", x);
        devices.emplace_back("B1", y);
        devices.emplace_back("A2", x);
        devices.emplace_back("B2", y);

        SimChannel channel(ChannelConfig{.drop_probability = 0.0, .seed = run});
        channel.add_tap("sniffer");
        std::mt19937_64 rng(run * 0x9e3779b9ULL + 1);
        const auto outcomes = run_session(devices, channel, rng);

        const bool ok = outcomes[0].state == SessionState::confirmed &&
                        outcomes[1].state == SessionState::confirmed &&
                        outcomes[2].state == SessionState::confirmed &&
                        outcomes[3].state == SessionState::confirmed &&
                        outcomes[0].peer == "A2" && outcomes[2].peer == "A1" &&
                        outcomes[1].peer == "B2" && outcomes[3].peer == "B1";
        if (ok) ++correct_runs;

        if (ok) {
            exchange_data(devices[0], to_bytes("session-payload"), channel, rng);
            pump(channel, devices, rng);
        }
        const auto attempt =
            attempt_eavesdrop(channel.tap_capture("sniffer"), random_bits(777000 + run));
        data_seen += attempt.data_frames_seen;
        data_opened += attempt.data_frames_opened;

        // the same bits pairing two devices alone on a quiet channel
        std::vector<DeviceSession> pair;
        pair.emplace_back("P1", x);
        pair.emplace_back("P2", x);
        SimChannel quiet(ChannelConfig{.drop_probability = 0.0, .seed = run + 50000});
        const auto pouts = run_session(pair, quiet, rng);
        for (const auto& o : pouts) {
            if (o.state != SessionState::confirmed ||
                o.messages_sent > limits::c7_max_messages)
                pair_fast = false;
        }
    }

    c.require(correct_runs == 100,
              std::to_string(correct_runs) + "/100 runs confirmed the right peers");
    c.require(data_seen == 100,
              "expected 100 captured data frames, saw " + std::to_string(data_seen));
    c.require(data_opened == 0,
              std::to_string(data_opened) + " data frames opened by the eavesdropper");
    c.require(pair_fast, "an isolated pair needed more than " +
                             std::to_string(limits::c7_max_messages) +
                             " messages to confirm");
    c.note = std::to_string(correct_runs) + "/100 correct, " +
             std::to_string(data_opened) + "/" + std::to_string(data_seen) +
             " data frames opened";
}

// ---- criterion 8: the quota boundary ----------------------------------------

void criterion_key_boundary(Checker& c) {
    std::mt19937_64 rng(0xC8C8);
    std::vector<std::uint8_t> bits(139);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);

    bool threw = false;
    try {
        assemble_key(bits, 140);
    } catch (const InsufficientBits&) {
        threw = true;
    }
    c.require(threw, "139 bits did not raise InsufficientBits");

    bits.push_back(1);  // now exactly 140
    const SymmetricKey key = assemble_key(bits, 140);
    std::array<std::uint8_t, 16> expect{};
    for (std::size_t i = 0; i < 128; ++i)
        if (bits[i]) expect[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    c.require(key.bytes == expect, "key bytes are not the first 128 bits, MSB first");
    c.require(key.source_valid_count == 140, "source bit count not recorded");

    // the tail beyond 128 must not leak into the key
    auto flipped = bits;
    for (std::size_t i = 128; i < 140; ++i) flipped[i] ^= 1;
    c.require(assemble_key(flipped, 140).bytes == key.bytes,
              "bits past 128 changed the key");
}

// ---- criterion 9: single-session latency ------------------------------------

void criterion_latency(Checker& c) {
    SynthParams p;
    p.rng_seed = 900;
    const HandshakePair pair = gen_handshake_pair(p);

    auto session_key = [](const MotionTrace& ta, const MotionTrace& tb) {
        auto device_bits = [](const MotionTrace& t) {
            const MagnitudeSeries mag = squared_magnitude(t);
            const auto anchor = detect_anchor(mag, default_peak_threshold(mag));
            const MotionTrace win = align_window(t, *anchor, 2.0).window;
            return quantize(project_first_pc(win), 0.75, 10);
        };
        const QuantizedBits qa = device_bits(ta);
        const QuantizedBits qb = device_bits(tb);
        const PositionVector pa = position_vector(qa);
        const PositionVector pb = position_vector(qb);
        return assemble_key(reconcile(qa, pa, pb), 140);
    };

    session_key(pair.device_a, pair.device_b);  // warm caches

    std::vector<double> ms;
    for (int rep = 0; rep < 15; ++rep) {
        const auto t0 = Clock::now();
        const SymmetricKey key = session_key(pair.device_a, pair.device_b);
        const auto t1 = Clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        c.require(key.source_valid_count >= 140, "session produced no key");
    }
    std::sort(ms.begin(), ms.end());
    const double median = ms[ms.size() / 2];
    c.require(median < limits::c9_runtime_ms,
              "median " + fmt(median) + " ms over " + fmt(limits::c9_runtime_ms) + " ms");
    c.note = "median " + fmt(median) + " ms per session";
}

// ---- harness ----------------------------------------------------------------

struct Criterion {
    int number;
    const char* name;
    void (*fn)(Checker&);
    double limit_s;  // wall-clock budget, checked like any other requirement
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "reconciliation worked example", criterion_reconciliation_example,
         limits::c1_runtime_ms / 1000.0},
        {2, "quantizer equals independent oracle", criterion_quantizer_oracle,
         limits::c2_runtime_s},
        {3, "principal axes correctness", criterion_principal_axes, limits::c3_runtime_s},
        {4, "end-to-end key agreement", criterion_agreement_rate, limits::c4_runtime_s},
        {5, "bit rate trend and feature routes", criterion_bitrate_trend,
         limits::c5_runtime_s},
        {6, "adversary coherence separation", criterion_adversary_separation,
         limits::c6_runtime_s},
        {7, "protocol routing and eavesdropping", criterion_protocol, limits::c7_runtime_s},
        {8, "key assembly boundary", criterion_key_boundary, limits::c2_runtime_s},
        {9, "single-session latency", criterion_latency, limits::c2_runtime_s},
    };

    int failures = 0;
    for (const auto& crit : criteria) {
        Checker checker;
        const auto t0 = Clock::now();
        try {
            crit.fn(checker);
        } catch (const std::exception& e) {
            checker.failures.push_back(std::string("threw: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(Clock::now() - t0).count();
        if (elapsed > crit.limit_s)
            checker.failures.push_back("runtime " + fmt(elapsed) + " s over budget " +
                                       fmt(crit.limit_s) + " s");

        std::string line = checker.failures.empty() ? "PASS" : "FAIL";
        line += " criterion " + std::to_string(crit.number) + ": " + crit.name + " [" +
                fmt(elapsed * 1000.0) + " ms]";
        if (!checker.note.empty()) line += " - " + checker.note;
        for (const auto& f : checker.failures) line += " | " + f;
        std::puts(line.c_str());
        if (!checker.failures.empty()) ++failures;
    }

    if (failures == 0)
        std::puts("all 9 criteria passed");
    else
        std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
