#include "shakekey/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace shakekey {
namespace {

constexpr double kGravity = 9.81;
constexpr double kRampUp = 0.15;   // seconds from clasp to full pumping
constexpr double kWarpGain = 7.5;  // time-warp drift per unit distortion
constexpr double kAmpJitterGain = 0.5;
constexpr double kEchoDelay = 0.055;  // rebound jolt after each reversal jolt
constexpr double kEchoFactor = -0.6;
constexpr double kReversalJoltFrac = 0.6;  // reversal jolt relative to base
constexpr double kReversalJoltWidth = 0.04;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

// Uniform over the spherical band |z| <= max_tilt (area-uniform since z is
// the uniform coordinate on a sphere); max_tilt = 1 is the whole sphere.
Vec3 random_band_vector(std::mt19937_64& rng, double max_tilt) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double z = max_tilt * uni(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double theta = std::numbers::pi * (uni(rng) + 1.0);
    return Vec3{r * std::cos(theta), r * std::sin(theta), z};
}

// A unit vector perpendicular to d, at the given azimuth about it.
Vec3 unit_orthogonal(const Vec3& d, double azimuth) {
    const Vec3 e = std::abs(d[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    Vec3 u{e[1] * d[2] - e[2] * d[1], e[2] * d[0] - e[0] * d[2],
           e[0] * d[1] - e[1] * d[0]};
    const double un = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    for (auto& c : u) c /= un;
    const Vec3 v{d[1] * u[2] - d[2] * u[1], d[2] * u[0] - d[0] * u[2],
                 d[0] * u[1] - d[1] * u[0]};
    const double ca = std::cos(azimuth), sa = std::sin(azimuth);
    return Vec3{ca * u[0] + sa * v[0], ca * u[1] + sa * v[1], ca * u[2] + sa * v[2]};
}

// Shoemake's subgroup method: uniform over SO(3).
Mat3 random_rotation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
    const double two_pi = 2.0 * std::numbers::pi;
    const double x = std::sqrt(1.0 - u1) * std::sin(two_pi * u2);
    const double y = std::sqrt(1.0 - u1) * std::cos(two_pi * u2);
    const double z = std::sqrt(u1) * std::sin(two_pi * u3);
    const double w = std::sqrt(u1) * std::cos(two_pi * u3);
    return Mat3{
        Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
        Vec3{2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
        Vec3{2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)},
    };
}

struct ReversalPulse {
    double center;
    double amplitude;  // signed
};

// The shared 1-D motion: calm hold, clasp spike, modulated pumping with a
// jolt burst at every reversal, slow sway, grip tremor.
std::vector<double> gen_latent_series(const SynthParams& p, std::mt19937_64& rng) {
    const double dt = 1.0 / p.sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(p.duration_s * p.sample_rate));
    const double two_pi = 2.0 * std::numbers::pi;

    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double f0 = p.shake_freq_hz * (1.0 + p.freq_jitter * uni(rng));
    const double env_phase = two_pi * 0.5 * (uni(rng) + 1.0);
    const double drift_phase = two_pi * 0.5 * (uni(rng) + 1.0);
    const double start_phase = two_pi * 0.5 * (uni(rng) + 1.0);
    const double pulse_jitter_s = 0.008;

    // Slow wander of the instantaneous frequency, then one phase pass that
    // also schedules a jolt at each crossing of a sin() extremum.
    std::vector<double> phase(n);
    std::vector<ReversalPulse> pulses;
    double cur = start_phase;
    double wander = 0.0;
    double sign = (uni(rng) >= 0.0) ? 1.0 : -1.0;
    double next_extremum =
        (std::floor((cur - std::numbers::pi / 2.0) / std::numbers::pi) + 1.0) *
            std::numbers::pi +
        std::numbers::pi / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        phase[i] = cur;
        wander = 0.95 * wander + 0.05 * normal(rng);
        cur += two_pi * f0 * (1.0 + 0.04 * wander) * dt;
        while (cur >= next_extremum) {
            const double t_cross = i * dt;  // within dt of the true crossing
            if (t_cross > p.spike_time_s + p.spike_width_s) {
                const double amp = sign * kReversalJoltFrac * p.base_amplitude *
                                   (1.0 + 0.25 * uni(rng));
                pulses.push_back(ReversalPulse{t_cross + pulse_jitter_s * uni(rng), amp});
                pulses.push_back(ReversalPulse{
                    t_cross + kEchoDelay + pulse_jitter_s * uni(rng), kEchoFactor * amp});
            }
            sign = -sign;
            next_extremum += std::numbers::pi;
        }
    }

    std::vector<double> s(n, 0.0);
    double tremor_state = 0.0;
    const double tremor_alpha = 0.85;
    const double tremor_norm =
        std::sqrt((1.0 - tremor_alpha) / (1.0 + tremor_alpha));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = i * dt;
        const double ramp =
            std::clamp((t - p.spike_time_s) / kRampUp, 0.0, 1.0);
        const double env = ramp * (0.8 + 0.2 * std::sin(two_pi * 0.9 * t + env_phase));

        double v = p.base_amplitude * env * std::sin(phase[i]);
        v += p.drift_amplitude * ramp * std::sin(two_pi * p.drift_freq_hz * t + drift_phase);

        if (t >= p.spike_time_s && t <= p.spike_time_s + p.spike_width_s) {
            const double u = (t - p.spike_time_s) / p.spike_width_s;
            const double lobe = std::sin(std::numbers::pi * u);
            v += p.spike_amplitude * lobe * lobe;
        }

        tremor_state = tremor_alpha * tremor_state + (1.0 - tremor_alpha) * normal(rng);
        v += p.calm_tremor * (0.25 + 0.75 * ramp) * tremor_state / tremor_norm;

        s[i] = v;
    }

    // Each jolt is one tapered bipolar cycle: the impulsive grab and its
    // rebound, with near-zero net velocity change.
    for (const auto& pulse : pulses) {
        const double half = kReversalJoltWidth / 2.0;
        const auto lo = static_cast<std::ptrdiff_t>(std::ceil((pulse.center - half) / dt));
        const auto hi = static_cast<std::ptrdiff_t>(std::floor((pulse.center + half) / dt));
        for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0);
             i <= hi && i < static_cast<std::ptrdiff_t>(n); ++i) {
            const double u = std::clamp(
                (i * dt - (pulse.center - half)) / kReversalJoltWidth, 0.0, 1.0);
            const double wave =
                std::sin(2.0 * std::numbers::pi * u) * std::sin(std::numbers::pi * u);
            const double t = i * dt;
            const double ramp = std::clamp((t - p.spike_time_s) / kRampUp, 0.0, 1.0);
            s[static_cast<std::size_t>(i)] += ramp * pulse.amplitude * wave;
        }
    }
    return s;
}

// Short one-sided impact pulses at jittered spacing, the ringing a clasped
// pair of hands picks up transverse to the pumping axis. Gated by the same
// post-clasp ramp as the pumping itself.
std::vector<double> gen_jerk_train(const SynthParams& p, std::mt19937_64& rng) {
    const double dt = 1.0 / p.sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(p.duration_s * p.sample_rate));
    std::vector<double> j(n, 0.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    double center = p.spike_time_s + p.spike_width_s + p.jerk_spacing_s * u01(rng);
    while (center < p.duration_s) {
        const double sign = (u01(rng) < 0.5) ? -1.0 : 1.0;
        const double amp = sign * p.jerk_amplitude * (0.7 + 0.6 * u01(rng));
        const double half = p.jerk_width_s / 2.0;
        const auto lo = static_cast<std::ptrdiff_t>(std::ceil((center - half) / dt));
        const auto hi = static_cast<std::ptrdiff_t>(std::floor((center + half) / dt));
        for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0);
             i <= hi && i < static_cast<std::ptrdiff_t>(n); ++i) {
            const double u = std::clamp((i * dt - (center - half)) / p.jerk_width_s, 0.0, 1.0);
            const double lobe = std::sin(std::numbers::pi * u);
            const double ramp =
                std::clamp((i * dt - p.spike_time_s) / kRampUp, 0.0, 1.0);
            j[static_cast<std::size_t>(i)] += ramp * amp * lobe * lobe;
        }
        center += p.jerk_spacing_s * (0.7 + 0.6 * u01(rng));
    }
    return j;
}

MotionTrace embed(const std::vector<double>& s, const std::vector<double>& j,
                  double rate, const Vec3& dir, const Vec3& perp, const Mat3& rot,
                  double noise_sigma, std::mt19937_64& noise_rng) {
    MotionTrace trace;
    trace.sample_rate = rate;
    trace.start_time = 0.0;
    const std::size_t n = s.size();
    trace.ax.resize(n);
    trace.ay.resize(n);
    trace.az.resize(n);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 w{dir[0] * s[i] + perp[0] * j[i],
                     dir[1] * s[i] + perp[1] * j[i],
                     dir[2] * s[i] + perp[2] * j[i] + kGravity};
        for (int r = 0; r < 3; ++r) {
            double v = rot[r][0] * w[0] + rot[r][1] * w[1] + rot[r][2] * w[2];
            if (noise_sigma > 0.0) v += noise_sigma * normal(noise_rng);
            (r == 0 ? trace.ax : r == 1 ? trace.ay : trace.az)[i] = v;
        }
    }
    return trace;
}

double lerp_series(const std::vector<double>& s, double rate, double t) {
    const double pos = std::clamp(t * rate, 0.0, static_cast<double>(s.size() - 1));
    const auto i0 = static_cast<std::size_t>(pos);
    const std::size_t i1 = std::min(i0 + 1, s.size() - 1);
    const double frac = pos - static_cast<double>(i0);
    return s[i0] + frac * (s[i1] - s[i0]);
}

}  // namespace

void SynthParams::validate() const {
    if (sample_rate <= 0.0) throw std::invalid_argument("sample_rate must be positive");
    if (duration_s <= 0.0) throw std::invalid_argument("duration_s must be positive");
    if (shake_freq_hz <= 0.0) throw std::invalid_argument("shake_freq_hz must be positive");
    if (device_noise_sigma < 0.0)
        throw std::invalid_argument("device_noise_sigma must be non-negative");
    if (adversary_lag_s < 0.0) throw std::invalid_argument("adversary_lag_s must be non-negative");
    if (adversary_distortion < 0.0 || adversary_distortion > 1.0)
        throw std::invalid_argument("adversary_distortion must lie in [0, 1]");
    if (spike_width_s <= 0.0 || jerk_width_s <= 0.0 || jerk_spacing_s <= 0.0)
        throw std::invalid_argument(
            "spike_width_s, jerk_width_s and jerk_spacing_s must be positive");
    if (spike_time_s < 0.0 || spike_time_s + spike_width_s >= duration_s)
        throw std::invalid_argument("clasp spike must fall inside the trace");
    if (freq_jitter < 0.0 || freq_jitter >= 0.5)
        throw std::invalid_argument("freq_jitter must lie in [0, 0.5)");
    if (max_tilt <= 0.0 || max_tilt > 1.0)
        throw std::invalid_argument("max_tilt must lie in (0, 1]");
    if (base_amplitude < 0.0 || jerk_amplitude < 0.0 || spike_amplitude < 0.0 ||
        drift_amplitude < 0.0 || calm_tremor < 0.0)
        throw std::invalid_argument("amplitudes must be non-negative");
}

HandshakePair gen_handshake_pair(const SynthParams& params) {
    params.validate();

    std::mt19937_64 latent_rng(mix(params.rng_seed, 0x1A7E2717));
    std::vector<double> s = gen_latent_series(params, latent_rng);
    std::vector<double> jerk = gen_jerk_train(params, latent_rng);
    const Vec3 dir = random_band_vector(latent_rng, params.max_tilt);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const Vec3 perp = unit_orthogonal(dir, std::numbers::pi * uni(latent_rng));

    std::mt19937_64 rot_a(mix(0x0813A110, params.orientation_seed_a));
    std::mt19937_64 rot_b(mix(0x0813A110, params.orientation_seed_b));
    std::mt19937_64 noise_a(mix(params.rng_seed, 0xA0A0A0A0));
    std::mt19937_64 noise_b(mix(params.rng_seed, 0xB0B0B0B0));

    HandshakePair pair;
    pair.device_a = embed(s, jerk, params.sample_rate, dir, perp,
                          random_rotation(rot_a), params.device_noise_sigma, noise_a);
    pair.device_b = embed(s, jerk, params.sample_rate, dir, perp,
                          random_rotation(rot_b), params.device_noise_sigma, noise_b);
    pair.latent.sample_rate = params.sample_rate;
    pair.latent.values = std::move(s);
    pair.latent.sign_convention_applied = false;
    return pair;
}

MotionTrace gen_adversary_trace(const FeatureSeries& latent, const SynthParams& params) {
    params.validate();
    if (latent.values.empty()) throw std::invalid_argument("latent series is empty");

    const std::size_t n = latent.values.size();
    const double dt = 1.0 / latent.sample_rate;
    std::mt19937_64 adv_rng(mix(params.rng_seed, 0xAD5E7A17));
    std::normal_distribution<double> normal(0.0, 1.0);

    // Smooth random time warp: low-passed steps integrated into a drift, so
    // the mimic's tempo error accumulates over the handshake. A separate slow
    // multiplicative jitter models imperfect amplitude copying.
    std::vector<double> mimic(n);
    double warp_step = 0.0, warp = 0.0, amp_state = 0.0;
    const double amp_alpha = 0.97;
    const double amp_norm = std::sqrt((1.0 - amp_alpha) / (1.0 + amp_alpha));
    for (std::size_t i = 0; i < n; ++i) {
        warp_step = 0.9 * warp_step + 0.1 * normal(adv_rng);
        warp += kWarpGain * params.adversary_distortion * warp_step * dt;
        amp_state = amp_alpha * amp_state + (1.0 - amp_alpha) * normal(adv_rng);
        const double gain =
            1.0 + kAmpJitterGain * params.adversary_distortion * amp_state / amp_norm;
        const double t = i * dt - params.adversary_lag_s + warp;
        mimic[i] = gain * lerp_series(latent.values, latent.sample_rate, t);
    }

    // The mimic's arm produces its own (uncorrelated) impact ringing.
    SynthParams q = params;
    q.sample_rate = latent.sample_rate;
    q.duration_s = static_cast<double>(n) / latent.sample_rate;
    std::vector<double> jerk = gen_jerk_train(q, adv_rng);

    const Vec3 dir = random_band_vector(adv_rng, params.max_tilt);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const Vec3 perp = unit_orthogonal(dir, std::numbers::pi * uni(adv_rng));
    std::mt19937_64 rot_rng(mix(params.rng_seed, 0xAD50B017));
    std::mt19937_64 noise_rng(mix(params.rng_seed, 0xAD0015E0));
    return embed(mimic, jerk, latent.sample_rate, dir, perp, random_rotation(rot_rng),
                 params.device_noise_sigma, noise_rng);
}

void write_params_json(std::ostream& out, const SynthParams& p) {
    nlohmann::json j{{"shake_freq_hz", p.shake_freq_hz},
                     {"duration_s", p.duration_s},
                     {"sample_rate", p.sample_rate},
                     {"device_noise_sigma", p.device_noise_sigma},
                     {"orientation_seed_a", p.orientation_seed_a},
                     {"orientation_seed_b", p.orientation_seed_b},
                     {"adversary_lag_s", p.adversary_lag_s},
                     {"adversary_distortion", p.adversary_distortion},
                     {"rng_seed", p.rng_seed},
                     {"base_amplitude", p.base_amplitude},
                     {"jerk_amplitude", p.jerk_amplitude},
                     {"jerk_width_s", p.jerk_width_s},
                     {"jerk_spacing_s", p.jerk_spacing_s},
                     {"spike_amplitude", p.spike_amplitude},
                     {"spike_width_s", p.spike_width_s},
                     {"spike_time_s", p.spike_time_s},
                     {"drift_amplitude", p.drift_amplitude},
                     {"drift_freq_hz", p.drift_freq_hz},
                     {"calm_tremor", p.calm_tremor},
                     {"freq_jitter", p.freq_jitter},
                     {"max_tilt", p.max_tilt}};
    out << j.dump(2) << '\n';
}

SynthParams read_params_json(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in);
    SynthParams p;
    p.shake_freq_hz = j.value("shake_freq_hz", p.shake_freq_hz);
    p.duration_s = j.value("duration_s", p.duration_s);
    p.sample_rate = j.value("sample_rate", p.sample_rate);
    p.device_noise_sigma = j.value("device_noise_sigma", p.device_noise_sigma);
    p.orientation_seed_a = j.value("orientation_seed_a", p.orientation_seed_a);
    p.orientation_seed_b = j.value("orientation_seed_b", p.orientation_seed_b);
    p.adversary_lag_s = j.value("adversary_lag_s", p.adversary_lag_s);
    p.adversary_distortion = j.value("adversary_distortion", p.adversary_distortion);
    p.rng_seed = j.value("rng_seed", p.rng_seed);
    p.base_amplitude = j.value("base_amplitude", p.base_amplitude);
    p.jerk_amplitude = j.value("jerk_amplitude", p.jerk_amplitude);
    p.jerk_width_s = j.value("jerk_width_s", p.jerk_width_s);
    p.jerk_spacing_s = j.value("jerk_spacing_s", p.jerk_spacing_s);
    p.spike_amplitude = j.value("spike_amplitude", p.spike_amplitude);
    p.spike_width_s = j.value("spike_width_s", p.spike_width_s);
    p.spike_time_s = j.value("spike_time_s", p.spike_time_s);
    p.drift_amplitude = j.value("drift_amplitude", p.drift_amplitude);
    p.drift_freq_hz = j.value("drift_freq_hz", p.drift_freq_hz);
    p.calm_tremor = j.value("calm_tremor", p.calm_tremor);
    p.freq_jitter = j.value("freq_jitter", p.freq_jitter);
    p.max_tilt = j.value("max_tilt", p.max_tilt);
    p.validate();
    return p;
}

}  // namespace shakekey
