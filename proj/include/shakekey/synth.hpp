#pragma once

#include <cstdint>
#include <iosfwd>

#include "shakekey/feature.hpp"
#include "shakekey/trace.hpp"

namespace shakekey {

/// Knobs for the synthetic handshake generator. The physical layout: a calm
/// hold, a sharp clasp spike (the alignment anchor), then amplitude-modulated
/// pumping at shake_freq_hz with small jolts at each reversal, a sub-Hz arm
/// sway, shared grip tremor, and a train of short transverse impact pulses
/// (grip-impact ringing perpendicular to the pumping axis). Everything after
/// the defaults block is a calibration knob for the shape of that motion.
struct SynthParams {
    double shake_freq_hz = 3.0;
    double duration_s = 2.6;
    double sample_rate = 200.0;
    double device_noise_sigma = 0.4;  // m/s^2, per axis, per device
    std::uint64_t orientation_seed_a = 1;
    std::uint64_t orientation_seed_b = 2;
    double adversary_lag_s = 0.15;
    double adversary_distortion = 0.2;  // amplitude/frequency jitter factor
    std::uint64_t rng_seed = 0;

    double base_amplitude = 12.0;  // m/s^2, fundamental pumping sinusoid
    double jerk_amplitude = 22.0;  // m/s^2, transverse impact pulses
    double jerk_width_s = 0.010;
    double jerk_spacing_s = 0.04;  // mean gap between impact pulses
    double spike_amplitude = 45.0;  // m/s^2, initial clasp
    double spike_width_s = 0.05;    // peak lands on a whole sample at 200 Hz
    double spike_time_s = 0.25;
    double drift_amplitude = 1.8;  // m/s^2, slow arm sway
    double drift_freq_hz = 0.55;
    double calm_tremor = 2.0;  // m/s^2, grip-coupled micro-motion
    double freq_jitter = 0.1;  // fractional spread of the fundamental per run
    double max_tilt = 1.0;     // cap on |vertical component| of the pumping axis;
                               // 1 = uniform over the sphere

    void validate() const;
};

struct HandshakePair {
    MotionTrace device_a;
    MotionTrace device_b;
    FeatureSeries latent;  // the shared 1-D motion before embedding
};

/// Both sides of one handshake: one latent 1-D signal embedded along a random
/// 3-D direction on top of gravity (plus the transverse impact train on a
/// perpendicular axis), then per-device random rotation plus white sensor
/// noise. Deterministic given the seeds in params.
HandshakePair gen_handshake_pair(const SynthParams& params);

/// A mimicking observer's trace: the latent delayed by adversary_lag_s and
/// smeared by a slow random time warp plus amplitude jitter, both scaled by
/// adversary_distortion, then re-embedded and noised like a real device.
MotionTrace gen_adversary_trace(const FeatureSeries& latent, const SynthParams& params);

/// Sidecar serialization so a generated dataset can be reproduced.
void write_params_json(std::ostream& out, const SynthParams& params);
SynthParams read_params_json(std::istream& in);

}  // namespace shakekey
