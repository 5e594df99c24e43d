#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shakekey/keygen.hpp"
#include "shakekey/synth.hpp"
#include "shakekey/trace.hpp"

namespace shakekey {

enum class Population : std::uint8_t { legitimate, adversarial };
enum class FeatureRoute : std::uint8_t { pca, magnitude };

std::string_view population_name(Population p) noexcept;
std::string_view feature_route_name(FeatureRoute r) noexcept;

/// One full pipeline run for a pair of traces. A trial that dies inside the
/// pipeline (no anchor, degenerate window, ...) is recorded as failed with
/// the error name; it still participates in sweeps as a rejection.
struct TrialRecord {
    std::uint64_t trial_id = 0;
    Population population = Population::legitimate;
    double k_factor = 0.75;
    double bit_rate_a = 0.0;
    double bit_rate_b = 0.0;
    double bit_agreement = 0.0;
    std::size_t shared_valid = 0;
    bool key_success = false;
    double coherence = 0.0;
    bool failed = false;
    std::string error;
};

struct AgreementResult {
    double rate = 0.0;
    std::size_t shared_valid = 0;  // 0 means the rate is vacuous
};

/// Fraction of positions valid in BOTH sequences where the bit values match.
/// With no mutually valid position the rate is 0 and shared_valid flags it.
AgreementResult bit_agreement_rate(const QuantizedBits& a, const QuantizedBits& b);

double key_success_rate(std::span<const TrialRecord> trials);

/// FAR/FRR over an ascending acceptance-threshold sweep. A trial is accepted
/// at threshold t iff both bit rates reach t and key assembly succeeded with
/// identical keys. EER is linearly interpolated at the FAR/FRR crossing; if
/// the curves never cross in range, the closest approach's midpoint is
/// reported.
struct ErrorCurve {
    std::vector<double> thresholds;
    std::vector<double> far;
    std::vector<double> frr;
    double eer = 0.0;
    double eer_threshold = 0.0;
};

ErrorCurve far_frr_sweep(std::span<const TrialRecord> legit,
                         std::span<const TrialRecord> adversarial,
                         std::vector<double> thresholds);

struct CdfPoint {
    double value = 0.0;
    double fraction = 0.0;
};

/// Empirical CDF: sorted values with cumulative fractions; tied values share
/// the fraction of the last duplicate.
std::vector<CdfPoint> coherence_cdf(std::vector<double> values);

struct TrialConfig {
    double k_factor = 0.75;
    std::size_t segment_len = 10;
    std::size_t min_valid_bits = 140;
    double window_duration_s = 2.0;
    FeatureRoute route = FeatureRoute::pca;
};

/// detect -> align -> feature -> quantize -> reconcile -> assemble for both
/// traces, plus the coherence of the two feature series. Never throws for
/// pipeline errors; see TrialRecord.
TrialRecord run_trial(std::uint64_t trial_id, Population population,
                      const MotionTrace& a, const MotionTrace& b,
                      const TrialConfig& cfg = {});

/// Seeded populations over the synthetic generator; trial i uses rng_seed
/// seed0 + i with per-trial device orientations.
std::vector<TrialRecord> run_population(Population population, const SynthParams& base,
                                        std::size_t count, std::uint64_t seed0,
                                        const TrialConfig& cfg = {});

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials);
void write_error_curve_json(std::ostream& out, const ErrorCurve& curve);
void write_cdf_csv(std::ostream& out, std::span<const CdfPoint> cdf);

}  // namespace shakekey
