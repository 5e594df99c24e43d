#include "shakekey/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "shakekey/errors.hpp"
#include "shakekey/feature.hpp"

namespace shakekey {
namespace {

FeatureSeries magnitude_feature(const MotionTrace& window) {
    MagnitudeSeries mag = squared_magnitude(window);
    FeatureSeries f;
    f.sample_rate = mag.sample_rate;
    f.values = std::move(mag.values);
    f.sign_convention_applied = false;
    return f;
}

bool accepted(const TrialRecord& rec, double threshold) {
    return !rec.failed && rec.key_success &&
           std::min(rec.bit_rate_a, rec.bit_rate_b) >= threshold;
}

}  // namespace

std::string_view population_name(Population p) noexcept {
    return p == Population::legitimate ? "LEGITIMATE" : "ADVERSARIAL";
}

std::string_view feature_route_name(FeatureRoute r) noexcept {
    return r == FeatureRoute::pca ? "pca" : "magnitude";
}

AgreementResult bit_agreement_rate(const QuantizedBits& a, const QuantizedBits& b) {
    if (a.states.size() != b.states.size()) {
        throw LengthMismatch("bit agreement needs equal-length sequences");
    }
    AgreementResult r;
    std::size_t matches = 0;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        if (a.states[i] == BitState::invalid || b.states[i] == BitState::invalid) continue;
        ++r.shared_valid;
        if (a.states[i] == b.states[i]) ++matches;
    }
    r.rate = r.shared_valid == 0
                 ? 0.0
                 : static_cast<double>(matches) / static_cast<double>(r.shared_valid);
    return r;
}

double key_success_rate(std::span<const TrialRecord> trials) {
    if (trials.empty()) throw EmptyPopulation("key_success_rate over an empty population");
    std::size_t ok = 0;
    for (const auto& t : trials) {
        if (t.key_success) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(trials.size());
}

ErrorCurve far_frr_sweep(std::span<const TrialRecord> legit,
                         std::span<const TrialRecord> adversarial,
                         std::vector<double> thresholds) {
    if (legit.empty() || adversarial.empty()) {
        throw EmptyPopulation("far_frr_sweep needs both populations non-empty");
    }
    if (thresholds.empty()) throw std::invalid_argument("threshold sweep is empty");
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
        if (thresholds[i] <= thresholds[i - 1]) {
            throw std::invalid_argument("thresholds must be strictly ascending");
        }
    }

    ErrorCurve curve;
    curve.thresholds = std::move(thresholds);
    curve.far.reserve(curve.thresholds.size());
    curve.frr.reserve(curve.thresholds.size());
    for (double t : curve.thresholds) {
        std::size_t fa = 0, fr = 0;
        for (const auto& rec : adversarial) {
            if (accepted(rec, t)) ++fa;
        }
        for (const auto& rec : legit) {
            if (!accepted(rec, t)) ++fr;
        }
        curve.far.push_back(static_cast<double>(fa) / static_cast<double>(adversarial.size()));
        curve.frr.push_back(static_cast<double>(fr) / static_cast<double>(legit.size()));
    }

    const std::size_t n = curve.thresholds.size();
    bool found = false;
    for (std::size_t i = 0; i < n && !found; ++i) {
        if (curve.far[i] == curve.frr[i]) {
            curve.eer = curve.far[i];
            curve.eer_threshold = curve.thresholds[i];
            found = true;
        }
    }
    for (std::size_t i = 0; i + 1 < n && !found; ++i) {
        const double d0 = curve.far[i] - curve.frr[i];
        const double d1 = curve.far[i + 1] - curve.frr[i + 1];
        if ((d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0)) {
            const double lambda = d0 / (d0 - d1);
            curve.eer = curve.far[i] + lambda * (curve.far[i + 1] - curve.far[i]);
            curve.eer_threshold =
                curve.thresholds[i] + lambda * (curve.thresholds[i + 1] - curve.thresholds[i]);
            found = true;
        }
    }
    if (!found) {
        // No crossing inside the swept range: report the closest approach.
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(curve.far[i] - curve.frr[i]) <
                std::abs(curve.far[best] - curve.frr[best])) {
                best = i;
            }
        }
        curve.eer = (curve.far[best] + curve.frr[best]) / 2.0;
        curve.eer_threshold = curve.thresholds[best];
    }
    return curve;
}

std::vector<CdfPoint> coherence_cdf(std::vector<double> values) {
    if (values.empty()) throw EmptyPopulation("coherence_cdf over an empty sample");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    std::vector<CdfPoint> cdf(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::size_t last = i;
        while (last + 1 < values.size() && values[last + 1] == values[i]) ++last;
        for (std::size_t j = i; j <= last; ++j) {
            cdf[j] = CdfPoint{values[i], static_cast<double>(last + 1) / n};
        }
        i = last;
    }
    return cdf;
}

TrialRecord run_trial(std::uint64_t trial_id, Population population, const MotionTrace& a,
                      const MotionTrace& b, const TrialConfig& cfg) {
    TrialRecord rec;
    rec.trial_id = trial_id;
    rec.population = population;
    rec.k_factor = cfg.k_factor;
    try {
        FeatureSeries features[2];
        const MotionTrace* traces[2] = {&a, &b};
        for (int i = 0; i < 2; ++i) {
            MagnitudeSeries mag = squared_magnitude(*traces[i]);
            const double threshold = default_peak_threshold(mag);
            const auto anchor = detect_anchor(mag, threshold);
            if (!anchor) {
                rec.failed = true;
                rec.error = "NoAnchor";
                return rec;
            }
            AnchorWindow aw = align_window(*traces[i], *anchor, cfg.window_duration_s);
            features[i] = cfg.route == FeatureRoute::pca ? project_first_pc(aw.window)
                                                         : magnitude_feature(aw.window);
        }

        const std::size_t common = std::min(features[0].values.size(), features[1].values.size());
        for (auto& f : features) f.values.resize(common);

        rec.coherence = coherence(features[0], features[1]);

        QuantizedBits qa = quantize(features[0], cfg.k_factor, cfg.segment_len);
        QuantizedBits qb = quantize(features[1], cfg.k_factor, cfg.segment_len);
        rec.bit_rate_a = bit_rate(qa);
        rec.bit_rate_b = bit_rate(qb);

        AgreementResult agreement = bit_agreement_rate(qa, qb);
        rec.bit_agreement = agreement.rate;
        rec.shared_valid = agreement.shared_valid;

        PositionVector pva = position_vector(qa);
        PositionVector pvb = position_vector(qb);
        std::vector<std::uint8_t> bits_a = reconcile(qa, pva, pvb);
        std::vector<std::uint8_t> bits_b = reconcile(qb, pvb, pva);
        try {
            SymmetricKey ka = assemble_key(bits_a, cfg.min_valid_bits);
            SymmetricKey kb = assemble_key(bits_b, cfg.min_valid_bits);
            rec.key_success = (ka == kb);
        } catch (const InsufficientBits&) {
            rec.key_success = false;  // a normal rejection, not a pipeline failure
        }
    } catch (const Error& e) {
        rec = TrialRecord{};
        rec.trial_id = trial_id;
        rec.population = population;
        rec.k_factor = cfg.k_factor;
        rec.failed = true;
        rec.error = e.name();
    }
    return rec;
}

std::vector<TrialRecord> run_population(Population population, const SynthParams& base,
                                        std::size_t count, std::uint64_t seed0,
                                        const TrialConfig& cfg) {
    std::vector<TrialRecord> trials;
    trials.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        SynthParams p = base;
        p.rng_seed = seed0 + i;
        p.orientation_seed_a = 2 * (seed0 + i) + 1;
        p.orientation_seed_b = 2 * (seed0 + i) + 2;
        HandshakePair pair = gen_handshake_pair(p);
        if (population == Population::legitimate) {
            trials.push_back(run_trial(i, population, pair.device_a, pair.device_b, cfg));
        } else {
            MotionTrace mimic = gen_adversary_trace(pair.latent, p);
            trials.push_back(run_trial(i, population, pair.device_a, mimic, cfg));
        }
    }
    return trials;
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials) {
    out << "trial_id,population,k,bit_rate_a,bit_rate_b,bit_agreement,shared_valid,"
           "key_success,coherence,failed,error\n";
    for (const auto& t : trials) {
        out << t.trial_id << ',' << population_name(t.population) << ',' << t.k_factor << ','
            << t.bit_rate_a << ',' << t.bit_rate_b << ',' << t.bit_agreement << ','
            << t.shared_valid << ',' << (t.key_success ? 1 : 0) << ',' << t.coherence << ','
            << (t.failed ? 1 : 0) << ',' << t.error << '\n';
    }
}

void write_error_curve_json(std::ostream& out, const ErrorCurve& curve) {
    nlohmann::json j{{"thresholds", curve.thresholds},
                     {"far", curve.far},
                     {"frr", curve.frr},
                     {"eer", curve.eer},
                     {"eer_threshold", curve.eer_threshold}};
    out << j.dump(2) << '\n';
}

void write_cdf_csv(std::ostream& out, std::span<const CdfPoint> cdf) {
    out << "value,fraction\n";
    for (const auto& p : cdf) out << p.value << ',' << p.fraction << '\n';
}

}  // namespace shakekey
