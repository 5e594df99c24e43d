// Command-line front end: detection, local key generation, protocol
// simulation, and the evaluation sweeps, all seeded and file-reproducible.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "shakekey/errors.hpp"
#include "shakekey/eval.hpp"
#include "shakekey/feature.hpp"
#include "shakekey/keygen.hpp"
#include "shakekey/protocol.hpp"
#include "shakekey/synth.hpp"
#include "shakekey/trace.hpp"

namespace fs = std::filesystem;
using namespace shakekey;

namespace {

struct CliConfig {
    double sample_rate = 200.0;
    double k_factor = 0.75;
    std::size_t segment_len = 10;
    std::size_t min_valid_bits = 140;
    std::size_t key_len = 128;
    double rate_threshold = 70.0;
    double window_duration = 2.0;
    std::uint64_t rng_seed = 0;
    std::string out_dir = ".";
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void apply_config_file(CliConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
    cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
    cfg.k_factor = j.value("K", cfg.k_factor);
    cfg.segment_len = j.value("segment_len", cfg.segment_len);
    cfg.min_valid_bits = j.value("min_valid_bits", cfg.min_valid_bits);
    cfg.key_len = j.value("key_len", cfg.key_len);
    cfg.rate_threshold = j.value("rate_threshold", cfg.rate_threshold);
    cfg.window_duration = j.value("window_duration", cfg.window_duration);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
}

void check_config(const CliConfig& cfg) {
    if (cfg.key_len != 128)
        throw UsageError("key_len must be 128: the agreed key container is a fixed "
                         "128-bit block");
    if (cfg.min_valid_bits < cfg.key_len)
        throw UsageError("min_valid_bits must be at least 128 (the key length)");
    if (cfg.sample_rate <= 0.0) throw UsageError("sample_rate must be positive");
    if (cfg.k_factor <= 0.0) throw UsageError("K must be positive");
    if (cfg.segment_len < 2) throw UsageError("segment_len must be at least 2");
    if (cfg.rate_threshold < 0.0) throw UsageError("rate_threshold must be non-negative");
    if (cfg.window_duration <= 0.0) throw UsageError("window_duration must be positive");
}

// "a:b:step", inclusive of b when it lands on the grid.
std::vector<double> parse_range(const std::string& text, const std::string& flag) {
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !in.eof())
        throw UsageError(flag + " expects a:b:step, got '" + text + "'");
    if (step <= 0.0) throw UsageError(flag + ": step must be positive");
    if (b < a) throw UsageError(flag + ": range end is below its start");
    std::vector<double> values;
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    values.reserve(count);
    for (std::size_t i = 0; i < count; ++i) values.push_back(a + static_cast<double>(i) * step);
    return values;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

struct Pipeline {
    std::size_t anchor = 0;
    double peak_threshold = 0.0;
    AnchorWindow win;
    QuantizedBits bits;
};

Pipeline run_pipeline(const MotionTrace& trace, const CliConfig& cfg) {
    Pipeline p;
    const MagnitudeSeries mag = squared_magnitude(trace);
    p.peak_threshold = default_peak_threshold(mag);
    const auto anchor = detect_anchor(mag, p.peak_threshold);
    if (!anchor)
        throw std::runtime_error("NoAnchor: no qualifying peak above threshold " +
                                 std::to_string(p.peak_threshold));
    p.anchor = *anchor;
    p.win = align_window(trace, p.anchor, cfg.window_duration);
    const FeatureSeries feat = project_first_pc(p.win.window);
    p.bits = quantize(feat, cfg.k_factor, cfg.segment_len);
    return p;
}

SynthParams synth_params(const CliConfig& cfg, std::uint64_t seed_offset) {
    SynthParams p;
    p.sample_rate = cfg.sample_rate;
    p.rng_seed = cfg.rng_seed + seed_offset;
    p.orientation_seed_a = 2 * seed_offset + 1;
    p.orientation_seed_b = 2 * seed_offset + 2;
    return p;
}

int cmd_detect(const CliConfig& cfg, const std::string& trace_path) {
    const MotionTrace trace = load_trace_file(trace_path);
    const MagnitudeSeries mag = squared_magnitude(trace);
    const double threshold = default_peak_threshold(mag);
    const auto anchor = detect_anchor(mag, threshold);
    std::cout << "peak_threshold: " << threshold << '\n';
    if (!anchor) {
        std::cout << "verdict: NO-HANDSHAKE\n";
        std::cerr << "error: NoAnchor: no qualifying peak above threshold " << threshold
                  << '\n';
        return 1;
    }
    const AnchorWindow win = align_window(trace, *anchor, cfg.window_duration);
    const std::size_t end = *anchor + win.window.size();
    std::cout << "anchor_index: " << *anchor << '\n'
              << "anchor_time_s: " << static_cast<double>(*anchor) / trace.sample_rate
              << '\n'
              << "window_start: " << *anchor << '\n'
              << "window_end: " << end << '\n'
              << "window_samples: " << win.window.size() << '\n'
              << "window_complete: " << (win.complete ? "true" : "false") << '\n'
              << "verdict: HANDSHAKE-DETECTED\n";
    return 0;
}

int cmd_keygen(const CliConfig& cfg, const std::string& path_a, const std::string& path_b) {
    const MotionTrace trace_a = load_trace_file(path_a);
    const MotionTrace trace_b = load_trace_file(path_b);
    const Pipeline pa = run_pipeline(trace_a, cfg);
    const Pipeline pb = run_pipeline(trace_b, cfg);

    const double rate_a = bit_rate(pa.bits);
    const double rate_b = bit_rate(pb.bits);
    const AgreementResult agree = bit_agreement_rate(pa.bits, pb.bits);
    std::cout << "bit_rate_a: " << rate_a << '\n'
              << "bit_rate_b: " << rate_b << '\n'
              << "shared_valid: " << agree.shared_valid << '\n'
              << "bit_agreement: " << agree.rate << '\n';

    const PositionVector pva = position_vector(pa.bits);
    const PositionVector pvb = position_vector(pb.bits);
    SymmetricKey key_a, key_b;
    try {
        key_a = assemble_key(reconcile(pa.bits, pva, pvb), cfg.min_valid_bits);
        key_b = assemble_key(reconcile(pb.bits, pvb, pva), cfg.min_valid_bits);
    } catch (const InsufficientBits& e) {
        std::cout << "InsufficientBits: " << e.what() << '\n'
                  << "verdict: REJECTED (InsufficientBits)\n";
        std::cerr << "error: InsufficientBits: " << e.what() << '\n';
        return 1;
    }
    std::cout << "key_a: " << key_a.hex() << '\n' << "key_b: " << key_b.hex() << '\n';

    if (!(key_a == key_b)) {
        std::cout << "verdict: REJECTED (key mismatch)\n";
        std::cerr << "error: keys disagree; shake again\n";
        return 1;
    }
    if (std::min(rate_a, rate_b) < cfg.rate_threshold) {
        std::cout << "verdict: REJECTED (bit rate below " << cfg.rate_threshold
                  << " bits/s)\n";
        std::cerr << "error: bit rate below acceptance threshold\n";
        return 1;
    }
    std::cout << "verdict: PAIRED\n";
    return 0;
}

int cmd_simulate(const CliConfig& cfg, std::size_t pairs, std::size_t adversaries) {
    if (pairs == 0) throw UsageError("--pairs must be at least 1");
    fs::create_directories(cfg.out_dir);

    const SessionConfig scfg{.message_budget = 16, .min_valid_bits = cfg.min_valid_bits};
    std::size_t confirmed = 0;
    std::size_t adv_probe_opens = 0, adv_data_opens = 0;
    std::vector<QuantizedBits> mimic_bits;
    std::vector<std::vector<SessionMessage>> captures;

    for (std::size_t i = 0; i < pairs; ++i) {
        const SynthParams params = synth_params(cfg, i);
        const HandshakePair pair = gen_handshake_pair(params);
        const Pipeline pa = run_pipeline(pair.device_a, cfg);
        const Pipeline pb = run_pipeline(pair.device_b, cfg);

        const std::string ida = "pair" + std::to_string(i) + "-a";
        const std::string idb = "pair" + std::to_string(i) + "-b";
        std::vector<DeviceSession> devices;
        devices.emplace_back(ida, pa.bits, scfg);
        devices.emplace_back(idb, pb.bits, scfg);

        SimChannel channel(ChannelConfig{.drop_probability = 0.0, .seed = cfg.rng_seed + i});
        channel.add_tap("sniffer");
        std::mt19937_64 rng(cfg.rng_seed * 0x9e3779b9ULL + i);
        const auto outcomes = run_session(devices, channel, rng);

        const bool ok = outcomes[0].state == SessionState::confirmed &&
                        outcomes[1].state == SessionState::confirmed &&
                        outcomes[0].peer == idb && outcomes[1].peer == ida;
        if (ok) {
            ++confirmed;
            const std::string payload = "telemetry-" + std::to_string(i);
            std::vector<std::uint8_t> bytes(payload.begin(), payload.end());
            exchange_data(devices[0], bytes, channel, rng);
            exchange_data(devices[1], bytes, channel, rng);
            pump(channel, devices, rng);
        }

        const fs::path tpath = fs::path(cfg.out_dir) /
                               ("transcript_pair" + std::to_string(i) + ".csv");
        auto tout = open_output(tpath);
        channel.write_transcript_csv(tout);

        std::cout << "pair" << i << ": confirmed=" << (ok ? "yes" : "no")
                  << " msgs=" << outcomes[0].messages_sent << "/"
                  << outcomes[1].messages_sent
                  << " key=" << (outcomes[0].key ? outcomes[0].key->hex() : "-")
                  << " transcript=" << tpath.string() << '\n';

        if (i < adversaries) {
            const MotionTrace mimic = gen_adversary_trace(pair.latent, params);
            mimic_bits.push_back(run_pipeline(mimic, cfg).bits);
            captures.push_back(channel.tap_capture("sniffer"));
        }
    }

    for (std::size_t j = 0; j < mimic_bits.size(); ++j) {
        const EavesdropAttempt attempt =
            attempt_eavesdrop(captures[j], mimic_bits[j], scfg);
        adv_probe_opens += attempt.probes_opened;
        adv_data_opens += attempt.data_frames_opened;
        std::cout << "adv" << j << "->pair" << j << ": candidates=" << attempt.candidate_keys
                  << " probes_opened=" << attempt.probes_opened << "/" << attempt.probes_seen
                  << " data_opened=" << attempt.data_frames_opened << "/"
                  << attempt.data_frames_seen << '\n';
    }

    std::cout << "summary: pairs_confirmed=" << confirmed << "/" << pairs
              << " adv_probes_opened=" << adv_probe_opens
              << " adv_data_opened=" << adv_data_opens << '\n';
    const bool all_ok = confirmed == pairs && adv_data_opens == 0;
    std::cout << "verdict: " << (all_ok ? "ALL-CONFIRMED" : "DEGRADED") << '\n';
    return all_ok ? 0 : 1;
}

TrialConfig trial_config(const CliConfig& cfg, double k) {
    TrialConfig t;
    t.k_factor = k;
    t.segment_len = cfg.segment_len;
    t.min_valid_bits = cfg.min_valid_bits;
    t.window_duration_s = cfg.window_duration;
    return t;
}

int cmd_evaluate(const CliConfig& cfg, std::size_t trials, const std::string& thresholds) {
    if (trials == 0) throw UsageError("--trials must be at least 1");
    fs::create_directories(cfg.out_dir);
    const std::vector<double> grid = parse_range(thresholds, "--thresholds");
    const TrialConfig tcfg = trial_config(cfg, cfg.k_factor);
    const SynthParams base = [&] {
        SynthParams p;
        p.sample_rate = cfg.sample_rate;
        return p;
    }();

    auto legit = run_population(Population::legitimate, base, trials, cfg.rng_seed, tcfg);
    auto adv = run_population(Population::adversarial, base, trials,
                              cfg.rng_seed + trials, tcfg);

    std::vector<double> legit_coh, adv_coh;
    double legit_coh_mean = 0, adv_coh_mean = 0;
    for (const auto& t : legit) {
        legit_coh.push_back(t.coherence);
        legit_coh_mean += t.coherence;
    }
    for (const auto& t : adv) {
        adv_coh.push_back(t.coherence);
        adv_coh_mean += t.coherence;
    }
    const ErrorCurve curve = far_frr_sweep(legit, adv, grid);

    const fs::path out = cfg.out_dir;
    {
        auto f = open_output(out / "trials.csv");
        std::vector<TrialRecord> all(legit);
        all.insert(all.end(), adv.begin(), adv.end());
        write_trials_csv(f, all);
    }
    {
        auto f = open_output(out / "error_curve.json");
        write_error_curve_json(f, curve);
    }
    {
        auto f = open_output(out / "coherence_cdf_legitimate.csv");
        const auto cdf = coherence_cdf(legit_coh);
        write_cdf_csv(f, cdf);
    }
    {
        auto f = open_output(out / "coherence_cdf_adversarial.csv");
        const auto cdf = coherence_cdf(adv_coh);
        write_cdf_csv(f, cdf);
    }

    std::cout << "legitimate: " << trials << " trials, key_success "
              << key_success_rate(legit) << ", mean_coherence "
              << legit_coh_mean / static_cast<double>(trials) << '\n'
              << "adversarial: " << trials << " trials, key_success "
              << key_success_rate(adv) << ", mean_coherence "
              << adv_coh_mean / static_cast<double>(trials) << '\n'
              << "eer: " << curve.eer << " at threshold " << curve.eer_threshold << '\n'
              << "wrote: trials.csv error_curve.json coherence_cdf_legitimate.csv "
                 "coherence_cdf_adversarial.csv in "
              << out.string() << '\n';
    return 0;
}

int cmd_sweep(const CliConfig& cfg, std::size_t trials, const std::string& k_range,
              const std::string& thresholds) {
    if (trials == 0) throw UsageError("--trials must be at least 1");
    fs::create_directories(cfg.out_dir);
    const std::vector<double> ks = parse_range(k_range, "--k-range");
    const std::vector<double> grid = parse_range(thresholds, "--thresholds");
    const SynthParams base = [&] {
        SynthParams p;
        p.sample_rate = cfg.sample_rate;
        return p;
    }();

    const fs::path out = cfg.out_dir;
    auto csv = open_output(out / "sweep.csv");
    csv << "k,threshold,far,frr\n";
    nlohmann::json summary = nlohmann::json::array();

    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const TrialConfig tcfg = trial_config(cfg, ks[ki]);
        const std::uint64_t seed0 = cfg.rng_seed + ki * 1000000ULL;
        auto legit = run_population(Population::legitimate, base, trials, seed0, tcfg);
        auto adv =
            run_population(Population::adversarial, base, trials, seed0 + 500000ULL, tcfg);
        const ErrorCurve curve = far_frr_sweep(legit, adv, grid);
        for (std::size_t ti = 0; ti < grid.size(); ++ti)
            csv << ks[ki] << ',' << curve.thresholds[ti] << ',' << curve.far[ti] << ','
                << curve.frr[ti] << '\n';

        double mean_rate = 0;
        for (const auto& t : legit) mean_rate += (t.bit_rate_a + t.bit_rate_b) / 2.0;
        mean_rate /= static_cast<double>(trials);
        summary.push_back({{"k", ks[ki]},
                           {"eer", curve.eer},
                           {"eer_threshold", curve.eer_threshold},
                           {"mean_bit_rate", mean_rate},
                           {"key_success", key_success_rate(legit)}});
        std::cout << "k=" << ks[ki] << " mean_bit_rate=" << mean_rate
                  << " key_success=" << key_success_rate(legit) << " eer=" << curve.eer
                  << '\n';
    }
    if (!csv) throw std::runtime_error("failed writing sweep.csv");

    auto jf = open_output(out / "sweep_summary.json");
    jf << nlohmann::json{{"trials", trials},
                         {"seed", cfg.rng_seed},
                         {"k_values", ks},
                         {"per_k", summary}}
              .dump(2)
       << '\n';
    std::cout << "wrote: sweep.csv sweep_summary.json in " << out.string() << '\n';
    return 0;
}

int run(int argc, char** argv) {
    CliConfig cfg;

    // Config file first so explicit flags can override its values.
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) apply_config_file(cfg, argv[i + 1]);
        else if (arg.rfind("--config=", 0) == 0) apply_config_file(cfg, arg.substr(9));
    }

    CLI::App app{"Motion-based symmetric key agreement from paired accelerometer traces"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    app.add_option("--seed", cfg.rng_seed, "Base RNG seed for all generated data");
    app.add_option("--out", cfg.out_dir, "Output directory for generated files");
    app.add_option("--sample-rate", cfg.sample_rate, "Accelerometer sample rate, Hz");
    app.add_option("--k", cfg.k_factor, "Quantization factor K");
    app.add_option("--segment-len", cfg.segment_len, "Samples per quantization segment");
    app.add_option("--min-valid-bits", cfg.min_valid_bits,
                   "Reconciled bits required before key assembly");
    app.add_option("--key-len", cfg.key_len, "Key length in bits (must be 128)");
    app.add_option("--rate-threshold", cfg.rate_threshold,
                   "Acceptance threshold, valid bits per second");
    app.add_option("--window", cfg.window_duration, "Handshake window after the anchor, s");

    std::string trace_path, path_a, path_b;
    auto* det = app.add_subcommand("detect", "Find the handshake anchor in a trace CSV");
    det->add_option("trace", trace_path, "Trace CSV file")->required();

    auto* keg = app.add_subcommand(
        "keygen", "Run both pipelines locally and reconcile one key from two traces");
    keg->add_option("traceA", path_a, "First device trace CSV")->required();
    keg->add_option("traceB", path_b, "Second device trace CSV")->required();

    std::size_t pairs = 1, adversaries = 0, trials = 100;
    auto* sim = app.add_subcommand(
        "simulate", "Run seeded handshake sessions over the simulated channel; each "
                    "pair gets its own channel with a sniffer tap");
    sim->add_option("--pairs", pairs, "Number of legitimate pairs");
    sim->add_option("--adversaries", adversaries,
                    "Mimicking eavesdroppers, attached to the first pairs");

    std::string thresholds = "20:120:5";
    std::string k_range = "0.3:0.9:0.05";
    auto* eva = app.add_subcommand(
        "evaluate", "Legitimate and adversarial populations at the configured K");
    eva->add_option("--trials", trials, "Trials per population");
    eva->add_option("--thresholds", thresholds, "Acceptance threshold grid a:b:step");

    auto* swp = app.add_subcommand("sweep", "FAR/FRR grid over K and acceptance threshold");
    swp->add_option("--trials", trials, "Trials per population per K");
    swp->add_option("--k-range", k_range, "Quantization factor grid a:b:step");
    swp->add_option("--thresholds", thresholds, "Acceptance threshold grid a:b:step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    check_config(cfg);
    if (app.got_subcommand(det)) return cmd_detect(cfg, trace_path);
    if (app.got_subcommand(keg)) return cmd_keygen(cfg, path_a, path_b);
    if (app.got_subcommand(sim)) return cmd_simulate(cfg, pairs, adversaries);
    if (app.got_subcommand(eva)) return cmd_evaluate(cfg, trials, thresholds);
    return cmd_sweep(cfg, trials, k_range, thresholds);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.name() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
