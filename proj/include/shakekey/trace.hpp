#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shakekey/errors.hpp"

namespace shakekey {

/// Raw 3-axis accelerometer recording at a fixed sample rate. Axes are stored
/// as separate arrays so the arithmetic kernels can stream them directly.
/// Values are in m/s^2 and include gravity.
struct MotionTrace {
    double sample_rate = 200.0;  // samples per second
    double start_time = 0.0;     // seconds
    std::vector<double> ax, ay, az;

    std::size_t size() const noexcept { return ax.size(); }
    bool empty() const noexcept { return ax.empty(); }
    double duration() const noexcept {
        return sample_rate > 0 ? static_cast<double>(size()) / sample_rate : 0.0;
    }
};

/// Per-sample squared acceleration magnitude, (m/s^2)^2. Rotation-invariant,
/// which makes it the detection signal: a handshake shows up as peaks well
/// above the gravity baseline of ~96.2.
struct MagnitudeSeries {
    double sample_rate = 200.0;
    std::vector<double> values;
};

/// Trace slice starting at the detected anchor peak. `complete` is false when
/// the trace ended before the requested duration.
struct AnchorWindow {
    std::size_t anchor_index = 0;
    MotionTrace window;
    bool complete = true;
};

// Trace CSV format: optional `# rate=<Hz>` comment, then a `t,ax,ay,az`
// header, then one comma-separated row per sample. UTF-8, LF line endings,
// values written with 6 significant digits.
MotionTrace load_trace(std::istream& in);
MotionTrace load_trace_file(const std::string& path);
void write_trace(const MotionTrace& trace, std::ostream& out);
void write_trace_file(const MotionTrace& trace, const std::string& path);

MagnitudeSeries squared_magnitude(const MotionTrace& trace);

/// Adaptive detection threshold: 5x the median of the magnitude series, so a
/// resting baseline (gravity plus sensor noise) never qualifies.
double default_peak_threshold(const MagnitudeSeries& mag);

/// Index of the first local maximum strictly above `peak_threshold`, or
/// nullopt if no sample qualifies. A local maximum is >= both neighbours
/// (boundary samples compare against their single neighbour). `refractory_s`
/// is accepted for future multi-event segmentation and unused by the
/// first-peak rule.
std::optional<std::size_t> detect_anchor(const MagnitudeSeries& mag, double peak_threshold,
                                         double refractory_s = 0.0);

AnchorWindow align_window(const MotionTrace& trace, std::size_t anchor_index,
                          double duration_s);

}  // namespace shakekey
