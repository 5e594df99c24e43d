#include "shakekey/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "shakekey/kernels.hpp"

namespace shakekey {

namespace {

constexpr const char* kHeader = "t,ax,ay,az";

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_field(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("malformed numeric field '" + std::string(field) + "' on line " +
                         std::to_string(line_no));
    if (!std::isfinite(value))
        throw ParseError("non-finite value on line " + std::to_string(line_no));
    return value;
}

}  // namespace

MotionTrace load_trace(std::istream& in) {
    MotionTrace trace;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (saw_header)
                throw ParseError("comment after header on line " + std::to_string(line_no));
            const std::string_view rate_prefix = "# rate=";
            if (line.rfind(rate_prefix, 0) == 0) {
                const double rate =
                    parse_field(std::string_view(line).substr(rate_prefix.size()), line_no);
                if (rate <= 0.0)
                    throw ParseError("non-positive rate on line " + std::to_string(line_no));
                trace.sample_rate = rate;
            }
            continue;
        }
        if (!saw_header) {
            if (line != kHeader)
                throw ParseError("expected header '" + std::string(kHeader) + "', got '" +
                                 line + "'");
            saw_header = true;
            continue;
        }

        double fields[4];
        std::string_view rest(line);
        for (int f = 0; f < 4; ++f) {
            const std::size_t comma = rest.find(',');
            if (f < 3 && comma == std::string_view::npos)
                throw ParseError("row with fewer than 4 fields on line " +
                                 std::to_string(line_no));
            if (f == 3 && comma != std::string_view::npos)
                throw ParseError("row with more than 4 fields on line " +
                                 std::to_string(line_no));
            const std::string_view field =
                f < 3 ? rest.substr(0, comma) : rest;
            fields[f] = parse_field(field, line_no);
            if (f < 3) rest.remove_prefix(comma + 1);
        }
        if (trace.empty()) trace.start_time = fields[0];
        trace.ax.push_back(fields[1]);
        trace.ay.push_back(fields[2]);
        trace.az.push_back(fields[3]);
    }

    if (!saw_header) throw ParseError("missing 't,ax,ay,az' header");
    if (trace.empty()) throw EmptyTrace("trace file has a header but no data rows");
    return trace;
}

MotionTrace load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace file '" + path + "'");
    return load_trace(in);
}

void write_trace(const MotionTrace& trace, std::ostream& out) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# rate=%.6g\n", trace.sample_rate);
    out << buf << kHeader << '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double t = trace.start_time + static_cast<double>(i) / trace.sample_rate;
        std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%.6g\n", t, trace.ax[i], trace.ay[i],
                      trace.az[i]);
        out << buf;
    }
}

void write_trace_file(const MotionTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_trace(trace, out);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

MagnitudeSeries squared_magnitude(const MotionTrace& trace) {
    if (trace.empty()) throw EmptyTrace("squared_magnitude on empty trace");
    MagnitudeSeries mag;
    mag.sample_rate = trace.sample_rate;
    mag.values.resize(trace.size());
    kernels::squared_magnitude(trace.ax, trace.ay, trace.az, mag.values);
    return mag;
}

double default_peak_threshold(const MagnitudeSeries& mag) {
    if (mag.values.empty()) throw EmptyTrace("threshold of empty magnitude series");
    std::vector<double> sorted(mag.values);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = (n % 2 == 1)
                              ? sorted[n / 2]
                              : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return 5.0 * median;
}

std::optional<std::size_t> detect_anchor(const MagnitudeSeries& mag, double peak_threshold,
                                         double /*refractory_s*/) {
    if (peak_threshold <= 0.0)
        throw std::invalid_argument("peak_threshold must be positive");
    const auto& v = mag.values;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] <= peak_threshold) continue;
        const bool left_ok = (i == 0) || v[i] >= v[i - 1];
        const bool right_ok = (i + 1 == n) || v[i] >= v[i + 1];
        if (left_ok && right_ok) return i;
    }
    return std::nullopt;
}

AnchorWindow align_window(const MotionTrace& trace, std::size_t anchor_index,
                          double duration_s) {
    if (anchor_index >= trace.size())
        throw AnchorOutOfRange("anchor " + std::to_string(anchor_index) +
                               " outside trace of " + std::to_string(trace.size()) +
                               " samples");
    if (duration_s <= 0.0) throw std::invalid_argument("duration must be positive");

    const auto want = static_cast<std::size_t>(std::llround(duration_s * trace.sample_rate));
    const std::size_t end = std::min(trace.size(), anchor_index + want);

    AnchorWindow out;
    out.anchor_index = anchor_index;
    out.complete = (end - anchor_index) == want;
    out.window.sample_rate = trace.sample_rate;
    out.window.start_time =
        trace.start_time + static_cast<double>(anchor_index) / trace.sample_rate;
    out.window.ax.assign(trace.ax.begin() + static_cast<std::ptrdiff_t>(anchor_index),
                         trace.ax.begin() + static_cast<std::ptrdiff_t>(end));
    out.window.ay.assign(trace.ay.begin() + static_cast<std::ptrdiff_t>(anchor_index),
                         trace.ay.begin() + static_cast<std::ptrdiff_t>(end));
    out.window.az.assign(trace.az.begin() + static_cast<std::ptrdiff_t>(anchor_index),
                         trace.az.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

}  // namespace shakekey
