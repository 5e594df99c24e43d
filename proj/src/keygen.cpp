#include "shakekey/keygen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "shakekey/kernels.hpp"

namespace shakekey {

std::size_t QuantizedBits::valid_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(states.begin(), states.end(),
                      [](BitState s) { return s != BitState::invalid; }));
}

QuantizedBits quantize(const FeatureSeries& feature, double k_factor,
                       std::size_t segment_len) {
    if (feature.values.empty()) throw EmptyFeature("quantize of empty feature series");
    if (k_factor <= 0.0) throw std::invalid_argument("quantization factor must be > 0");
    if (segment_len < 2) throw std::invalid_argument("segment_len must be >= 2");

    const auto& v = feature.values;
    const std::size_t n = v.size();

    QuantizedBits out;
    out.segment_len = segment_len;
    out.k_factor = k_factor;
    out.duration_s = static_cast<double>(n) / feature.sample_rate;
    out.states.assign(n, BitState::invalid);

    for (std::size_t start = 0; start < n; start += segment_len) {
        const std::size_t len = std::min(segment_len, n - start);
        // A trailing fragment of one sample has no spread to threshold on.
        if (len < 2) continue;

        const std::span<const double> seg(v.data() + start, len);
        // All-equal segments have sigma == 0 exactly, so both thresholds
        // collapse onto mu and the strict comparisons discard every sample.
        // Detect that case directly rather than through rounded arithmetic.
        if (std::all_of(seg.begin(), seg.end(), [&](double x) { return x == seg[0]; }))
            continue;

        const double mu = kernels::sum(seg) / static_cast<double>(len);
        const double sigma =
            std::sqrt(kernels::sum_sq_dev(seg, mu) / static_cast<double>(len));
        const double upper = mu + k_factor * sigma;
        const double lower = mu - k_factor * sigma;
        for (std::size_t i = 0; i < len; ++i) {
            if (seg[i] > upper)
                out.states[start + i] = BitState::one;
            else if (seg[i] < lower)
                out.states[start + i] = BitState::zero;
        }
    }
    return out;
}

PositionVector position_vector(const QuantizedBits& bits) {
    PositionVector pv;
    for (std::size_t i = 0; i < bits.states.size(); ++i)
        if (bits.states[i] != BitState::invalid)
            pv.positions.push_back(static_cast<std::uint32_t>(i + 1));
    return pv;
}

std::vector<std::uint8_t> PositionVector::encode() const {
    std::vector<std::uint8_t> wire;
    wire.reserve(4 * (positions.size() + 1));
    auto put_u32 = [&wire](std::uint32_t v) {
        wire.push_back(static_cast<std::uint8_t>(v & 0xff));
        wire.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
        wire.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
        wire.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
    };
    put_u32(static_cast<std::uint32_t>(positions.size()));
    for (std::uint32_t p : positions) put_u32(p);
    return wire;
}

PositionVector PositionVector::decode(std::span<const std::uint8_t> wire) {
    auto get_u32 = [&wire](std::size_t off) {
        return static_cast<std::uint32_t>(wire[off]) |
               (static_cast<std::uint32_t>(wire[off + 1]) << 8) |
               (static_cast<std::uint32_t>(wire[off + 2]) << 16) |
               (static_cast<std::uint32_t>(wire[off + 3]) << 24);
    };
    if (wire.size() < 4) throw ParseError("position vector wire too short");
    const std::uint32_t count = get_u32(0);
    if (wire.size() != 4 + 4 * static_cast<std::size_t>(count))
        throw ParseError("position vector length prefix does not match payload");
    PositionVector pv;
    pv.positions.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t p = get_u32(4 + 4 * static_cast<std::size_t>(i));
        if (!pv.positions.empty() && p <= pv.positions.back())
            throw ParseError("position vector not strictly increasing");
        if (p == 0) throw ParseError("position vector indices are 1-based");
        pv.positions.push_back(p);
    }
    return pv;
}

std::vector<std::uint8_t> reconcile(const QuantizedBits& local,
                                    const PositionVector& local_pv,
                                    const PositionVector& remote_pv) {
    if (local_pv != position_vector(local))
        throw std::invalid_argument("local position vector does not match local bits");

    std::vector<std::uint8_t> agreed;
    auto it_a = local_pv.positions.begin();
    auto it_b = remote_pv.positions.begin();
    while (it_a != local_pv.positions.end() && it_b != remote_pv.positions.end()) {
        if (*it_a < *it_b) {
            ++it_a;
        } else if (*it_b < *it_a) {
            ++it_b;
        } else {
            const BitState s = local.states[*it_a - 1];
            agreed.push_back(s == BitState::one ? 1 : 0);
            ++it_a;
            ++it_b;
        }
    }
    return agreed;
}

SymmetricKey assemble_key(std::span<const std::uint8_t> reconciled,
                          std::size_t min_valid_bits) {
    constexpr std::size_t kKeyBits = 128;
    if (min_valid_bits < kKeyBits)
        throw std::invalid_argument("min_valid_bits must be at least 128");
    if (reconciled.size() < min_valid_bits)
        throw InsufficientBits("need " + std::to_string(min_valid_bits) +
                               " reconciled bits, got " + std::to_string(reconciled.size()) +
                               "; do another handshake");

    SymmetricKey key;
    key.source_valid_count = static_cast<std::uint32_t>(reconciled.size());
    for (std::size_t i = 0; i < kKeyBits; ++i)
        if (reconciled[i]) key.bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return key;
}

std::string SymmetricKey::hex() const {
    std::string out(32, '0');
    static const char* digits = "0123456789abcdef";
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        out[2 * i] = digits[bytes[i] >> 4];
        out[2 * i + 1] = digits[bytes[i] & 0xf];
    }
    return out;
}

double bit_rate(const QuantizedBits& bits) {
    if (bits.duration_s <= 0.0) throw std::invalid_argument("duration must be positive");
    return static_cast<double>(bits.valid_count()) / bits.duration_s;
}

}  // namespace shakekey
