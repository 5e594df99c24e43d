#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shakekey/errors.hpp"
#include "shakekey/feature.hpp"

namespace shakekey {

enum class BitState : std::uint8_t { zero = 0, one = 1, invalid = 2 };

/// Tri-state quantization of a feature series: per segment of `segment_len`
/// samples, values above mu + K*sigma encode 1, below mu - K*sigma encode 0,
/// and everything inside the band is discarded as invalid.
struct QuantizedBits {
    std::vector<BitState> states;
    std::size_t segment_len = 10;
    double k_factor = 0.75;
    double duration_s = 0.0;

    std::size_t valid_count() const noexcept;
};

/// Strictly increasing 1-based indices of the valid bit positions. This is
/// the only key material broadcast in the clear.
struct PositionVector {
    std::vector<std::uint32_t> positions;

    /// Wire encoding: u32 count then the ascending values, all little-endian.
    std::vector<std::uint8_t> encode() const;
    static PositionVector decode(std::span<const std::uint8_t> wire);

    bool operator==(const PositionVector&) const = default;
};

/// 128-bit agreed key. Bits are packed MSB-first into 16 bytes in
/// reconciliation order; source_valid_count records how many reconciled bits
/// backed the key.
struct SymmetricKey {
    std::array<std::uint8_t, 16> bytes{};
    std::uint32_t source_valid_count = 0;

    std::string hex() const;
    bool operator==(const SymmetricKey& other) const { return bytes == other.bytes; }
};

QuantizedBits quantize(const FeatureSeries& feature, double k_factor = 0.75,
                       std::size_t segment_len = 10);

PositionVector position_vector(const QuantizedBits& bits);

/// Keeps only the bits valid on both sides: ordered intersection of the two
/// position vectors, then the local bit values at those positions. Returns
/// 0/1 values; empty intersection yields an empty sequence.
std::vector<std::uint8_t> reconcile(const QuantizedBits& local,
                                    const PositionVector& local_pv,
                                    const PositionVector& remote_pv);

/// First 128 reconciled bits become the key; fewer than `min_valid_bits`
/// reconciled bits means the handshake must be redone (InsufficientBits).
SymmetricKey assemble_key(std::span<const std::uint8_t> reconciled,
                          std::size_t min_valid_bits = 140);

/// Valid bits per second of feature signal.
double bit_rate(const QuantizedBits& bits);

}  // namespace shakekey
