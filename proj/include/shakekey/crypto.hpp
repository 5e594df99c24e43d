#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "shakekey/errors.hpp"
#include "shakekey/keygen.hpp"

namespace shakekey {

/// Authenticated ciphertext (AES-128-GCM). The tag verifies iff both the key
/// and the ciphertext are intact, which is what lets the probe step tell a
/// peer from a bystander.
struct SealedMessage {
    std::array<std::uint8_t, 12> nonce{};
    std::vector<std::uint8_t> ciphertext;
    std::array<std::uint8_t, 16> tag{};

    /// Wire encoding: nonce || u32 big-endian ciphertext length ||
    /// ciphertext || tag.
    std::vector<std::uint8_t> encode() const;
    static SealedMessage decode(std::span<const std::uint8_t> wire);
};

/// Encrypts under a fresh 96-bit nonce drawn from `rng`. Simulations pass a
/// seeded generator so transcripts reproduce; the overload without one uses
/// system entropy.
SealedMessage seal(const SymmetricKey& key, std::span<const std::uint8_t> plaintext,
                   std::mt19937_64& rng);
SealedMessage seal(const SymmetricKey& key, std::span<const std::uint8_t> plaintext);

/// Returns the plaintext iff the key matches and the message is untampered;
/// nullopt is the authentication failure the protocol relies on to reject
/// non-peers.
std::optional<std::vector<std::uint8_t>> open(const SymmetricKey& key,
                                              const SealedMessage& msg);

std::vector<std::uint8_t> to_bytes(std::string_view s);

}  // namespace shakekey
