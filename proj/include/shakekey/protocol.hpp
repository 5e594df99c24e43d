#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shakekey/crypto.hpp"
#include "shakekey/keygen.hpp"

namespace shakekey {

// Agreement phase over a broadcast medium, with every frame visible to
// eavesdroppers in range:
//   1. each device broadcasts the positions of its valid bits;
//   2. for every received vector it reconciles, assembles a candidate key,
//      and replies with a probe (a public constant sealed under that key);
//   3. a probe that opens under one of the receiver's own candidate keys
//      identifies the peer: the receiver keeps that key, discards the rest,
//      and acknowledges;
//   4. once acknowledged, both sides are confirmed and exchange sealed data.

inline constexpr std::string_view kProbePlaintext = "SHAKE-N-SHACK-PROBE-V1";
inline constexpr std::string_view kAckPlaintext = "SHAKE-N-SHACK-ACK-V1";

enum class MessageKind : std::uint8_t { position_broadcast, probe, ack, data };

std::string_view message_kind_name(MessageKind kind) noexcept;

struct SessionMessage {
    MessageKind kind = MessageKind::position_broadcast;
    std::string sender;
    std::optional<std::string> recipient;  // absent for broadcast
    std::vector<std::uint8_t> body;        // PositionVector or SealedMessage wire
};

struct TranscriptEntry {
    std::uint64_t seq = 0;
    MessageKind kind = MessageKind::position_broadcast;
    std::string sender;
    std::optional<std::string> recipient;
    std::size_t bytes = 0;
};

struct ChannelConfig {
    double drop_probability = 0.0;  // lossless by default
    std::uint64_t seed = 0;
};

/// Broadcast medium with deterministic in-order delivery. Taps model
/// sniffers: they receive a copy of exactly the delivered messages.
class SimChannel {
public:
    explicit SimChannel(ChannelConfig cfg = {});

    void register_device(const std::string& id);
    void add_tap(const std::string& id);
    bool is_registered(const std::string& id) const noexcept;

    void send(SessionMessage msg);

    /// Next message to deliver, honoring the drop knob. Delivered messages
    /// are appended to the transcript and copied to every tap.
    std::optional<SessionMessage> pop_delivery();

    const std::vector<TranscriptEntry>& transcript() const noexcept { return transcript_; }
    const std::vector<SessionMessage>& tap_capture(const std::string& tap_id) const;
    void write_transcript_csv(std::ostream& out) const;

private:
    ChannelConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<std::string> devices_;
    std::map<std::string, std::vector<SessionMessage>> taps_;
    std::deque<SessionMessage> queue_;
    std::vector<TranscriptEntry> transcript_;
    std::uint64_t next_seq_ = 0;
};

struct SessionConfig {
    std::size_t message_budget = 16;  // sends per device before Timeout
    std::size_t min_valid_bits = 140;
};

enum class SessionState : std::uint8_t { idle, broadcast_sent, probing, confirmed, failed };
enum class SessionFailure : std::uint8_t { none, timeout, ambiguous_peer, protocol_violation };

std::string_view session_state_name(SessionState s) noexcept;
std::string_view session_failure_name(SessionFailure f) noexcept;

/// One endpoint of the agreement protocol. Owns its quantized bits and the
/// evolving candidate-key table; driven entirely by handle() so a single
/// event loop (run_session/pump) stays in charge of ordering.
class DeviceSession {
public:
    DeviceSession(std::string id, QuantizedBits bits, SessionConfig cfg = {});

    const std::string& id() const noexcept { return id_; }
    SessionState state() const noexcept { return state_; }
    SessionFailure failure() const noexcept { return failure_; }
    const std::optional<std::string>& confirmed_peer() const noexcept { return peer_; }
    const std::optional<SymmetricKey>& key() const noexcept { return key_; }
    const std::map<std::string, SymmetricKey>& candidate_keys() const noexcept {
        return candidates_;
    }
    std::size_t messages_sent() const noexcept { return sent_; }
    bool budget_exhausted() const noexcept { return budget_hit_; }
    std::size_t auth_anomalies() const noexcept { return auth_anomalies_; }
    const std::vector<std::pair<std::string, std::vector<std::uint8_t>>>& received_data()
        const noexcept {
        return inbox_;
    }

    SessionMessage make_broadcast();
    std::vector<SessionMessage> handle(const SessionMessage& msg, std::mt19937_64& rng);

    /// Models a paired companion device (phone, laptop) joining a confirmed
    /// session with a copy of the agreed key. No new cryptography: the clone
    /// starts confirmed with the same peer and key.
    DeviceSession share_key(std::string new_id) const;

private:
    friend void exchange_data(DeviceSession&, std::span<const std::uint8_t>, SimChannel&,
                              std::mt19937_64&);

    bool try_charge_send();
    void confirm(const std::string& peer, const SymmetricKey& key);

    std::string id_;
    QuantizedBits bits_;
    PositionVector pv_;
    SessionConfig cfg_;
    SessionState state_ = SessionState::idle;
    SessionFailure failure_ = SessionFailure::none;
    std::map<std::string, SymmetricKey> candidates_;
    std::optional<std::string> peer_;
    std::optional<SymmetricKey> key_;
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> inbox_;
    std::size_t sent_ = 0;
    bool budget_hit_ = false;
    std::size_t auth_anomalies_ = 0;
};

struct SessionOutcome {
    std::string device_id;
    SessionState state = SessionState::idle;
    SessionFailure failure = SessionFailure::none;
    std::optional<std::string> peer;
    std::optional<SymmetricKey> key;
    std::size_t messages_sent = 0;
};

/// Delivers queued messages until the channel drains, routing to registered
/// sessions and collecting their replies.
void pump(SimChannel& channel, std::span<DeviceSession> devices, std::mt19937_64& rng);

/// Full agreement round: every device broadcasts, then the channel is pumped
/// dry. Devices neither confirmed nor failed by then time out.
std::vector<SessionOutcome> run_session(std::span<DeviceSession> devices,
                                        SimChannel& channel, std::mt19937_64& rng);

/// Seals `payload` under the confirmed key and queues it to the peer; the
/// caller pumps the channel to deliver. Throws NotConfirmed before
/// confirmation.
void exchange_data(DeviceSession& sender, std::span<const std::uint8_t> payload,
                   SimChannel& channel, std::mt19937_64& rng);

/// What a sniffer armed with its own (e.g. mimicked) bits can do with a
/// captured transcript: reconcile against every observed position broadcast,
/// build candidate keys, and try them on every sealed frame.
struct EavesdropAttempt {
    std::size_t candidate_keys = 0;
    std::size_t probes_seen = 0;
    std::size_t probes_opened = 0;
    std::size_t data_frames_seen = 0;
    std::size_t data_frames_opened = 0;
};

EavesdropAttempt attempt_eavesdrop(std::span<const SessionMessage> captured,
                                   const QuantizedBits& own_bits,
                                   const SessionConfig& cfg = {});

}  // namespace shakekey
