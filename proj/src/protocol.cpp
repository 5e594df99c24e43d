#include "shakekey/protocol.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "shakekey/errors.hpp"

namespace shakekey {
namespace {

std::vector<std::uint8_t> probe_body() {
    return to_bytes(kProbePlaintext);
}

std::vector<std::uint8_t> ack_body() {
    return to_bytes(kAckPlaintext);
}

bool plaintext_is(const std::vector<std::uint8_t>& pt, std::string_view want) {
    return pt.size() == want.size() &&
           std::equal(pt.begin(), pt.end(),
                      reinterpret_cast<const std::uint8_t*>(want.data()));
}

}  // namespace

std::string_view message_kind_name(MessageKind kind) noexcept {
    switch (kind) {
        case MessageKind::position_broadcast: return "POSITION_BROADCAST";
        case MessageKind::probe: return "PROBE";
        case MessageKind::ack: return "ACK";
        case MessageKind::data: return "DATA";
    }
    return "UNKNOWN";
}

std::string_view session_state_name(SessionState s) noexcept {
    switch (s) {
        case SessionState::idle: return "IDLE";
        case SessionState::broadcast_sent: return "BROADCAST_SENT";
        case SessionState::probing: return "PROBING";
        case SessionState::confirmed: return "CONFIRMED";
        case SessionState::failed: return "FAILED";
    }
    return "UNKNOWN";
}

std::string_view session_failure_name(SessionFailure f) noexcept {
    switch (f) {
        case SessionFailure::none: return "NONE";
        case SessionFailure::timeout: return "TIMEOUT";
        case SessionFailure::ambiguous_peer: return "AMBIGUOUS_PEER";
        case SessionFailure::protocol_violation: return "PROTOCOL_VIOLATION";
    }
    return "UNKNOWN";
}

SimChannel::SimChannel(ChannelConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg_.drop_probability < 0.0 || cfg_.drop_probability > 1.0) {
        throw std::invalid_argument("drop_probability must lie in [0, 1]");
    }
}

void SimChannel::register_device(const std::string& id) {
    if (id.empty()) throw std::invalid_argument("device id must be non-empty");
    if (!is_registered(id)) devices_.push_back(id);
}

void SimChannel::add_tap(const std::string& id) {
    if (id.empty()) throw std::invalid_argument("tap id must be non-empty");
    taps_.try_emplace(id);
}

bool SimChannel::is_registered(const std::string& id) const noexcept {
    return std::find(devices_.begin(), devices_.end(), id) != devices_.end();
}

void SimChannel::send(SessionMessage msg) {
    if (!is_registered(msg.sender)) {
        throw std::invalid_argument("send from unregistered device: " + msg.sender);
    }
    if (msg.kind == MessageKind::position_broadcast && msg.recipient) {
        throw std::invalid_argument("position broadcast must not be addressed");
    }
    if (msg.kind != MessageKind::position_broadcast && !msg.recipient) {
        throw std::invalid_argument("addressed message needs a recipient");
    }
    queue_.push_back(std::move(msg));
}

std::optional<SessionMessage> SimChannel::pop_delivery() {
    std::bernoulli_distribution drop(cfg_.drop_probability);
    while (!queue_.empty()) {
        SessionMessage msg = std::move(queue_.front());
        queue_.pop_front();
        if (cfg_.drop_probability > 0.0 && drop(rng_)) continue;

        transcript_.push_back(TranscriptEntry{next_seq_++, msg.kind, msg.sender,
                                              msg.recipient, msg.body.size()});
        for (auto& [tap, capture] : taps_) capture.push_back(msg);
        return msg;
    }
    return std::nullopt;
}

const std::vector<SessionMessage>& SimChannel::tap_capture(const std::string& tap_id) const {
    auto it = taps_.find(tap_id);
    if (it == taps_.end()) throw std::invalid_argument("unknown tap: " + tap_id);
    return it->second;
}

void SimChannel::write_transcript_csv(std::ostream& out) const {
    out << "seq,kind,sender,recipient,bytes\n";
    for (const auto& e : transcript_) {
        out << e.seq << ',' << message_kind_name(e.kind) << ',' << e.sender << ','
            << (e.recipient ? *e.recipient : std::string{}) << ',' << e.bytes << '\n';
    }
}

DeviceSession::DeviceSession(std::string id, QuantizedBits bits, SessionConfig cfg)
    : id_(std::move(id)), bits_(std::move(bits)), cfg_(cfg) {
    if (id_.empty()) throw std::invalid_argument("device id must be non-empty");
    pv_ = position_vector(bits_);
}

bool DeviceSession::try_charge_send() {
    if (sent_ >= cfg_.message_budget) {
        budget_hit_ = true;
        return false;
    }
    ++sent_;
    return true;
}

void DeviceSession::confirm(const std::string& peer, const SymmetricKey& key) {
    peer_ = peer;
    key_ = key;
    SymmetricKey retained = key;
    candidates_.clear();
    candidates_.emplace(peer, retained);
    state_ = SessionState::confirmed;
}

SessionMessage DeviceSession::make_broadcast() {
    if (state_ != SessionState::idle) {
        throw std::invalid_argument("broadcast only from IDLE, state is " +
                                    std::string(session_state_name(state_)));
    }
    if (!try_charge_send()) throw std::invalid_argument("message budget already exhausted");
    state_ = SessionState::broadcast_sent;
    return SessionMessage{MessageKind::position_broadcast, id_, std::nullopt, pv_.encode()};
}

std::vector<SessionMessage> DeviceSession::handle(const SessionMessage& msg,
                                                  std::mt19937_64& rng) {
    std::vector<SessionMessage> replies;
    if (msg.sender == id_) return replies;
    if (msg.recipient && *msg.recipient != id_) return replies;
    if (state_ == SessionState::failed) return replies;

    switch (msg.kind) {
        case MessageKind::position_broadcast: {
            if (state_ == SessionState::confirmed) break;
            PositionVector remote;
            try {
                remote = PositionVector::decode(msg.body);
            } catch (const ParseError&) {
                ++auth_anomalies_;
                break;
            }
            SymmetricKey candidate;
            try {
                auto agreed = reconcile(bits_, pv_, remote);
                candidate = assemble_key(agreed, cfg_.min_valid_bits);
            } catch (const InsufficientBits&) {
                break;  // sender inaudible to us; stay silent
            }
            candidates_.insert_or_assign(msg.sender, candidate);
            if (state_ == SessionState::idle || state_ == SessionState::broadcast_sent) {
                state_ = SessionState::probing;
            }
            if (try_charge_send()) {
                SealedMessage probe = seal(candidate, probe_body(), rng);
                replies.push_back(SessionMessage{MessageKind::probe, id_, msg.sender,
                                                 probe.encode()});
            }
            break;
        }
        case MessageKind::probe: {
            SealedMessage sealed;
            try {
                sealed = SealedMessage::decode(msg.body);
            } catch (const ParseError&) {
                ++auth_anomalies_;
                break;
            }
            // Collect every candidate key that opens this probe. More than one
            // distinct opener means colliding keys; a second opening sender
            // after confirmation means two plausible peers. Both are reported
            // as AMBIGUOUS_PEER rather than tie-broken.
            std::vector<const SymmetricKey*> openers;
            for (const auto& [cid, key] : candidates_) {
                auto pt = open(key, sealed);
                if (pt && plaintext_is(*pt, kProbePlaintext)) openers.push_back(&key);
            }
            if (openers.empty()) break;  // sealed for someone else
            bool distinct = false;
            for (std::size_t i = 1; i < openers.size(); ++i) {
                if (!(*openers[i] == *openers[0])) distinct = true;
            }
            if (distinct) {
                state_ = SessionState::failed;
                failure_ = SessionFailure::ambiguous_peer;
                peer_.reset();
                key_.reset();
                break;
            }
            if (state_ == SessionState::confirmed) {
                if (*peer_ != msg.sender) {
                    state_ = SessionState::failed;
                    failure_ = SessionFailure::ambiguous_peer;
                    peer_.reset();
                    key_.reset();
                } else if (try_charge_send()) {
                    // Duplicate probe from the peer: re-acknowledge.
                    SealedMessage ack = seal(*key_, ack_body(), rng);
                    replies.push_back(SessionMessage{MessageKind::ack, id_, msg.sender,
                                                     ack.encode()});
                }
                break;
            }
            confirm(msg.sender, *openers[0]);
            if (try_charge_send()) {
                SealedMessage ack = seal(*key_, ack_body(), rng);
                replies.push_back(SessionMessage{MessageKind::ack, id_, msg.sender,
                                                 ack.encode()});
            }
            break;
        }
        case MessageKind::ack: {
            SealedMessage sealed;
            try {
                sealed = SealedMessage::decode(msg.body);
            } catch (const ParseError&) {
                ++auth_anomalies_;
                break;
            }
            if (state_ == SessionState::confirmed) {
                auto pt = open(*key_, sealed);
                if (!pt || !plaintext_is(*pt, kAckPlaintext)) {
                    ++auth_anomalies_;
                } else if (*peer_ != msg.sender) {
                    state_ = SessionState::failed;
                    failure_ = SessionFailure::ambiguous_peer;
                    peer_.reset();
                    key_.reset();
                }
                break;
            }
            auto it = candidates_.find(msg.sender);
            if (it == candidates_.end()) {
                ++auth_anomalies_;
                break;
            }
            auto pt = open(it->second, sealed);
            if (pt && plaintext_is(*pt, kAckPlaintext)) {
                confirm(msg.sender, it->second);
            } else {
                ++auth_anomalies_;
            }
            break;
        }
        case MessageKind::data: {
            if (state_ != SessionState::confirmed) {
                throw AuthError("sealed data received before confirmation");
            }
            if (*peer_ != msg.sender) {
                throw AuthError("sealed data from " + msg.sender +
                                " but confirmed peer is " + *peer_);
            }
            SealedMessage sealed = SealedMessage::decode(msg.body);
            auto pt = open(*key_, sealed);
            if (!pt) {
                throw AuthError("sealed data from confirmed peer failed authentication");
            }
            inbox_.emplace_back(msg.sender, std::move(*pt));
            break;
        }
    }
    return replies;
}

DeviceSession DeviceSession::share_key(std::string new_id) const {
    if (state_ != SessionState::confirmed) {
        throw NotConfirmed("can only share a key from a CONFIRMED session");
    }
    DeviceSession clone(std::move(new_id), QuantizedBits{}, cfg_);
    clone.confirm(*peer_, *key_);
    return clone;
}

void pump(SimChannel& channel, std::span<DeviceSession> devices, std::mt19937_64& rng) {
    std::unordered_map<std::string_view, DeviceSession*> by_id;
    by_id.reserve(devices.size());
    for (auto& d : devices) by_id.emplace(d.id(), &d);

    while (auto msg = channel.pop_delivery()) {
        if (msg->recipient) {
            auto it = by_id.find(*msg->recipient);
            if (it == by_id.end()) continue;  // addressed to a tap or absentee
            for (auto& reply : it->second->handle(*msg, rng)) {
                channel.send(std::move(reply));
            }
        } else {
            for (auto& d : devices) {
                if (d.id() == msg->sender) continue;
                for (auto& reply : d.handle(*msg, rng)) {
                    channel.send(std::move(reply));
                }
            }
        }
    }
}

std::vector<SessionOutcome> run_session(std::span<DeviceSession> devices,
                                        SimChannel& channel, std::mt19937_64& rng) {
    for (auto& d : devices) channel.register_device(d.id());
    for (auto& d : devices) channel.send(d.make_broadcast());
    pump(channel, devices, rng);

    std::vector<SessionOutcome> outcomes;
    outcomes.reserve(devices.size());
    for (auto& d : devices) {
        SessionOutcome o;
        o.device_id = d.id();
        o.state = d.state();
        o.failure = d.failure();
        o.peer = d.confirmed_peer();
        o.key = d.key();
        o.messages_sent = d.messages_sent();
        if (o.state != SessionState::confirmed && o.state != SessionState::failed) {
            // Channel drained without a confirming probe: out of time.
            o.state = SessionState::failed;
            o.failure = SessionFailure::timeout;
        }
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

void exchange_data(DeviceSession& sender, std::span<const std::uint8_t> payload,
                   SimChannel& channel, std::mt19937_64& rng) {
    if (sender.state_ != SessionState::confirmed) {
        throw NotConfirmed("exchange_data requires a CONFIRMED session");
    }
    SealedMessage sealed = seal(*sender.key_, payload, rng);
    channel.send(SessionMessage{MessageKind::data, sender.id_, *sender.peer_,
                                sealed.encode()});
}

EavesdropAttempt attempt_eavesdrop(std::span<const SessionMessage> captured,
                                   const QuantizedBits& own_bits,
                                   const SessionConfig& cfg) {
    EavesdropAttempt result;
    PositionVector own_pv = position_vector(own_bits);

    std::vector<SymmetricKey> keys;
    for (const auto& msg : captured) {
        if (msg.kind != MessageKind::position_broadcast) continue;
        try {
            auto remote = PositionVector::decode(msg.body);
            auto agreed = reconcile(own_bits, own_pv, remote);
            keys.push_back(assemble_key(agreed, cfg.min_valid_bits));
        } catch (const Error&) {
            continue;  // malformed or too few shared bits: no candidate
        }
    }
    result.candidate_keys = keys.size();

    for (const auto& msg : captured) {
        if (msg.kind != MessageKind::probe && msg.kind != MessageKind::data) continue;
        SealedMessage sealed;
        try {
            sealed = SealedMessage::decode(msg.body);
        } catch (const ParseError&) {
            continue;
        }
        bool opened = false;
        for (const auto& k : keys) {
            if (open(k, sealed)) {
                opened = true;
                break;
            }
        }
        if (msg.kind == MessageKind::probe) {
            ++result.probes_seen;
            if (opened) ++result.probes_opened;
        } else {
            ++result.data_frames_seen;
            if (opened) ++result.data_frames_opened;
        }
    }
    return result;
}

}  // namespace shakekey
