#pragma once

#include <motionsynth/engine.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace motionsynth {

// Session wire format. Every message is
//
//   u32 LE body_length | u8 kind | body
//
// where body_length counts the kind byte and body. kind 1 carries a UTF-8
// JSON object with a "type" field; kind 2 is a video frame:
//
//   u64 LE frame_index | width*height 8-bit gray pixels
//
// Over WebSocket each binary message holds exactly one framed message.

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxMessageBytes = 32u << 20;
inline constexpr std::uint8_t kKindJson = 1;
inline constexpr std::uint8_t kKindFrame = 2;

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Client -> server.

struct Hello {
    int protocol_version = kProtocolVersion;
    double fps = 30.0;
    int width = 0;
    int height = 0;

    friend bool operator==(const Hello&, const Hello&) = default;
};

struct FrameMessage {
    std::int64_t frame_index = 0;
    std::vector<std::uint8_t> payload;

    friend bool operator==(const FrameMessage&, const FrameMessage&) = default;
};

/// Any subset of the live-tunable EngineConfig fields.
struct ConfigPatch {
    std::optional<std::uint64_t> session_seed;
    std::optional<int> root_pitch_class;
    std::optional<std::vector<int>> scale_intervals;
    std::optional<MidiSpan> midi_span;
    std::optional<double> q_min;
    std::optional<double> q_max;
    std::optional<double> attack_s;
    std::optional<double> release_s;
    std::optional<std::vector<PartialSpec>> partials;
    std::optional<double> pixel_threshold;
    std::optional<double> cell_threshold;
    std::optional<int> release_frames;
    std::optional<double> master_gain;

    friend bool operator==(const ConfigPatch&, const ConfigPatch&) = default;
};

using ClientMessage = std::variant<Hello, FrameMessage, ConfigPatch>;

// Server -> client.

struct Welcome {
    int protocol_version = kProtocolVersion;
    double sample_rate = 48000.0;
    double attack_s = 0.08;
    double release_s = 0.6;
    std::vector<double> note_freqs;

    friend bool operator==(const Welcome&, const Welcome&) = default;
};

struct NoteOnMessage {
    int note_index = 0;
    int velocity = 0;
    int column = 0;
    int row = 0;
    double freq_hz = 0.0;
    std::int64_t frame_index = 0;

    friend bool operator==(const NoteOnMessage&, const NoteOnMessage&) = default;
};

struct NoteOffMessage {
    int note_index = 0;
    std::int64_t frame_index = 0;

    friend bool operator==(const NoteOffMessage&, const NoteOffMessage&) = default;
};

struct EnvMessage {
    int note_index = 0;
    double value = 0.0;
    std::int64_t frame_index = 0;

    friend bool operator==(const EnvMessage&, const EnvMessage&) = default;
};

struct StatsMessage {
    std::uint64_t clip_count = 0;
    double rms = 0.0;
    std::int64_t frame_lag = 0;
    std::uint64_t dropped_events = 0;
    std::int64_t frame_index = 0;

    friend bool operator==(const StatsMessage&, const StatsMessage&) = default;
};

struct ErrorMessage {
    std::string message;

    friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

using ServerMessage = std::variant<Welcome, NoteOnMessage, NoteOffMessage, EnvMessage, StatsMessage, ErrorMessage>;

std::vector<std::uint8_t> encode_message(const ClientMessage& message);
std::vector<std::uint8_t> encode_message(const ServerMessage& message);

/// `framed` is one complete message including its length prefix. Throws
/// ProtocolError on any malformation.
ClientMessage decode_client_message(std::span<const std::uint8_t> framed);
ServerMessage decode_server_message(std::span<const std::uint8_t> framed);

ServerMessage to_message(const NoteEvent& event);

/// Applies the patch to a copy of `base` and validates the result.
/// Throws ConfigError.
EngineConfig apply_patch(const EngineConfig& base, const ConfigPatch& patch);

/// Splits a byte stream into framed messages.
class MessageFramer {
public:
    void feed(std::span<const std::uint8_t> bytes);

    /// Next complete message (with prefix), if buffered. Throws ProtocolError
    /// when a length prefix is zero or exceeds kMaxMessageBytes.
    std::optional<std::vector<std::uint8_t>> next();

    [[nodiscard]] std::size_t buffered() const noexcept { return buffer_.size() - read_; }

private:
    std::vector<std::uint8_t> buffer_;
    std::size_t read_ = 0;
};

}  // namespace motionsynth
