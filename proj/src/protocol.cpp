#include <motionsynth/protocol.hpp>

#include <json.hpp>

#include <cstring>

namespace motionsynth {

namespace {

using nlohmann::json;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b)
{
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::vector<std::uint8_t> frame_json(const json& j)
{
    const std::string text = j.dump();
    if (text.size() + 1 > kMaxMessageBytes) throw ProtocolError("message too large");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() + 5);
    put_u32(out, static_cast<std::uint32_t>(text.size() + 1));
    out.push_back(kKindJson);
    out.insert(out.end(), text.begin(), text.end());
    return out;
}

// Validates the prefix and returns (kind, body).
std::pair<std::uint8_t, std::span<const std::uint8_t>> unframe(std::span<const std::uint8_t> framed)
{
    if (framed.size() < 5) throw ProtocolError("message shorter than its header");
    const std::uint32_t length = get_u32(framed);
    if (length == 0 || length > kMaxMessageBytes) throw ProtocolError("invalid message length");
    if (framed.size() - 4 != length) throw ProtocolError("message length prefix does not match payload");
    return {framed[4], framed.subspan(5)};
}

json parse_json_body(std::span<const std::uint8_t> body)
{
    auto j = json::parse(body.begin(), body.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("control message is not a JSON object");
    if (!j.contains("type") || !j["type"].is_string()) throw ProtocolError("control message lacks a type");
    return j;
}

template <class T>
T field(const json& j, const char* key)
{
    if (!j.contains(key)) throw ProtocolError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ProtocolError(std::string("field '") + key + "' has the wrong type");
    }
}

json patch_to_json(const ConfigPatch& p)
{
    json j;
    j["type"] = "config_patch";
    if (p.session_seed) j["session_seed"] = *p.session_seed;
    if (p.root_pitch_class) j["root_pitch_class"] = *p.root_pitch_class;
    if (p.scale_intervals) j["scale_intervals"] = *p.scale_intervals;
    if (p.midi_span) j["midi_span"] = {p.midi_span->low, p.midi_span->high};
    if (p.q_min) j["q_min"] = *p.q_min;
    if (p.q_max) j["q_max"] = *p.q_max;
    if (p.attack_s) j["attack_s"] = *p.attack_s;
    if (p.release_s) j["release_s"] = *p.release_s;
    if (p.partials) {
        json arr = json::array();
        for (const auto& partial : *p.partials) arr.push_back({{"harmonic", partial.harmonic}, {"gain", partial.gain}});
        j["partials"] = arr;
    }
    if (p.pixel_threshold) j["pixel_threshold"] = *p.pixel_threshold;
    if (p.cell_threshold) j["cell_threshold"] = *p.cell_threshold;
    if (p.release_frames) j["release_frames"] = *p.release_frames;
    if (p.master_gain) j["master_gain"] = *p.master_gain;
    return j;
}

ConfigPatch patch_from_json(const json& j)
{
    ConfigPatch p;
    for (const auto& [key, value] : j.items()) {
        if (key == "type") continue;
        if (key == "session_seed") p.session_seed = field<std::uint64_t>(j, "session_seed");
        else if (key == "root_pitch_class") p.root_pitch_class = field<int>(j, "root_pitch_class");
        else if (key == "scale_intervals") p.scale_intervals = field<std::vector<int>>(j, "scale_intervals");
        else if (key == "midi_span") {
            const auto span = field<std::vector<int>>(j, "midi_span");
            if (span.size() != 2) throw ProtocolError("midi_span must be [low, high]");
            p.midi_span = MidiSpan{span[0], span[1]};
        } else if (key == "q_min") p.q_min = field<double>(j, "q_min");
        else if (key == "q_max") p.q_max = field<double>(j, "q_max");
        else if (key == "attack_s") p.attack_s = field<double>(j, "attack_s");
        else if (key == "release_s") p.release_s = field<double>(j, "release_s");
        else if (key == "partials") {
            if (!value.is_array()) throw ProtocolError("partials must be an array");
            std::vector<PartialSpec> partials;
            for (const auto& item : value) {
                if (!item.is_object()) throw ProtocolError("partials entries must be objects");
                partials.push_back(PartialSpec{field<int>(item, "harmonic"), field<double>(item, "gain")});
            }
            p.partials = std::move(partials);
        } else if (key == "pixel_threshold") p.pixel_threshold = field<double>(j, "pixel_threshold");
        else if (key == "cell_threshold") p.cell_threshold = field<double>(j, "cell_threshold");
        else if (key == "release_frames") p.release_frames = field<int>(j, "release_frames");
        else if (key == "master_gain") p.master_gain = field<double>(j, "master_gain");
        else throw ProtocolError("unknown config_patch field '" + key + "'");
    }
    return p;
}

}  // namespace

std::vector<std::uint8_t> encode_message(const ClientMessage& message)
{
    return std::visit(
        [](const auto& m) -> std::vector<std::uint8_t> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Hello>) {
                return frame_json({{"type", "hello"},
                                   {"protocol_version", m.protocol_version},
                                   {"fps", m.fps},
                                   {"width", m.width},
                                   {"height", m.height}});
            } else if constexpr (std::is_same_v<T, FrameMessage>) {
                if (m.payload.size() + 9 > kMaxMessageBytes) throw ProtocolError("frame too large");
                std::vector<std::uint8_t> out;
                out.reserve(m.payload.size() + 13);
                put_u32(out, static_cast<std::uint32_t>(m.payload.size() + 9));
                out.push_back(kKindFrame);
                const auto index = static_cast<std::uint64_t>(m.frame_index);
                for (int shift = 0; shift < 64; shift += 8) out.push_back(static_cast<std::uint8_t>((index >> shift) & 0xff));
                out.insert(out.end(), m.payload.begin(), m.payload.end());
                return out;
            } else {
                return frame_json(patch_to_json(m));
            }
        },
        message);
}

std::vector<std::uint8_t> encode_message(const ServerMessage& message)
{
    return std::visit(
        [](const auto& m) -> std::vector<std::uint8_t> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Welcome>) {
                return frame_json({{"type", "welcome"},
                                   {"protocol_version", m.protocol_version},
                                   {"sample_rate", m.sample_rate},
                                   {"attack_s", m.attack_s},
                                   {"release_s", m.release_s},
                                   {"note_freqs", m.note_freqs}});
            } else if constexpr (std::is_same_v<T, NoteOnMessage>) {
                return frame_json({{"type", "note_on"},
                                   {"note_index", m.note_index},
                                   {"velocity", m.velocity},
                                   {"column", m.column},
                                   {"row", m.row},
                                   {"freq_hz", m.freq_hz},
                                   {"frame_index", m.frame_index}});
            } else if constexpr (std::is_same_v<T, NoteOffMessage>) {
                return frame_json({{"type", "note_off"}, {"note_index", m.note_index}, {"frame_index", m.frame_index}});
            } else if constexpr (std::is_same_v<T, EnvMessage>) {
                return frame_json({{"type", "env"},
                                   {"note_index", m.note_index},
                                   {"value", m.value},
                                   {"frame_index", m.frame_index}});
            } else if constexpr (std::is_same_v<T, StatsMessage>) {
                return frame_json({{"type", "stats"},
                                   {"clip_count", m.clip_count},
                                   {"rms", m.rms},
                                   {"frame_lag", m.frame_lag},
                                   {"dropped_events", m.dropped_events},
                                   {"frame_index", m.frame_index}});
            } else {
                return frame_json({{"type", "error"}, {"message", m.message}});
            }
        },
        message);
}

ClientMessage decode_client_message(std::span<const std::uint8_t> framed)
{
    const auto [kind, body] = unframe(framed);
    if (kind == kKindFrame) {
        if (body.size() < 8) throw ProtocolError("frame message shorter than its index");
        std::uint64_t index = 0;
        for (int i = 7; i >= 0; --i) index = (index << 8) | body[static_cast<std::size_t>(i)];
        if (index > static_cast<std::uint64_t>(INT64_MAX)) throw ProtocolError("frame index out of range");
        return FrameMessage{static_cast<std::int64_t>(index), std::vector<std::uint8_t>(body.begin() + 8, body.end())};
    }
    if (kind != kKindJson) throw ProtocolError("unknown message kind " + std::to_string(kind));
    const json j = parse_json_body(body);
    const auto type = j["type"].get<std::string>();
    if (type == "hello") {
        return Hello{field<int>(j, "protocol_version"), field<double>(j, "fps"), field<int>(j, "width"),
                     field<int>(j, "height")};
    }
    if (type == "config_patch") return patch_from_json(j);
    throw ProtocolError("unexpected client message type '" + type + "'");
}

ServerMessage decode_server_message(std::span<const std::uint8_t> framed)
{
    const auto [kind, body] = unframe(framed);
    if (kind != kKindJson) throw ProtocolError("server messages are JSON");
    const json j = parse_json_body(body);
    const auto type = j["type"].get<std::string>();
    if (type == "welcome") {
        return Welcome{field<int>(j, "protocol_version"), field<double>(j, "sample_rate"), field<double>(j, "attack_s"),
                       field<double>(j, "release_s"), field<std::vector<double>>(j, "note_freqs")};
    }
    if (type == "note_on") {
        return NoteOnMessage{field<int>(j, "note_index"), field<int>(j, "velocity"),     field<int>(j, "column"),
                             field<int>(j, "row"),        field<double>(j, "freq_hz"), field<std::int64_t>(j, "frame_index")};
    }
    if (type == "note_off") return NoteOffMessage{field<int>(j, "note_index"), field<std::int64_t>(j, "frame_index")};
    if (type == "env") {
        return EnvMessage{field<int>(j, "note_index"), field<double>(j, "value"), field<std::int64_t>(j, "frame_index")};
    }
    if (type == "stats") {
        return StatsMessage{field<std::uint64_t>(j, "clip_count"), field<double>(j, "rms"),
                            field<std::int64_t>(j, "frame_lag"), field<std::uint64_t>(j, "dropped_events"),
                            field<std::int64_t>(j, "frame_index")};
    }
    if (type == "error") return ErrorMessage{field<std::string>(j, "message")};
    throw ProtocolError("unexpected server message type '" + type + "'");
}

ServerMessage to_message(const NoteEvent& event)
{
    if (event.kind == NoteEventKind::note_on) {
        return NoteOnMessage{event.note_index, event.velocity, event.column, event.row, event.freq_hz, event.frame_index};
    }
    return NoteOffMessage{event.note_index, event.frame_index};
}

EngineConfig apply_patch(const EngineConfig& base, const ConfigPatch& patch)
{
    EngineConfig cfg = base;
    if (patch.session_seed) cfg.session_seed = *patch.session_seed;
    if (patch.root_pitch_class) cfg.root_pitch_class = *patch.root_pitch_class;
    if (patch.scale_intervals) cfg.scale_intervals = *patch.scale_intervals;
    if (patch.midi_span) cfg.midi_span = *patch.midi_span;
    if (patch.q_min) cfg.q_range.q_min = *patch.q_min;
    if (patch.q_max) cfg.q_range.q_max = *patch.q_max;
    if (patch.attack_s) cfg.attack_s = *patch.attack_s;
    if (patch.release_s) cfg.release_s = *patch.release_s;
    if (patch.partials) cfg.partials = *patch.partials;
    if (patch.pixel_threshold) cfg.pixel_threshold = *patch.pixel_threshold;
    if (patch.cell_threshold) cfg.cell_threshold = *patch.cell_threshold;
    if (patch.release_frames) cfg.release_frames = *patch.release_frames;
    if (patch.master_gain) cfg.master_gain = *patch.master_gain;
    validate(cfg);
    NoteTable::build(cfg.root_pitch_class, cfg.scale_intervals, cfg.midi_span);
    return cfg;
}

void MessageFramer::feed(std::span<const std::uint8_t> bytes)
{
    if (read_ > 0 && read_ == buffer_.size()) {
        buffer_.clear();
        read_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<std::vector<std::uint8_t>> MessageFramer::next()
{
    const std::span<const std::uint8_t> pending(buffer_.data() + read_, buffer_.size() - read_);
    if (pending.size() < 4) return std::nullopt;
    const std::uint32_t length = get_u32(pending);
    if (length == 0 || length > kMaxMessageBytes) throw ProtocolError("invalid message length");
    if (pending.size() - 4 < length) return std::nullopt;
    std::vector<std::uint8_t> message(pending.begin(), pending.begin() + 4 + length);
    read_ += 4 + length;
    if (read_ > (1u << 20) && read_ * 2 > buffer_.size()) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(read_));
        read_ = 0;
    }
    return message;
}

}  // namespace motionsynth
