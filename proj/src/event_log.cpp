#include <motionsynth/event_log.hpp>

#include <json.hpp>

#include <fstream>
#include <ostream>
#include <stdexcept>

namespace motionsynth {

std::string to_json_line(const NoteEvent& event)
{
    nlohmann::ordered_json j;
    j["kind"] = to_string(event.kind);
    j["note_index"] = event.note_index;
    if (event.kind == NoteEventKind::note_on) j["velocity"] = event.velocity;
    j["column"] = event.column;
    j["row"] = event.row;
    j["frame_index"] = event.frame_index;
    j["freq_hz"] = event.freq_hz;
    return j.dump();
}

NoteEvent parse_json_line(std::string_view line)
{
    try {
        const auto j = nlohmann::json::parse(line);
        NoteEvent event;
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "note_on") {
            event.kind = NoteEventKind::note_on;
            event.velocity = j.at("velocity").get<int>();
        } else if (kind == "note_off") {
            event.kind = NoteEventKind::note_off;
            if (j.contains("velocity")) throw std::runtime_error("note_off carries a velocity");
        } else {
            throw std::runtime_error("unknown event kind '" + kind + "'");
        }
        event.note_index = j.at("note_index").get<int>();
        event.column = j.at("column").get<int>();
        event.row = j.at("row").get<int>();
        event.frame_index = j.at("frame_index").get<std::int64_t>();
        event.freq_hz = j.at("freq_hz").get<double>();
        return event;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed event line: ") + e.what());
    }
}

void write_event_log(std::ostream& out, std::span<const NoteEvent> events)
{
    for (const auto& event : events) out << to_json_line(event) << '\n';
}

void write_event_log_file(const std::filesystem::path& path, std::span<const NoteEvent> events)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_event_log(out, events);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<NoteEvent> read_event_log_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<NoteEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) events.push_back(parse_json_line(line));
    }
    return events;
}

}  // namespace motionsynth
