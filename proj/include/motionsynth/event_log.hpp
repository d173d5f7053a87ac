#pragma once

#include <motionsynth/motion_control.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace motionsynth {

/// One JSON object, no trailing newline. Keys in NoteEvent field order;
/// "velocity" only on note_on.
std::string to_json_line(const NoteEvent& event);

/// Throws std::runtime_error on malformed lines.
NoteEvent parse_json_line(std::string_view line);

void write_event_log(std::ostream& out, std::span<const NoteEvent> events);
void write_event_log_file(const std::filesystem::path& path, std::span<const NoteEvent> events);
std::vector<NoteEvent> read_event_log_file(const std::filesystem::path& path);

}  // namespace motionsynth
