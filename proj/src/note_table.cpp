#include <motionsynth/note_table.hpp>

#include <motionsynth/error.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace motionsynth {

double midi_to_freq(int midi)
{
    if (midi < 0 || midi > 127) throw std::out_of_range("midi note " + std::to_string(midi) + " outside 0..127");
    return 440.0 * std::exp2((midi - 69) / 12.0);
}

NoteTable NoteTable::build(int root_pitch_class, const std::vector<int>& scale_intervals, MidiSpan span)
{
    if (root_pitch_class < 0 || root_pitch_class > 11) throw ConfigError("root pitch class must be 0..11");
    if (scale_intervals.empty()) throw ConfigError("scale must contain at least one interval");
    for (int step : scale_intervals) {
        if (step < 0 || step > 11) throw ConfigError("scale intervals must be 0..11");
    }
    if (span.low < 0 || span.high > 127 || span.low > span.high) throw ConfigError("midi span must lie in 0..127");

    std::array<bool, 12> in_scale{};
    for (int step : scale_intervals) in_scale[static_cast<std::size_t>((root_pitch_class + step) % 12)] = true;

    NoteTable table;
    table.root_ = root_pitch_class;
    table.scale_ = scale_intervals;
    std::sort(table.scale_.begin(), table.scale_.end());
    table.scale_.erase(std::unique(table.scale_.begin(), table.scale_.end()), table.scale_.end());

    int count = 0;
    for (int midi = span.low; midi <= span.high && count < kGridColumns; ++midi) {
        if (!in_scale[static_cast<std::size_t>(midi % 12)]) continue;
        table.entries_[static_cast<std::size_t>(count)] = NoteEntry{count, midi, midi_to_freq(midi)};
        ++count;
    }
    if (count < kGridColumns) {
        throw ConfigError("scale over midi " + std::to_string(span.low) + ".." + std::to_string(span.high) +
                          " yields " + std::to_string(count) + " notes; the grid needs " +
                          std::to_string(kGridColumns));
    }
    return table;
}

std::array<double, kGridColumns> NoteTable::frequencies() const noexcept
{
    std::array<double, kGridColumns> out{};
    std::transform(entries_.begin(), entries_.end(), out.begin(), [](const NoteEntry& e) { return e.freq_hz; });
    return out;
}

int parse_pitch_class(std::string_view name)
{
    if (name.empty()) throw ConfigError("empty note name");
    if (std::all_of(name.begin(), name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        const int pc = std::stoi(std::string(name));
        if (pc > 11) throw ConfigError("pitch class must be 0..11");
        return pc;
    }
    static constexpr int kNatural[7] = {9, 11, 0, 2, 4, 5, 7};  // A..G
    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    if (letter < 'A' || letter > 'G') throw ConfigError("unknown note name '" + std::string(name) + "'");
    int pc = kNatural[letter - 'A'];
    for (char accidental : name.substr(1)) {
        if (accidental == '#') {
            ++pc;
        } else if (accidental == 'b') {
            --pc;
        } else {
            throw ConfigError("unknown note name '" + std::string(name) + "'");
        }
    }
    return (pc % 12 + 12) % 12;
}

}  // namespace motionsynth
