#pragma once

#include <motionsynth/grid.hpp>

#include <array>
#include <string_view>
#include <vector>

namespace motionsynth {

/// 12-TET, A4 (midi 69) = 440 Hz. Throws std::out_of_range outside 0..127.
double midi_to_freq(int midi);

struct NoteEntry {
    int note_index = 0;
    int midi = 0;
    double freq_hz = 0.0;
};

struct MidiSpan {
    int low = 21;   // A0
    int high = 108; // C8

    friend bool operator==(const MidiSpan&, const MidiSpan&) = default;
};

inline const std::vector<int> kMajorScale{0, 2, 4, 5, 7, 9, 11};
inline const std::vector<int> kChromaticScale{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};

/// Exactly kGridColumns notes, one per motion-grid column, ascending.
class NoteTable {
public:
    /// Collects every midi in `span` whose pitch class is in the scale
    /// (relative to `root_pitch_class`) and drops the highest until
    /// kGridColumns remain. Throws ConfigError when too few qualify.
    static NoteTable build(int root_pitch_class, const std::vector<int>& scale_intervals,
                           MidiSpan span = {});

    [[nodiscard]] const std::array<NoteEntry, kGridColumns>& entries() const noexcept { return entries_; }
    [[nodiscard]] const NoteEntry& operator[](int note_index) const { return entries_.at(static_cast<std::size_t>(note_index)); }
    [[nodiscard]] std::array<double, kGridColumns> frequencies() const noexcept;
    [[nodiscard]] int root_pitch_class() const noexcept { return root_; }
    [[nodiscard]] const std::vector<int>& scale_intervals() const noexcept { return scale_; }

private:
    std::array<NoteEntry, kGridColumns> entries_{};
    int root_ = 0;
    std::vector<int> scale_;
};

/// "C", "F#", "Bb", ... or a bare pitch class "0".."11". Throws ConfigError.
int parse_pitch_class(std::string_view name);

}  // namespace motionsynth
