#pragma once

#include <motionsynth/grid.hpp>
#include <motionsynth/noise_source.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace motionsynth {

/// Row-major change flags (0/1), same dimensions as the source frames.
struct ChangeMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;
};

/// bits[i] = |cur[i] - prev[i]| > pixel_threshold. Throws std::invalid_argument
/// on a dimension mismatch.
ChangeMask frame_diff(const MonoFrame& prev, const MonoFrame& cur, double pixel_threshold = 16.0);
void frame_diff(std::span<const double> prev, std::span<const double> cur, double pixel_threshold,
                std::span<std::uint8_t> out);

/// Fraction of changed pixels per grid cell, indexed [row * kGridColumns + column].
struct CellGrid {
    std::array<double, kGridCells> activity{};

    [[nodiscard]] double at(int column, int row) const noexcept
    {
        return activity[static_cast<std::size_t>(row) * kGridColumns + column];
    }
    double& at(int column, int row) noexcept { return activity[static_cast<std::size_t>(row) * kGridColumns + column]; }
};

constexpr int cell_column(int x, int width) noexcept
{
    return static_cast<int>(static_cast<std::int64_t>(x) * kGridColumns / width);
}
constexpr int cell_row(int y, int height) noexcept
{
    return static_cast<int>(static_cast<std::int64_t>(y) * kGridRows / height);
}

/// Precomputed pixel->cell lookup for one frame size; reduce() is
/// allocation-free.
class GridReducer {
public:
    /// Throws std::invalid_argument when the frame cannot cover the grid.
    GridReducer(int width, int height);

    void reduce(std::span<const std::uint8_t> mask, CellGrid& grid) const noexcept;

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }

private:
    int width_;
    int height_;
    std::vector<int> column_of_x_;
    std::vector<int> row_of_y_;
    std::array<double, kGridCells> inv_pixels_{};
};

CellGrid grid_reduce(const ChangeMask& mask);

enum class NoteEventKind { note_on, note_off };

std::string_view to_string(NoteEventKind kind) noexcept;

struct NoteEvent {
    NoteEventKind kind = NoteEventKind::note_on;
    int note_index = 0;
    int velocity = 0;  // 1..127 for note_on, 0 for note_off
    int column = 0;
    int row = 0;
    std::int64_t frame_index = 0;
    double freq_hz = 0.0;

    friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

struct ColumnGate {
    bool open = false;
    int inactive_frames = 0;
    int row = 0;  // row of the note_on that opened the gate
};

struct GateState {
    std::array<ColumnGate, kGridColumns> columns{};
};

struct DetectorParams {
    double cell_threshold = 0.2;
    int release_frames = 3;
};

void validate(const DetectorParams& params);

/// 127 - row, so the top of the frame is loudest. Throws std::out_of_range.
int velocity_from_row(int row);

/// Per-column gate automaton. A column is active when any cell reaches
/// cell_threshold. A newly active column emits note_on at its
/// activity-weighted centroid row; an open column that stays inactive for
/// release_frames consecutive frames emits note_off. Events are appended to
/// `out` in column order; `note_freqs` supplies freq_hz.
void detect_events(const CellGrid& grid, GateState& gate, const DetectorParams& params, std::int64_t frame_index,
                   std::span<const double, kGridColumns> note_freqs, std::vector<NoteEvent>& out);

std::vector<NoteEvent> detect_events(const CellGrid& grid, GateState& gate, const DetectorParams& params,
                                     std::int64_t frame_index, std::span<const double, kGridColumns> note_freqs);

}  // namespace motionsynth
