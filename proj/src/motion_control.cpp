#include <motionsynth/motion_control.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace motionsynth {

ChangeMask frame_diff(const MonoFrame& prev, const MonoFrame& cur, double pixel_threshold)
{
    if (prev.width != cur.width || prev.height != cur.height || prev.values.size() != cur.values.size()) {
        throw std::invalid_argument("frame_diff: frame dimensions differ");
    }
    ChangeMask mask{cur.width, cur.height, std::vector<std::uint8_t>(cur.values.size())};
    frame_diff(prev.values, cur.values, pixel_threshold, mask.bits);
    return mask;
}

void frame_diff(std::span<const double> prev, std::span<const double> cur, double pixel_threshold,
                std::span<std::uint8_t> out)
{
    if (prev.size() != cur.size() || out.size() != cur.size()) {
        throw std::invalid_argument("frame_diff: frame dimensions differ");
    }
    for (std::size_t i = 0; i < cur.size(); ++i) {
        out[i] = std::abs(cur[i] - prev[i]) > pixel_threshold ? 1 : 0;
    }
}

GridReducer::GridReducer(int width, int height) : width_(width), height_(height)
{
    if (width < kGridColumns || height < kGridRows) {
        throw std::invalid_argument("mask " + std::to_string(width) + "x" + std::to_string(height) +
                                    " cannot cover the motion grid");
    }
    column_of_x_.resize(static_cast<std::size_t>(width));
    row_of_y_.resize(static_cast<std::size_t>(height));
    std::array<int, kGridColumns> col_count{};
    std::array<int, kGridRows> row_count{};
    for (int x = 0; x < width; ++x) {
        column_of_x_[static_cast<std::size_t>(x)] = cell_column(x, width);
        ++col_count[static_cast<std::size_t>(column_of_x_[static_cast<std::size_t>(x)])];
    }
    for (int y = 0; y < height; ++y) {
        row_of_y_[static_cast<std::size_t>(y)] = cell_row(y, height);
        ++row_count[static_cast<std::size_t>(row_of_y_[static_cast<std::size_t>(y)])];
    }
    for (int r = 0; r < kGridRows; ++r) {
        for (int c = 0; c < kGridColumns; ++c) {
            inv_pixels_[static_cast<std::size_t>(r) * kGridColumns + c] =
                1.0 / (static_cast<double>(col_count[static_cast<std::size_t>(c)]) * row_count[static_cast<std::size_t>(r)]);
        }
    }
}

void GridReducer::reduce(std::span<const std::uint8_t> mask, CellGrid& grid) const noexcept
{
    grid.activity.fill(0.0);
    for (int y = 0; y < height_; ++y) {
        const auto row_base = static_cast<std::size_t>(row_of_y_[static_cast<std::size_t>(y)]) * kGridColumns;
        const auto* bits = mask.data() + static_cast<std::size_t>(y) * width_;
        for (int x = 0; x < width_; ++x) {
            if (bits[x]) grid.activity[row_base + static_cast<std::size_t>(column_of_x_[static_cast<std::size_t>(x)])] += 1.0;
        }
    }
    for (std::size_t i = 0; i < grid.activity.size(); ++i) grid.activity[i] *= inv_pixels_[i];
}

CellGrid grid_reduce(const ChangeMask& mask)
{
    const GridReducer reducer(mask.width, mask.height);
    CellGrid grid;
    reducer.reduce(mask.bits, grid);
    return grid;
}

std::string_view to_string(NoteEventKind kind) noexcept
{
    return kind == NoteEventKind::note_on ? "note_on" : "note_off";
}

void validate(const DetectorParams& params)
{
    if (!(params.cell_threshold > 0.0) || params.cell_threshold > 1.0) {
        throw std::invalid_argument("cell threshold must lie in (0, 1]");
    }
    if (params.release_frames < 1) throw std::invalid_argument("release frames must be >= 1");
}

int velocity_from_row(int row)
{
    if (row < 0 || row >= kGridRows) throw std::out_of_range("grid row " + std::to_string(row) + " outside 0..126");
    return 127 - row;
}

void detect_events(const CellGrid& grid, GateState& gate, const DetectorParams& params, std::int64_t frame_index,
                   std::span<const double, kGridColumns> note_freqs, std::vector<NoteEvent>& out)
{
    for (int column = 0; column < kGridColumns; ++column) {
        bool active = false;
        double weight = 0.0;
        double weighted_row = 0.0;
        for (int row = 0; row < kGridRows; ++row) {
            const double a = grid.at(column, row);
            active = active || a >= params.cell_threshold;
            weight += a;
            weighted_row += a * row;
        }
        auto& col = gate.columns[static_cast<std::size_t>(column)];
        const double freq = note_freqs[static_cast<std::size_t>(column)];
        if (active) {
            col.inactive_frames = 0;
            if (!col.open) {
                const int row = static_cast<int>(std::lround(weighted_row / weight));
                col.open = true;
                col.row = row;
                out.push_back(NoteEvent{NoteEventKind::note_on, column, velocity_from_row(row), column, row,
                                        frame_index, freq});
            }
        } else if (col.open && ++col.inactive_frames >= params.release_frames) {
            col.open = false;
            col.inactive_frames = 0;
            out.push_back(NoteEvent{NoteEventKind::note_off, column, 0, column, col.row, frame_index, freq});
        }
    }
}

std::vector<NoteEvent> detect_events(const CellGrid& grid, GateState& gate, const DetectorParams& params,
                                     std::int64_t frame_index, std::span<const double, kGridColumns> note_freqs)
{
    std::vector<NoteEvent> out;
    detect_events(grid, gate, params, frame_index, note_freqs, out);
    return out;
}

}  // namespace motionsynth
