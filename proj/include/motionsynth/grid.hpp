#pragma once

namespace motionsynth {

// The motion grid doubles as the note range (columns) and velocity range
// (rows). It is fixed, not configurable.
inline constexpr int kGridColumns = 51;
inline constexpr int kGridRows = 127;
inline constexpr int kGridCells = kGridColumns * kGridRows;

}  // namespace motionsynth
