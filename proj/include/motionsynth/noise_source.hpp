#pragma once

#include <motionsynth/video_io.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace motionsynth {

/// Per-pixel channel average, kept real-valued (no 8-bit re-quantization).
struct MonoFrame {
    int width = 0;
    int height = 0;
    std::vector<double> values;
};

MonoFrame to_monochrome(const VideoFrame& frame);
/// Allocation-free variant; `out` must hold width*height values.
void to_monochrome(std::span<const Rgb> pixels, std::span<double> out);

/// Affine map [0,255] -> [-1,1], hitting both endpoints exactly.
constexpr double normalize_value(double v) noexcept { return v / 127.5 - 1.0; }

std::vector<double> normalize(const MonoFrame& mono);
void normalize(std::span<const double> mono, std::span<double> out);

struct ShuffleKey {
    std::uint64_t session_seed = 0;
    std::int64_t frame_index = 0;
};

__extension__ typedef unsigned __int128 uint128_for_shuffle;

/// SplitMix64 output mixer (Steele, Lea & Flood; Vigna's constants).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: draw(i) is a pure function of (key, i), so any
/// frame's permutation can be rebuilt without replaying earlier frames.
class ShuffleGenerator {
public:
    explicit ShuffleGenerator(ShuffleKey key) noexcept;

    [[nodiscard]] std::uint64_t draw(std::uint64_t counter) const noexcept
    {
        return splitmix64_mix(stream_ + (counter + 1) * kGamma);
    }

    /// Uniform integer in [0, bound) by Lemire's multiply-shift reduction.
    [[nodiscard]] std::uint64_t bounded(std::uint64_t counter, std::uint64_t bound) const noexcept
    {
        return static_cast<std::uint64_t>((static_cast<uint128_for_shuffle>(draw(counter)) * bound) >> 64);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    std::uint64_t stream_;
};

/// Forward Fisher-Yates: step i swaps slot i with a slot drawn from [i, n).
/// Throws std::invalid_argument on empty input.
std::vector<double> shuffle(std::span<const double> samples, ShuffleKey key);
void shuffle_in_place(std::span<double> samples, ShuffleKey key);

/// Result of one rate-adaptation step.
struct SegmentQuota {
    std::size_t count = 0;
    double accumulator = 0.0;
};

/// count = floor(accumulator + sample_rate/fps); the fractional remainder is
/// carried, so the long-run mean count is exactly sample_rate/fps.
SegmentQuota samples_per_frame(double sample_rate, double fps, double accumulator);

/// Stateful wrapper around samples_per_frame.
class RateAdapter {
public:
    RateAdapter(double sample_rate, double fps);

    std::size_t next() noexcept;

    /// Upper bound on any count next() can return.
    [[nodiscard]] std::size_t max_count() const noexcept;
    [[nodiscard]] double accumulator() const noexcept { return accumulator_; }

private:
    double quota_;
    double accumulator_ = 0.0;
};

struct NoiseSegment {
    std::vector<double> samples;
    double sample_rate = 0.0;
    std::int64_t frame_index = 0;
};

/// First `count` permuted samples, cycling through the sequence when it is
/// shorter than `count`. Throws std::invalid_argument if count is 0 or the
/// sequence is empty.
NoiseSegment take_segment(std::span<const double> permuted, std::size_t count, std::int64_t frame_index,
                          double sample_rate);
void take_segment(std::span<const double> permuted, std::span<double> out);

}  // namespace motionsynth
