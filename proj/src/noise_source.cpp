#include <motionsynth/noise_source.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace motionsynth {

MonoFrame to_monochrome(const VideoFrame& frame)
{
    MonoFrame mono{frame.width, frame.height, std::vector<double>(frame.pixels.size())};
    to_monochrome(frame.pixels, mono.values);
    return mono;
}

void to_monochrome(std::span<const Rgb> pixels, std::span<double> out)
{
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const auto& p = pixels[i];
        out[i] = (static_cast<double>(p.r) + p.g + p.b) / 3.0;
    }
}

std::vector<double> normalize(const MonoFrame& mono)
{
    std::vector<double> out(mono.values.size());
    normalize(mono.values, out);
    return out;
}

void normalize(std::span<const double> mono, std::span<double> out)
{
    std::transform(mono.begin(), mono.end(), out.begin(), normalize_value);
}

ShuffleGenerator::ShuffleGenerator(ShuffleKey key) noexcept
    : stream_(splitmix64_mix(key.session_seed ^ splitmix64_mix(static_cast<std::uint64_t>(key.frame_index) + kGamma)))
{
}

void shuffle_in_place(std::span<double> samples, ShuffleKey key)
{
    if (samples.empty()) throw std::invalid_argument("shuffle: empty sample sequence");
    const ShuffleGenerator gen(key);
    const std::size_t n = samples.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t j = i + gen.bounded(i, n - i);
        std::swap(samples[i], samples[j]);
    }
}

std::vector<double> shuffle(std::span<const double> samples, ShuffleKey key)
{
    std::vector<double> out(samples.begin(), samples.end());
    shuffle_in_place(out, key);
    return out;
}

SegmentQuota samples_per_frame(double sample_rate, double fps, double accumulator)
{
    if (!(sample_rate > 0.0) || !(fps > 0.0)) throw ConfigError("sample rate and fps must be > 0");
    const double total = accumulator + sample_rate / fps;
    const double whole = std::floor(total);
    return {static_cast<std::size_t>(whole), total - whole};
}

RateAdapter::RateAdapter(double sample_rate, double fps)
{
    if (!(sample_rate > 0.0) || !(fps > 0.0)) throw ConfigError("sample rate and fps must be > 0");
    quota_ = sample_rate / fps;
    if (quota_ < 1.0) throw ConfigError("sample rate must be at least one sample per frame");
}

std::size_t RateAdapter::next() noexcept
{
    const double total = accumulator_ + quota_;
    const double whole = std::floor(total);
    accumulator_ = total - whole;
    return static_cast<std::size_t>(whole);
}

std::size_t RateAdapter::max_count() const noexcept
{
    return static_cast<std::size_t>(std::ceil(quota_)) + 1;
}

NoiseSegment take_segment(std::span<const double> permuted, std::size_t count, std::int64_t frame_index,
                          double sample_rate)
{
    if (count == 0) throw std::invalid_argument("take_segment: count must be >= 1");
    NoiseSegment segment{std::vector<double>(count), sample_rate, frame_index};
    take_segment(permuted, segment.samples);
    return segment;
}

void take_segment(std::span<const double> permuted, std::span<double> out)
{
    if (permuted.empty()) throw std::invalid_argument("take_segment: empty sample sequence");
    std::size_t filled = 0;
    while (filled < out.size()) {
        const std::size_t chunk = std::min(permuted.size(), out.size() - filled);
        std::copy_n(permuted.begin(), chunk, out.begin() + static_cast<std::ptrdiff_t>(filled));
        filled += chunk;
    }
}

}  // namespace motionsynth
