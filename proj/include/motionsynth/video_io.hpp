#pragma once

#include <motionsynth/error.hpp>
#include <motionsynth/grid.hpp>
#include <motionsynth/mailbox.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace motionsynth {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// One RGB frame. Pixels are row-major, width*height entries.
struct VideoFrame {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;
    std::int64_t frame_index = 0;
    double timestamp = 0.0;

    [[nodiscard]] const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Throws VideoError::dimension if the frame cannot cover the 51x127 motion
/// grid or its pixel count disagrees with its dimensions.
void validate_frame(const VideoFrame& frame);

/// Builds an r=g=b frame from 8-bit gray values.
VideoFrame gray_frame(int width, int height, std::span<const std::uint8_t> gray,
                      std::int64_t frame_index = 0, double timestamp = 0.0);

// Still-image decoding, used by the image-sequence source. Dimensions are not
// checked against the grid floor here.
VideoFrame decode_pgm(std::span<const std::uint8_t> bytes);
VideoFrame load_png(const std::filesystem::path& path);
VideoFrame load_image(const std::filesystem::path& path);

/// Receives frames pushed by a live producer (the session service). Latest
/// wins: frames not consumed before the next push are dropped.
class LiveFrameMailbox {
public:
    void push(const VideoFrame& frame);
    /// Ends the stream; a consumer blocked in the live FrameStream returns.
    void close();

    [[nodiscard]] bool closed() const noexcept { return closed_.load(std::memory_order_acquire); }
    [[nodiscard]] std::uint64_t dropped() const noexcept { return box_.overwritten_count(); }

    LatestMailbox<VideoFrame>& box() noexcept { return box_; }

private:
    LatestMailbox<VideoFrame> box_;
    std::atomic<bool> closed_{false};
};

enum class SourceKind { image_sequence, y4m, live };

struct SourceDescriptor {
    SourceKind kind = SourceKind::y4m;
    std::filesystem::path path;
    std::shared_ptr<LiveFrameMailbox> live;
    double declared_fps = 30.0;
};

/// Picks image_sequence for directories and y4m for everything else.
SourceDescriptor describe_path(const std::filesystem::path& path, double fps);

/// Pull-based, single-consumer frame source.
class FrameStream {
public:
    virtual ~FrameStream() = default;

    /// Next frame in source order, or std::nullopt at end of stream. Every
    /// returned frame passes validate_frame; file-backed streams number frames
    /// 0,1,2,... and stamp them at frame_index / fps.
    virtual std::optional<VideoFrame> next_frame() = 0;

    [[nodiscard]] virtual double fps() const = 0;
};

/// Opens a source. Throws VideoError (unreadable, unsupported_format,
/// no_frames) or ConfigError for a non-positive fps.
std::unique_ptr<FrameStream> open_source(const SourceDescriptor& desc);

}  // namespace motionsynth
