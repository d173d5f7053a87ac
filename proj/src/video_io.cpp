#include <motionsynth/video_io.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace motionsynth {

void validate_frame(const VideoFrame& frame)
{
    if (frame.width < kGridColumns || frame.height < kGridRows) {
        std::ostringstream msg;
        msg << "frame " << frame.width << "x" << frame.height << " is smaller than the "
            << kGridColumns << "x" << kGridRows << " motion grid";
        throw VideoError(VideoError::Kind::dimension, msg.str());
    }
    if (frame.pixels.size() != static_cast<std::size_t>(frame.width) * static_cast<std::size_t>(frame.height)) {
        throw VideoError(VideoError::Kind::dimension, "pixel count does not match frame dimensions");
    }
}

VideoFrame gray_frame(int width, int height, std::span<const std::uint8_t> gray,
                      std::int64_t frame_index, double timestamp)
{
    VideoFrame frame;
    frame.width = width;
    frame.height = height;
    frame.frame_index = frame_index;
    frame.timestamp = timestamp;
    frame.pixels.resize(gray.size());
    std::transform(gray.begin(), gray.end(), frame.pixels.begin(), [](std::uint8_t v) { return Rgb{v, v, v}; });
    return frame;
}

void LiveFrameMailbox::push(const VideoFrame& frame)
{
    box_.publish(frame);
}

void LiveFrameMailbox::close()
{
    closed_.store(true, std::memory_order_release);
    box_.interrupt();
}

namespace {

void require_fps(double fps)
{
    if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigError("declared fps must be > 0");
}

class ImageSequenceStream final : public FrameStream {
public:
    ImageSequenceStream(std::vector<std::filesystem::path> files, double fps)
        : files_(std::move(files)), fps_(fps) {}

    std::optional<VideoFrame> next_frame() override
    {
        if (next_ >= files_.size()) return std::nullopt;
        VideoFrame frame = load_image(files_[next_]);
        validate_frame(frame);
        if (next_ == 0) {
            width_ = frame.width;
            height_ = frame.height;
        } else if (frame.width != width_ || frame.height != height_) {
            throw VideoError(VideoError::Kind::dimension,
                             files_[next_].filename().string() + ": dimensions differ from the first frame");
        }
        frame.frame_index = static_cast<std::int64_t>(next_);
        frame.timestamp = static_cast<double>(next_) / fps_;
        ++next_;
        return frame;
    }

    [[nodiscard]] double fps() const override { return fps_; }

private:
    std::vector<std::filesystem::path> files_;
    double fps_;
    std::size_t next_ = 0;
    int width_ = 0;
    int height_ = 0;
};

std::unique_ptr<FrameStream> open_image_sequence(const SourceDescriptor& desc)
{
    std::error_code ec;
    if (!std::filesystem::is_directory(desc.path, ec)) {
        throw VideoError(VideoError::Kind::unreadable, "not a readable directory: " + desc.path.string());
    }
    std::vector<std::filesystem::path> files;
    std::filesystem::directory_iterator it(desc.path, ec);
    if (ec) throw VideoError(VideoError::Kind::unreadable, desc.path.string() + ": " + ec.message());
    for (const auto& entry : it) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
    }
    if (files.empty()) throw VideoError(VideoError::Kind::no_frames, "no frames in " + desc.path.string());
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        return a.filename().string() < b.filename().string();
    });
    return std::make_unique<ImageSequenceStream>(std::move(files), desc.declared_fps);
}

// YUV4MPEG2 reader. Accepts C444 (full-range BT.601 YCbCr) and Cmono.
class Y4mStream final : public FrameStream {
public:
    Y4mStream(const std::filesystem::path& path, double fps) : in_(path, std::ios::binary), fps_(fps)
    {
        if (!in_) throw VideoError(VideoError::Kind::unreadable, "cannot open " + path.string());
        std::string header;
        if (!std::getline(in_, header) || header.rfind("YUV4MPEG2", 0) != 0) {
            throw VideoError(VideoError::Kind::unsupported_format, path.string() + ": not a YUV4MPEG2 file");
        }
        std::string colorspace = "420";
        std::istringstream fields(header.substr(9));
        std::string field;
        try {
            while (fields >> field) {
                switch (field[0]) {
                case 'W': width_ = std::stoi(field.substr(1)); break;
                case 'H': height_ = std::stoi(field.substr(1)); break;
                case 'C': colorspace = field.substr(1); break;
                default: break;
                }
            }
        } catch (const std::logic_error&) {
            throw VideoError(VideoError::Kind::decode, path.string() + ": malformed Y4M header field '" + field + "'");
        }
        if (width_ <= 0 || height_ <= 0) {
            throw VideoError(VideoError::Kind::decode, path.string() + ": missing W/H in Y4M header");
        }
        if (colorspace == "444") {
            planes_ = 3;
        } else if (colorspace == "mono") {
            planes_ = 1;
        } else {
            throw VideoError(VideoError::Kind::unsupported_format,
                             "Y4M colorspace C" + colorspace + " unsupported (need 444 or mono)");
        }
        if (in_.peek() == std::char_traits<char>::eof()) {
            throw VideoError(VideoError::Kind::no_frames, "no frames in " + path.string());
        }
        raster_.resize(static_cast<std::size_t>(width_) * height_ * planes_);
    }

    std::optional<VideoFrame> next_frame() override
    {
        if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;
        std::string marker;
        if (!std::getline(in_, marker) || marker.rfind("FRAME", 0) != 0) {
            throw VideoError(VideoError::Kind::decode, "Y4M: expected FRAME marker at frame " + std::to_string(index_));
        }
        in_.read(reinterpret_cast<char*>(raster_.data()), static_cast<std::streamsize>(raster_.size()));
        if (static_cast<std::size_t>(in_.gcount()) != raster_.size()) {
            throw VideoError(VideoError::Kind::decode, "Y4M: truncated frame " + std::to_string(index_));
        }
        VideoFrame frame;
        frame.width = width_;
        frame.height = height_;
        const std::size_t n = static_cast<std::size_t>(width_) * height_;
        frame.pixels.resize(n);
        if (planes_ == 1) {
            for (std::size_t i = 0; i < n; ++i) frame.pixels[i] = Rgb{raster_[i], raster_[i], raster_[i]};
        } else {
            const auto* y = raster_.data();
            const auto* cb = y + n;
            const auto* cr = cb + n;
            for (std::size_t i = 0; i < n; ++i) frame.pixels[i] = ycbcr_to_rgb(y[i], cb[i], cr[i]);
        }
        validate_frame(frame);
        frame.frame_index = index_;
        frame.timestamp = static_cast<double>(index_) / fps_;
        ++index_;
        return frame;
    }

    [[nodiscard]] double fps() const override { return fps_; }

private:
    static std::uint8_t clamp_byte(double v)
    {
        return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }

    static Rgb ycbcr_to_rgb(std::uint8_t y, std::uint8_t cb, std::uint8_t cr)
    {
        const double u = cb - 128.0;
        const double v = cr - 128.0;
        return Rgb{clamp_byte(y + 1.402 * v), clamp_byte(y - 0.344136 * u - 0.714136 * v),
                   clamp_byte(y + 1.772 * u)};
    }

    std::ifstream in_;
    double fps_;
    int width_ = 0;
    int height_ = 0;
    int planes_ = 0;
    std::vector<std::uint8_t> raster_;
    std::int64_t index_ = 0;
};

class LiveStream final : public FrameStream {
public:
    LiveStream(std::shared_ptr<LiveFrameMailbox> mailbox, double fps) : mailbox_(std::move(mailbox)), fps_(fps) {}

    std::optional<VideoFrame> next_frame() override
    {
        auto& box = mailbox_->box();
        for (;;) {
            const auto seen = box.published_count();
            if (const VideoFrame* frame = box.take()) {
                validate_frame(*frame);
                if (frame->frame_index <= last_index_) {
                    throw VideoError(VideoError::Kind::decode, "live frame index did not increase");
                }
                last_index_ = frame->frame_index;
                return *frame;
            }
            if (mailbox_->closed()) return std::nullopt;
            box.wait_past(seen);
        }
    }

    [[nodiscard]] double fps() const override { return fps_; }

private:
    std::shared_ptr<LiveFrameMailbox> mailbox_;
    double fps_;
    std::int64_t last_index_ = -1;
};

}  // namespace

SourceDescriptor describe_path(const std::filesystem::path& path, double fps)
{
    SourceDescriptor desc;
    std::error_code ec;
    desc.kind = std::filesystem::is_directory(path, ec) ? SourceKind::image_sequence : SourceKind::y4m;
    desc.path = path;
    desc.declared_fps = fps;
    return desc;
}

std::unique_ptr<FrameStream> open_source(const SourceDescriptor& desc)
{
    require_fps(desc.declared_fps);
    switch (desc.kind) {
    case SourceKind::image_sequence: return open_image_sequence(desc);
    case SourceKind::y4m: return std::make_unique<Y4mStream>(desc.path, desc.declared_fps);
    case SourceKind::live:
        if (!desc.live) throw VideoError(VideoError::Kind::unreadable, "live source without a mailbox");
        return std::make_unique<LiveStream>(desc.live, desc.declared_fps);
    }
    throw VideoError(VideoError::Kind::unsupported_format, "unknown source kind");
}

}  // namespace motionsynth
