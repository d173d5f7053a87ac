#include <motionsynth/video_io.hpp>

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace motionsynth {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::span<const std::uint8_t> bytes, std::size_t& pos)
{
    while (pos < bytes.size()) {
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(bytes[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    std::string token;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
        token.push_back(static_cast<char>(bytes[pos++]));
    }
    return token;
}

int pgm_int(std::span<const std::uint8_t> bytes, std::size_t& pos)
{
    const auto token = pgm_token(bytes, pos);
    if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw VideoError(VideoError::Kind::decode, "PGM: malformed header field '" + token + "'");
    }
    if (token.size() > 6) throw VideoError(VideoError::Kind::decode, "PGM: header value out of range");
    return std::stoi(token);
}

}  // namespace

VideoFrame decode_pgm(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P') {
        throw VideoError(VideoError::Kind::unsupported_format, "not a PGM file");
    }
    if (bytes[1] != '5') {
        throw VideoError(VideoError::Kind::unsupported_format, "only binary PGM (P5) is supported");
    }
    std::size_t pos = 2;
    const int width = pgm_int(bytes, pos);
    const int height = pgm_int(bytes, pos);
    const int maxval = pgm_int(bytes, pos);
    if (maxval != 255) {
        throw VideoError(VideoError::Kind::unsupported_format,
                         "PGM maxval " + std::to_string(maxval) + " unsupported (need 255)");
    }
    if (width <= 0 || height <= 0) throw VideoError(VideoError::Kind::decode, "PGM: empty image");
    // Exactly one whitespace byte separates the header from the raster.
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw VideoError(VideoError::Kind::decode, "PGM: truncated header");
    }
    ++pos;
    const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - pos < count) throw VideoError(VideoError::Kind::decode, "PGM: truncated raster");
    return gray_frame(width, height, bytes.subspan(pos, count));
}

VideoFrame load_png(const std::filesystem::path& path)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw VideoError(VideoError::Kind::decode, path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    VideoFrame frame;
    frame.width = static_cast<int>(image.width);
    frame.height = static_cast<int>(image.height);
    frame.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
    static_assert(sizeof(Rgb) == 3);
    if (!png_image_finish_read(&image, nullptr, frame.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw VideoError(VideoError::Kind::decode, path.string() + ": " + image.message);
    }
    return frame;
}

VideoFrame load_image(const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png") return load_png(path);
    if (ext == ".pgm") {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw VideoError(VideoError::Kind::unreadable, "cannot open " + path.string());
        const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        return decode_pgm(bytes);
    }
    throw VideoError(VideoError::Kind::unsupported_format, "unsupported image format: " + path.string());
}

}  // namespace motionsynth
