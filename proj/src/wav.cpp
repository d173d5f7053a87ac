#include <motionsynth/wav.hpp>

#include <motionsynth/error.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace motionsynth {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5])
{
    out.insert(out.end(), tag, tag + 4);
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t pos)
{
    return static_cast<std::uint16_t>(b[pos] | (b[pos + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t pos)
{
    return static_cast<std::uint32_t>(b[pos]) | (static_cast<std::uint32_t>(b[pos + 1]) << 8) |
           (static_cast<std::uint32_t>(b[pos + 2]) << 16) | (static_cast<std::uint32_t>(b[pos + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t pos, const char* tag)
{
    return std::memcmp(b.data() + pos, tag, 4) == 0;
}

}  // namespace

WavFormat parse_wav_format(std::string_view name)
{
    if (name == "pcm16") return WavFormat::pcm16;
    if (name == "float32") return WavFormat::float32;
    throw ConfigError("unknown WAV format '" + std::string(name) + "' (pcm16|float32)");
}

std::vector<std::uint8_t> encode_wav(std::span<const float> samples, const WavSpec& spec)
{
    const bool is_float = spec.format == WavFormat::float32;
    const std::uint16_t bytes_per_sample = is_float ? 4 : 2;
    const auto data_size = static_cast<std::uint32_t>(samples.size() * bytes_per_sample);
    const std::uint32_t fmt_size = is_float ? 18 : 16;
    const std::uint32_t fact_size = is_float ? 12 : 0;
    const std::uint32_t riff_size = 4 + (8 + fmt_size) + fact_size + (8 + data_size);

    std::vector<std::uint8_t> out;
    out.reserve(8 + riff_size);
    put_tag(out, "RIFF");
    put_u32(out, riff_size);
    put_tag(out, "WAVE");

    put_tag(out, "fmt ");
    put_u32(out, fmt_size);
    put_u16(out, is_float ? kFormatFloat : kFormatPcm);
    put_u16(out, 1);  // mono
    put_u32(out, spec.sample_rate);
    put_u32(out, spec.sample_rate * bytes_per_sample);
    put_u16(out, bytes_per_sample);
    put_u16(out, static_cast<std::uint16_t>(bytes_per_sample * 8));
    if (is_float) {
        put_u16(out, 0);  // cbSize
        put_tag(out, "fact");
        put_u32(out, 4);
        put_u32(out, static_cast<std::uint32_t>(samples.size()));
    }

    put_tag(out, "data");
    put_u32(out, data_size);
    for (const float s : samples) {
        if (is_float) {
            put_u32(out, std::bit_cast<std::uint32_t>(s));
        } else {
            const long q = std::lround(std::clamp(static_cast<double>(s), -1.0, 1.0) * 32767.0);
            put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
        }
    }
    return out;
}

DecodedWav decode_wav(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
        throw std::runtime_error("not a RIFF/WAVE file");
    }
    DecodedWav wav;
    std::uint16_t format = 0;
    std::uint16_t bits = 0;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t size = get_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (size > bytes.size() - body) throw std::runtime_error("WAV chunk overruns file");
        if (tag_is(bytes, pos, "fmt ")) {
            if (size < 16) throw std::runtime_error("WAV fmt chunk too short");
            format = get_u16(bytes, body);
            if (get_u16(bytes, body + 2) != 1) throw std::runtime_error("only mono WAV is supported");
            wav.spec.sample_rate = get_u32(bytes, body + 4);
            bits = get_u16(bytes, body + 14);
            have_fmt = true;
        } else if (tag_is(bytes, pos, "data")) {
            if (!have_fmt) throw std::runtime_error("WAV data chunk before fmt chunk");
            if (format == kFormatPcm && bits == 16) {
                wav.spec.format = WavFormat::pcm16;
                wav.samples.resize(size / 2);
                for (std::size_t i = 0; i < wav.samples.size(); ++i) {
                    const auto v = static_cast<std::int16_t>(get_u16(bytes, body + 2 * i));
                    wav.samples[i] = static_cast<float>(v / 32767.0);
                }
            } else if (format == kFormatFloat && bits == 32) {
                wav.spec.format = WavFormat::float32;
                wav.samples.resize(size / 4);
                for (std::size_t i = 0; i < wav.samples.size(); ++i) {
                    wav.samples[i] = std::bit_cast<float>(get_u32(bytes, body + 4 * i));
                }
            } else {
                throw std::runtime_error("unsupported WAV sample format");
            }
            return wav;
        }
        pos = body + size + (size & 1);
    }
    throw std::runtime_error("WAV file has no data chunk");
}

void write_wav_file(const std::filesystem::path& path, std::span<const float> samples, const WavSpec& spec)
{
    const auto bytes = encode_wav(samples, spec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

DecodedWav read_wav_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_wav(bytes);
}

}  // namespace motionsynth
