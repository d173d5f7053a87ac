#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace motionsynth {

enum class WavFormat { pcm16, float32 };

/// Throws ConfigError for anything but "pcm16" / "float32".
WavFormat parse_wav_format(std::string_view name);

/// Mono RIFF/WAVE, little-endian.
struct WavSpec {
    std::uint32_t sample_rate = 48000;
    WavFormat format = WavFormat::pcm16;
};

/// pcm16 stores round(clamp(s, -1, 1) * 32767); float32 stores the IEEE-754
/// bits. The header is the canonical 44-byte form for pcm16 and carries a fact
/// chunk for float32 (WAVE_FORMAT_IEEE_FLOAT).
std::vector<std::uint8_t> encode_wav(std::span<const float> samples, const WavSpec& spec);

struct DecodedWav {
    WavSpec spec;
    std::vector<float> samples;
};

/// Inverse of encode_wav for mono pcm16 / float32 files. Throws
/// std::runtime_error on anything else.
DecodedWav decode_wav(std::span<const std::uint8_t> bytes);

void write_wav_file(const std::filesystem::path& path, std::span<const float> samples, const WavSpec& spec);
DecodedWav read_wav_file(const std::filesystem::path& path);

}  // namespace motionsynth
