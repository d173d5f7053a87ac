#pragma once

#include <motionsynth/wav.hpp>

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace motionsynth {

/// Destination for the live engine's mono output.
class AudioSink {
public:
    virtual ~AudioSink() = default;
    /// May block to pace the caller (a hardware device does).
    virtual void write(std::span<const float> samples) = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
};

/// Discards audio.
class NullSink final : public AudioSink {
public:
    void write(std::span<const float> samples) override { written_ += samples.size(); }
    [[nodiscard]] std::string describe() const override { return "null"; }
    [[nodiscard]] std::size_t written() const noexcept { return written_; }

private:
    std::size_t written_ = 0;
};

/// Collects the session and writes a WAV file on destruction.
class WavRecorderSink final : public AudioSink {
public:
    WavRecorderSink(std::filesystem::path path, WavSpec spec);
    ~WavRecorderSink() override;
    void write(std::span<const float> samples) override;
    [[nodiscard]] std::string describe() const override { return "wav:" + path_.string(); }

private:
    std::filesystem::path path_;
    WavSpec spec_;
    std::vector<float> samples_;
};

/// Builds a sink from a CLI spec: "default" (the host's default ALSA
/// playback device, loaded at runtime), "null", or "wav:PATH".
/// Throws ConfigError("audio device unavailable: ...") when the default
/// device cannot be opened.
std::unique_ptr<AudioSink> make_audio_sink(const std::string& spec, unsigned sample_rate,
                                           WavFormat wav_format = WavFormat::pcm16);

}  // namespace motionsynth
