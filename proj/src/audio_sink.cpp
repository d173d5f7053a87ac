#include <motionsynth/audio_sink.hpp>

#include <motionsynth/error.hpp>

#include <dlfcn.h>

#include <iostream>

namespace motionsynth {

WavRecorderSink::WavRecorderSink(std::filesystem::path path, WavSpec spec) : path_(std::move(path)), spec_(spec) {}

WavRecorderSink::~WavRecorderSink()
{
    try {
        write_wav_file(path_, samples_, spec_);
    } catch (const std::exception& e) {
        std::cerr << "motionsynth: " << e.what() << '\n';
    }
}

void WavRecorderSink::write(std::span<const float> samples)
{
    samples_.insert(samples_.end(), samples.begin(), samples.end());
}

namespace {

// Minimal slice of the ALSA PCM API, resolved with dlopen so the build does
// not depend on ALSA headers being installed.
class AlsaSink final : public AudioSink {
public:
    explicit AlsaSink(unsigned sample_rate)
    {
        lib_ = ::dlopen("libasound.so.2", RTLD_NOW | RTLD_LOCAL);
        if (!lib_) throw ConfigError(std::string("audio device unavailable: ") + ::dlerror());
        open_ = reinterpret_cast<OpenFn>(::dlsym(lib_, "snd_pcm_open"));
        set_params_ = reinterpret_cast<SetParamsFn>(::dlsym(lib_, "snd_pcm_set_params"));
        writei_ = reinterpret_cast<WriteiFn>(::dlsym(lib_, "snd_pcm_writei"));
        recover_ = reinterpret_cast<RecoverFn>(::dlsym(lib_, "snd_pcm_recover"));
        drain_ = reinterpret_cast<HandleFn>(::dlsym(lib_, "snd_pcm_drain"));
        close_ = reinterpret_cast<HandleFn>(::dlsym(lib_, "snd_pcm_close"));
        if (!open_ || !set_params_ || !writei_ || !recover_ || !drain_ || !close_) {
            ::dlclose(lib_);
            throw ConfigError("audio device unavailable: libasound lacks the PCM API");
        }
        if (open_(&pcm_, "default", kStreamPlayback, 0) < 0) {
            ::dlclose(lib_);
            throw ConfigError("audio device unavailable: cannot open the default playback device");
        }
        if (set_params_(pcm_, kFormatFloatLe, kAccessRwInterleaved, 1, sample_rate, 1, 100000) < 0) {
            close_(pcm_);
            ::dlclose(lib_);
            throw ConfigError("audio device unavailable: device rejected mono float32 playback");
        }
    }

    ~AlsaSink() override
    {
        drain_(pcm_);
        close_(pcm_);
        ::dlclose(lib_);
    }

    void write(std::span<const float> samples) override
    {
        while (!samples.empty()) {
            long n = writei_(pcm_, samples.data(), samples.size());
            if (n < 0) {
                if (recover_(pcm_, static_cast<int>(n), 1) < 0) return;
                continue;
            }
            samples = samples.subspan(static_cast<std::size_t>(n));
        }
    }

    [[nodiscard]] std::string describe() const override { return "alsa:default"; }

private:
    using OpenFn = int (*)(void**, const char*, int, int);
    using SetParamsFn = int (*)(void*, int, int, unsigned, unsigned, int, unsigned);
    using WriteiFn = long (*)(void*, const void*, unsigned long);
    using RecoverFn = int (*)(void*, int, int);
    using HandleFn = int (*)(void*);

    static constexpr int kStreamPlayback = 0;
    static constexpr int kFormatFloatLe = 14;
    static constexpr int kAccessRwInterleaved = 3;

    void* lib_ = nullptr;
    void* pcm_ = nullptr;
    OpenFn open_ = nullptr;
    SetParamsFn set_params_ = nullptr;
    WriteiFn writei_ = nullptr;
    RecoverFn recover_ = nullptr;
    HandleFn drain_ = nullptr;
    HandleFn close_ = nullptr;
};

}  // namespace

std::unique_ptr<AudioSink> make_audio_sink(const std::string& spec, unsigned sample_rate, WavFormat wav_format)
{
    if (spec == "null") return std::make_unique<NullSink>();
    if (spec.rfind("wav:", 0) == 0 && spec.size() > 4) {
        return std::make_unique<WavRecorderSink>(spec.substr(4), WavSpec{sample_rate, wav_format});
    }
    if (spec == "default") return std::make_unique<AlsaSink>(sample_rate);
    throw ConfigError("unknown audio output '" + spec + "' (default|null|wav:PATH)");
}

}  // namespace motionsynth
