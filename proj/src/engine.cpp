#include <motionsynth/engine.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace motionsynth {

void validate(const EngineConfig& cfg)
{
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(cfg.sample_rate)) throw ConfigError("sample_rate must be > 0");
    if (!positive(cfg.fps)) throw ConfigError("fps must be > 0");
    if (cfg.sample_rate / cfg.fps < 1.0) throw ConfigError("sample_rate/fps must be at least 1 sample per frame");
    if (!positive(cfg.attack_s) || !positive(cfg.release_s)) throw ConfigError("attack and release must be > 0");
    validate(cfg.q_range);
    if (cfg.block_size == 0) throw ConfigError("block_size must be >= 1");
    if (!(cfg.master_gain >= 0.0) || !std::isfinite(cfg.master_gain)) throw ConfigError("master_gain must be >= 0");
    if (!(cfg.pixel_threshold >= 0.0) || cfg.pixel_threshold > 255.0) {
        throw ConfigError("pixel_threshold must lie in [0, 255]");
    }
    try {
        validate(DetectorParams{cfg.cell_threshold, cfg.release_frames});
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    for (const auto& p : cfg.partials) {
        if (p.harmonic < 2) throw ConfigError("partial harmonic numbers must be >= 2");
        if (!(p.gain > 0.0) || p.gain > 1.0) throw ConfigError("partial gains must lie in (0, 1]");
    }
}

std::size_t apply_master_gain(std::span<const double> sum, double master_gain, std::span<float> out) noexcept
{
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = sum[i] * master_gain;
        if (v > 1.0) {
            v = 1.0;
            ++clipped;
        } else if (v < -1.0) {
            v = -1.0;
            ++clipped;
        }
        out[i] = static_cast<float>(v);
    }
    return clipped;
}

std::size_t master_mix(std::span<const std::span<const double>> voices, double master_gain, std::span<float> out)
{
    std::vector<double> sum(out.size(), 0.0);
    for (const auto& voice : voices) {
        if (voice.size() != out.size()) throw std::invalid_argument("master_mix: voice buffers differ in length");
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += voice[i];
    }
    return apply_master_gain(sum, master_gain, out);
}

Engine::Engine(EngineConfig cfg)
    : cfg_((validate(cfg), std::move(cfg))),
      table_(NoteTable::build(cfg_.root_pitch_class, cfg_.scale_intervals, cfg_.midi_span)),
      detector_{cfg_.cell_threshold, cfg_.release_frames},
      rate_(cfg_.sample_rate, cfg_.fps),
      grid_(std::make_unique<CellGrid>())
{
    build_voices();
    const std::size_t max_count = rate_.max_count();
    segment_.resize(max_count);
    voice_out_.resize(max_count);
    mix_.resize(max_count);
    audio_.resize(max_count);
    events_.reserve(2 * kGridColumns);
}

void Engine::build_voices()
{
    freqs_ = table_.frequencies();
    const VoiceParams params{cfg_.sample_rate, cfg_.q_range, cfg_.attack_s, cfg_.release_s, cfg_.block_size};
    voices_.clear();
    voices_.reserve(kGridColumns);
    for (const auto& entry : table_.entries()) {
        const auto partials = partial_set(entry.freq_hz, cfg_.sample_rate, cfg_.partials);
        voices_.emplace_back(entry.note_index, entry.freq_hz, partials, params);
    }
    gates_ = GateState{};
}

void Engine::reconfigure(EngineConfig cfg)
{
    validate(cfg);
    if (cfg.sample_rate != cfg_.sample_rate || cfg.fps != cfg_.fps) {
        throw ConfigError("sample_rate and fps cannot change on a running engine");
    }
    auto table = NoteTable::build(cfg.root_pitch_class, cfg.scale_intervals, cfg.midi_span);
    cfg_ = std::move(cfg);
    table_ = std::move(table);
    detector_ = DetectorParams{cfg_.cell_threshold, cfg_.release_frames};
    build_voices();
}

void Engine::prepare(int width, int height)
{
    if (width == width_ && height == height_ && reducer_) return;
    reducer_.emplace(width, height);
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    mono_.assign(n, 0.0);
    prev_mono_.assign(n, 0.0);
    noise_pool_.assign(n, 0.0);
    mask_.assign(n, 0);
    width_ = width;
    height_ = height;
}

void Engine::apply(const NoteEvent& event)
{
    auto& voice = voices_[static_cast<std::size_t>(event.note_index)];
    if (event.kind == NoteEventKind::note_on) {
        voice.gate_on(event.velocity / 127.0);
    } else {
        voice.gate_off();
    }
}

void Engine::trigger(int note_index, int velocity)
{
    if (note_index < 0 || note_index >= kGridColumns) throw std::out_of_range("note index outside 0..50");
    if (velocity < 1 || velocity > 127) throw std::out_of_range("velocity outside 1..127");
    voices_[static_cast<std::size_t>(note_index)].gate_on(velocity / 127.0);
}

FrameResult Engine::process_frame(const VideoFrame& frame)
{
    validate_frame(frame);
    if (frame.frame_index <= last_index_) {
        throw std::invalid_argument("frame index " + std::to_string(frame.frame_index) +
                                    " does not follow " + std::to_string(last_index_));
    }
    if (have_prev_ && (frame.width != width_ || frame.height != height_)) {
        throw std::invalid_argument("frame dimensions changed mid-stream");
    }
    prepare(frame.width, frame.height);

    // Noise source.
    to_monochrome(frame.pixels, mono_);
    normalize(mono_, noise_pool_);
    shuffle_in_place(noise_pool_, ShuffleKey{cfg_.session_seed, frame.frame_index});
    const std::size_t count = rate_.next();
    const std::span<double> segment(segment_.data(), count);
    take_segment(noise_pool_, segment);

    // Motion control.
    events_.clear();
    if (have_prev_) {
        frame_diff(prev_mono_, mono_, cfg_.pixel_threshold, mask_);
        reducer_->reduce(mask_, *grid_);
        detect_events(*grid_, gates_, detector_, frame.frame_index, freqs_, events_);
    }
    for (const auto& event : events_) apply(event);

    // Voices and mix.
    const std::span<double> mix(mix_.data(), count);
    const std::span<double> voice_out(voice_out_.data(), count);
    std::fill(mix.begin(), mix.end(), 0.0);
    for (auto& voice : voices_) {
        if (voice.idle()) continue;
        voice.render(segment, voice_out);
        for (std::size_t i = 0; i < count; ++i) mix[i] += voice_out[i];
    }
    const std::span<float> audio(audio_.data(), count);
    const std::size_t clipped = apply_master_gain(mix, cfg_.master_gain, audio);
    clip_count_ += clipped;

    std::swap(prev_mono_, mono_);
    have_prev_ = true;
    last_index_ = frame.frame_index;
    ++frames_processed_;
    return FrameResult{audio, events_, clipped};
}

void Engine::envelope_points(std::int64_t frame_index, std::vector<EnvelopePoint>& out) const
{
    for (const auto& voice : voices_) {
        if (voice.idle()) continue;
        out.push_back(EnvelopePoint{frame_index, voice.note_index(), voice.envelope().value()});
    }
}

int Engine::active_voices() const noexcept
{
    return static_cast<int>(std::count_if(voices_.begin(), voices_.end(), [](const NoteVoice& v) { return !v.idle(); }));
}

RenderOutput render_offline(Engine& engine, FrameStream& stream)
{
    if (engine.frames_processed() != 0) throw std::logic_error("render_offline needs a fresh engine");
    RenderOutput out;
    while (auto frame = stream.next_frame()) {
        const auto result = engine.process_frame(*frame);
        out.audio.insert(out.audio.end(), result.audio.begin(), result.audio.end());
        out.events.insert(out.events.end(), result.events.begin(), result.events.end());
        engine.envelope_points(frame->frame_index, out.envelope_trace);
        ++out.frames;
    }
    out.clip_count = engine.clip_count();
    return out;
}

}  // namespace motionsynth
