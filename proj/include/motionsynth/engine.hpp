#pragma once

#include <motionsynth/envelope.hpp>
#include <motionsynth/motion_control.hpp>
#include <motionsynth/noise_source.hpp>
#include <motionsynth/note_table.hpp>
#include <motionsynth/video_io.hpp>
#include <motionsynth/voice.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace motionsynth {

struct EngineConfig {
    double sample_rate = 48000.0;
    double fps = 30.0;
    std::uint64_t session_seed = 0;
    int root_pitch_class = 0;
    std::vector<int> scale_intervals = kMajorScale;
    MidiSpan midi_span{};
    QRange q_range{};
    double attack_s = 0.08;
    double release_s = 0.6;
    std::vector<PartialSpec> partials = kDefaultPartials;
    double pixel_threshold = 16.0;
    double cell_threshold = 0.2;
    int release_frames = 3;
    std::size_t block_size = 64;
    double master_gain = 0.7;
};

/// Throws ConfigError describing the first invalid field.
void validate(const EngineConfig& cfg);

/// Sum the voice buffers, scale by master_gain, hard-clamp to [-1,1].
/// Returns the number of clamped samples. Buffers must share out's length.
std::size_t master_mix(std::span<const std::span<const double>> voices, double master_gain, std::span<float> out);

/// The scaling and clamping half of master_mix, for an already summed buffer.
std::size_t apply_master_gain(std::span<const double> sum, double master_gain, std::span<float> out) noexcept;

struct EnvelopePoint {
    std::int64_t frame_index = 0;
    int note_index = 0;
    double value = 0.0;

    friend bool operator==(const EnvelopePoint&, const EnvelopePoint&) = default;
};

/// Views into engine-owned buffers, valid until the next process_frame.
struct FrameResult {
    std::span<const float> audio;
    std::span<const NoteEvent> events;
    std::size_t clipped = 0;
};

/// Per-frame pipeline: noise synthesis, motion detection, voice gating,
/// voice rendering and mixing. After the first frame of a given size,
/// process_frame performs no heap allocation.
class Engine {
public:
    /// Builds the 51 voices. Throws ConfigError.
    explicit Engine(EngineConfig cfg);

    /// Sizes all per-frame buffers for width x height frames.
    void prepare(int width, int height);

    /// Frames must arrive with strictly increasing frame_index
    /// (std::invalid_argument otherwise) and constant dimensions.
    FrameResult process_frame(const VideoFrame& frame);

    /// Replaces the tunables. Voices and gates restart closed; the motion
    /// reference frame and rate accumulator carry over. sample_rate and fps
    /// cannot change.
    void reconfigure(EngineConfig cfg);

    /// Envelope value of every sounding voice, tagged with `frame_index`.
    void envelope_points(std::int64_t frame_index, std::vector<EnvelopePoint>& out) const;

    [[nodiscard]] const EngineConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const NoteTable& note_table() const noexcept { return table_; }
    [[nodiscard]] std::span<const NoteVoice> voices() const noexcept { return voices_; }
    [[nodiscard]] const GateState& gates() const noexcept { return gates_; }
    [[nodiscard]] std::uint64_t clip_count() const noexcept { return clip_count_; }
    [[nodiscard]] std::uint64_t frames_processed() const noexcept { return frames_processed_; }
    /// Count of voices currently not idle.
    [[nodiscard]] int active_voices() const noexcept;

    /// Opens a voice as if a note_on had been detected. Used by benchmarks and
    /// analysis tooling to load the renderer without motion.
    void trigger(int note_index, int velocity);

private:
    void build_voices();
    void apply(const NoteEvent& event);

    EngineConfig cfg_;
    NoteTable table_;
    std::array<double, kGridColumns> freqs_{};
    std::vector<NoteVoice> voices_;
    DetectorParams detector_;
    GateState gates_;
    RateAdapter rate_;

    int width_ = 0;
    int height_ = 0;
    std::optional<GridReducer> reducer_;
    std::vector<double> mono_;
    std::vector<double> prev_mono_;
    std::vector<double> noise_pool_;
    std::vector<double> segment_;
    std::vector<double> voice_out_;
    std::vector<double> mix_;
    std::vector<std::uint8_t> mask_;
    std::vector<float> audio_;
    std::unique_ptr<CellGrid> grid_;
    std::vector<NoteEvent> events_;

    bool have_prev_ = false;
    std::int64_t last_index_ = -1;
    std::uint64_t clip_count_ = 0;
    std::uint64_t frames_processed_ = 0;
};

struct RenderOutput {
    std::vector<float> audio;
    std::vector<NoteEvent> events;
    std::vector<EnvelopePoint> envelope_trace;
    std::uint64_t clip_count = 0;
    std::uint64_t frames = 0;
};

/// Folds process_frame over the whole stream. Deterministic in (stream
/// content, config). Throws std::logic_error if the engine already ran.
RenderOutput render_offline(Engine& engine, FrameStream& stream);

}  // namespace motionsynth
