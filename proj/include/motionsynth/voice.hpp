#pragma once

#include <motionsynth/biquad.hpp>
#include <motionsynth/envelope.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace motionsynth {

struct PartialSpec {
    int harmonic = 2;
    double gain = 0.5;

    friend bool operator==(const PartialSpec&, const PartialSpec&) = default;
};

inline const std::vector<PartialSpec> kDefaultPartials{{2, 0.5}, {3, 0.25}};

/// One band of a voice: centre frequency and mix gain.
struct Band {
    double freq = 0.0;
    double gain = 1.0;

    friend bool operator==(const Band&, const Band&) = default;
};

/// Partial bands at n*f0, dropping any at or above 0.45*sample_rate.
std::vector<Band> partial_set(double f0, double sample_rate, std::span<const PartialSpec> spec);

struct VoiceParams {
    double sample_rate = 48000.0;
    QRange q_range{};
    double attack_s = 0.08;
    double release_s = 0.6;
    std::size_t block_size = 64;
};

/// A note: band-pass group (fundamental + partials) fed by the shared noise
/// and shaped by one ASR envelope that drives both output gain and Q.
class NoteVoice {
public:
    NoteVoice(int note_index, double f0, std::span<const Band> partials, const VoiceParams& params);

    void gate_on(double velocity_gain) noexcept;
    void gate_off() noexcept;

    /// Renders `noise` through the voice into `out` (same length). Works in
    /// blocks: step the envelope, redesign every band at the envelope's Q,
    /// filter, then scale the weighted band sum by envelope * velocity.
    /// An idle voice writes exact zeros. Does not allocate.
    void render(std::span<const double> noise, std::span<double> out) noexcept;

    [[nodiscard]] bool idle() const noexcept { return !gate_ && env_.phase() == EnvelopePhase::idle; }
    [[nodiscard]] bool gate() const noexcept { return gate_; }
    [[nodiscard]] int note_index() const noexcept { return note_index_; }
    [[nodiscard]] double fundamental() const noexcept { return bands_.front().freq; }
    [[nodiscard]] double velocity_gain() const noexcept { return velocity_gain_; }
    /// Fundamental first (gain 1), then partials.
    [[nodiscard]] std::span<const Band> bands() const noexcept { return bands_; }
    [[nodiscard]] const AsrEnvelope& envelope() const noexcept { return env_; }
    AsrEnvelope& envelope() noexcept { return env_; }
    /// Coefficients of every band at the current envelope value.
    [[nodiscard]] std::vector<BiquadCoeffs> current_coeffs() const;

private:
    struct BandState {
        double cos_w = 0.0;
        double sin_w = 0.0;
        BiquadCoeffs coeffs;
        BiquadState state;
    };

    void design(double q) noexcept;

    int note_index_;
    std::vector<Band> bands_;
    std::vector<BandState> band_states_;
    VoiceParams params_;
    AsrEnvelope env_;
    double velocity_gain_ = 1.0;
    bool gate_ = false;
};

}  // namespace motionsynth
