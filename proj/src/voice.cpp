#include <motionsynth/voice.hpp>

#include <motionsynth/error.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace motionsynth {

std::vector<Band> partial_set(double f0, double sample_rate, std::span<const PartialSpec> spec)
{
    std::vector<Band> out;
    const double cutoff = 0.45 * sample_rate;
    for (const auto& partial : spec) {
        if (partial.harmonic < 2) throw ConfigError("partial harmonic numbers must be >= 2");
        const double freq = partial.harmonic * f0;
        if (freq < cutoff) out.push_back(Band{freq, partial.gain});
    }
    return out;
}

NoteVoice::NoteVoice(int note_index, double f0, std::span<const Band> partials, const VoiceParams& params)
    : note_index_(note_index), params_(params), env_(params.attack_s, params.release_s)
{
    validate(params.q_range);
    if (params.block_size == 0) throw ConfigError("block size must be >= 1");
    if (!(f0 > 0.0) || !(f0 < params.sample_rate / 2.0)) throw ConfigError("voice fundamental outside (0, Nyquist)");
    bands_.push_back(Band{f0, 1.0});
    for (const auto& band : partials) {
        if (!(band.gain > 0.0) || band.gain > 1.0) throw ConfigError("partial gains must lie in (0, 1]");
        if (!(band.freq < params.sample_rate / 2.0)) throw ConfigError("partial above Nyquist");
        bands_.push_back(band);
    }
    band_states_.resize(bands_.size());
    for (std::size_t b = 0; b < bands_.size(); ++b) {
        const double w0 = 2.0 * std::numbers::pi * bands_[b].freq / params.sample_rate;
        band_states_[b].cos_w = std::cos(w0);
        band_states_[b].sin_w = std::sin(w0);
    }
    design(q_of_envelope(env_.value(), params_.q_range));
}

void NoteVoice::gate_on(double velocity_gain) noexcept
{
    velocity_gain_ = std::clamp(velocity_gain, 0.0, 1.0);
    gate_ = true;
}

void NoteVoice::gate_off() noexcept
{
    gate_ = false;
}

// Same formulas as design_bandpass, with the per-band trig hoisted out.
void NoteVoice::design(double q) noexcept
{
    for (auto& band : band_states_) {
        const double alpha = band.sin_w / (2.0 * q);
        const double norm = 1.0 / (1.0 + alpha);
        band.coeffs = BiquadCoeffs{alpha * norm, 0.0, -alpha * norm, -2.0 * band.cos_w * norm, (1.0 - alpha) * norm};
    }
}

std::vector<BiquadCoeffs> NoteVoice::current_coeffs() const
{
    std::vector<BiquadCoeffs> out;
    for (const auto& band : band_states_) out.push_back(band.coeffs);
    return out;
}

void NoteVoice::render(std::span<const double> noise, std::span<double> out) noexcept
{
    const std::size_t total = std::min(noise.size(), out.size());
    std::size_t pos = 0;
    while (pos < total) {
        if (idle()) {
            std::fill(out.begin() + static_cast<std::ptrdiff_t>(pos), out.end(), 0.0);
            return;
        }
        const std::size_t len = std::min(params_.block_size, total - pos);
        env_.step(gate_, static_cast<double>(len) / params_.sample_rate);
        if (env_.phase() == EnvelopePhase::idle) {
            for (auto& band : band_states_) band.state.reset();
            std::fill(out.begin() + static_cast<std::ptrdiff_t>(pos), out.end(), 0.0);
            return;
        }
        design(q_of_envelope(env_.value(), params_.q_range));
        const double amp = env_.value() * velocity_gain_;
        for (std::size_t i = pos; i < pos + len; ++i) {
            double sum = 0.0;
            for (std::size_t b = 0; b < bands_.size(); ++b) {
                sum += bands_[b].gain * band_states_[b].state.process(band_states_[b].coeffs, noise[i]);
            }
            out[i] = amp * sum;
        }
        pos += len;
    }
}

}  // namespace motionsynth
