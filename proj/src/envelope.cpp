#include <motionsynth/envelope.hpp>

#include <motionsynth/error.hpp>

#include <algorithm>
#include <cmath>

namespace motionsynth {

const char* phase_name(EnvelopePhase phase) noexcept
{
    switch (phase) {
    case EnvelopePhase::idle: return "idle";
    case EnvelopePhase::attack: return "attack";
    case EnvelopePhase::sustain: return "sustain";
    case EnvelopePhase::release: return "release";
    }
    return "?";
}

AsrEnvelope::AsrEnvelope(double attack_s, double release_s) : attack_s_(attack_s), release_s_(release_s)
{
    if (!(attack_s > 0.0) || !(release_s > 0.0) || !std::isfinite(attack_s) || !std::isfinite(release_s)) {
        throw ConfigError("envelope attack and release must be > 0 seconds");
    }
}

void AsrEnvelope::step(bool gate, double dt) noexcept
{
    if (gate) {
        value_ = std::min(1.0, value_ + dt / attack_s_);
        phase_ = value_ >= 1.0 ? EnvelopePhase::sustain : EnvelopePhase::attack;
    } else if (phase_ != EnvelopePhase::idle) {
        value_ = std::max(0.0, value_ - dt / release_s_);
        phase_ = value_ <= 0.0 ? EnvelopePhase::idle : EnvelopePhase::release;
    }
}

void AsrEnvelope::set_state(EnvelopePhase phase, double value) noexcept
{
    phase_ = phase;
    value_ = std::clamp(value, 0.0, 1.0);
}

void validate(const QRange& range)
{
    if (!(range.q_min > 0.0) || !(range.q_min < range.q_max) || !std::isfinite(range.q_max)) {
        throw ConfigError("Q range must satisfy 0 < q_min < q_max");
    }
}

}  // namespace motionsynth
