#pragma once

namespace motionsynth {

enum class EnvelopePhase { idle, attack, sustain, release };

const char* phase_name(EnvelopePhase phase) noexcept;

/// Linear attack-sustain-release contour in [0,1]. The gate decides the
/// direction: open ramps up over attack_s and holds at 1; closed ramps down
/// over release_s and parks at idle.
class AsrEnvelope {
public:
    /// Throws ConfigError unless both times are > 0.
    AsrEnvelope(double attack_s, double release_s);

    void step(bool gate, double dt) noexcept;

    /// Jumps straight to a state, e.g. a fully sustained voice for analysis.
    void set_state(EnvelopePhase phase, double value) noexcept;

    [[nodiscard]] double value() const noexcept { return value_; }
    [[nodiscard]] EnvelopePhase phase() const noexcept { return phase_; }
    [[nodiscard]] double attack_s() const noexcept { return attack_s_; }
    [[nodiscard]] double release_s() const noexcept { return release_s_; }

private:
    double attack_s_;
    double release_s_;
    double value_ = 0.0;
    EnvelopePhase phase_ = EnvelopePhase::idle;
};

/// Q range swept by the envelope; Q peaks at q_max at full sustain.
struct QRange {
    double q_min = 5.0;
    double q_max = 1000.0;
};

void validate(const QRange& range);

/// q_min + (q_max - q_min) * env_value.
constexpr double q_of_envelope(double env_value, const QRange& range) noexcept
{
    return range.q_min + (range.q_max - range.q_min) * env_value;
}

}  // namespace motionsynth
