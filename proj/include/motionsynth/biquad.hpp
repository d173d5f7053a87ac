#pragma once

#include <complex>

namespace motionsynth {

/// Second-order section, normalized so a0 = 1.
struct BiquadCoeffs {
    double b0 = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
};

/// Constant-peak-gain resonant band-pass (0 dB at f0, zeros at DC and
/// Nyquist). -3 dB bandwidth is approximately f0/q.
/// Throws ConfigError unless 0 < f0 < sample_rate/2 and q > 0.
BiquadCoeffs design_bandpass(double f0, double q, double sample_rate);

/// H(e^{jw}) evaluated directly at `freq`.
std::complex<double> frequency_response(const BiquadCoeffs& c, double freq, double sample_rate);

/// True when both poles lie strictly inside the unit circle.
bool is_stable(const BiquadCoeffs& c);

/// Direct form II transposed state.
struct BiquadState {
    double s1 = 0.0;
    double s2 = 0.0;

    double process(const BiquadCoeffs& c, double x) noexcept
    {
        const double y = c.b0 * x + s1;
        s1 = c.b1 * x - c.a1 * y + s2;
        s2 = c.b2 * x - c.a2 * y;
        return y;
    }

    void reset() noexcept { s1 = s2 = 0.0; }
};

}  // namespace motionsynth
