#include <motionsynth/biquad.hpp>

#include <motionsynth/error.hpp>

#include <cmath>
#include <numbers>

namespace motionsynth {

BiquadCoeffs design_bandpass(double f0, double q, double sample_rate)
{
    if (!(sample_rate > 0.0)) throw ConfigError("band-pass: sample rate must be > 0");
    if (!(f0 > 0.0) || !(f0 < sample_rate / 2.0)) {
        throw ConfigError("band-pass: centre frequency must lie in (0, Nyquist)");
    }
    if (!(q > 0.0)) throw ConfigError("band-pass: Q must be > 0");

    const double w0 = 2.0 * std::numbers::pi * f0 / sample_rate;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double norm = 1.0 / (1.0 + alpha);
    return BiquadCoeffs{
        alpha * norm,
        0.0,
        -alpha * norm,
        -2.0 * std::cos(w0) * norm,
        (1.0 - alpha) * norm,
    };
}

std::complex<double> frequency_response(const BiquadCoeffs& c, double freq, double sample_rate)
{
    const double w = 2.0 * std::numbers::pi * freq / sample_rate;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    return (c.b0 + c.b1 * z1 + c.b2 * z2) / (1.0 + c.a1 * z1 + c.a2 * z2);
}

bool is_stable(const BiquadCoeffs& c)
{
    // Jury conditions for z^2 + a1 z + a2.
    return std::abs(c.a2) < 1.0 && std::abs(c.a1) < 1.0 + c.a2;
}

}  // namespace motionsynth
