#include "test_support.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unistd.h>

namespace motionsynth::testing {

VectorStream::VectorStream(std::vector<VideoFrame> frames, double fps) : frames_(std::move(frames)), fps_(fps) {}

std::optional<VideoFrame> VectorStream::next_frame()
{
    if (next_ >= frames_.size()) return std::nullopt;
    VideoFrame frame = frames_[next_];
    frame.frame_index = static_cast<std::int64_t>(next_);
    frame.timestamp = static_cast<double>(next_) / fps_;
    ++next_;
    return frame;
}

VideoFrame moving_block_frame(int width, int height, int i)
{
    VideoFrame frame = solid_frame(width, height, Rgb{20, 20, 20}, i);
    const int x0 = (4 * i) % std::max(1, width - 40);
    const int y0 = (height - 40) / 2;
    for (int y = y0; y < y0 + 40; ++y) {
        for (int x = x0; x < x0 + 40; ++x) frame.at(x, y) = Rgb{230, 230, 230};
    }
    return frame;
}

VideoFrame solid_frame(int width, int height, Rgb color, std::int64_t frame_index)
{
    VideoFrame frame;
    frame.width = width;
    frame.height = height;
    frame.pixels.assign(static_cast<std::size_t>(width) * height, color);
    frame.frame_index = frame_index;
    return frame;
}

VideoFrame random_gray_frame(int width, int height, std::uint64_t seed, int lo, int hi, std::int64_t frame_index)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(lo, hi);
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(width) * height);
    for (auto& v : gray) v = static_cast<std::uint8_t>(dist(rng));
    return gray_frame(width, height, gray, frame_index);
}

VideoFrame numbered_frame(int width, int height, int number)
{
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = static_cast<std::uint8_t>((i * 7 + static_cast<std::size_t>(number) * 13) % 256);
    gray[0] = static_cast<std::uint8_t>(number & 0xff);
    gray[1] = static_cast<std::uint8_t>((number >> 8) & 0xff);
    return gray_frame(width, height, gray);
}

int frame_number(const VideoFrame& frame)
{
    return frame.pixels[0].r | (frame.pixels[1].r << 8);
}

TempDir::TempDir()
{
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("motionsynth-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir()
{
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void write_pgm(const std::filesystem::path& path, const VideoFrame& frame)
{
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# test frame\n" << frame.width << " " << frame.height << "\n255\n";
    for (const auto& px : frame.pixels) out.put(static_cast<char>(px.r));
}

void write_y4m(const std::filesystem::path& path, std::span<const VideoFrame> frames, bool mono)
{
    std::ofstream out(path, std::ios::binary);
    const auto& first = frames.front();
    out << "YUV4MPEG2 W" << first.width << " H" << first.height << " F30:1 Ip A1:1 " << (mono ? "Cmono" : "C444")
        << "\n";
    for (const auto& frame : frames) {
        out << "FRAME\n";
        if (mono) {
            for (const auto& px : frame.pixels) out.put(static_cast<char>(px.r));
            continue;
        }
        std::vector<std::uint8_t> y, cb, cr;
        for (const auto& px : frame.pixels) {
            const double r = px.r, g = px.g, b = px.b;
            y.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(0.299 * r + 0.587 * g + 0.114 * b, 0.0, 255.0))));
            cb.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(128 - 0.168736 * r - 0.331264 * g + 0.5 * b, 0.0, 255.0))));
            cr.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(128 + 0.5 * r - 0.418688 * g - 0.081312 * b, 0.0, 255.0))));
        }
        for (const auto* plane : {&y, &cb, &cr}) out.write(reinterpret_cast<const char*>(plane->data()), static_cast<std::streamsize>(plane->size()));
    }
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t zero_crossings(std::span<const double> x)
{
    std::size_t count = 0;
    int last_sign = 0;
    for (const double v : x) {
        const int sign = (v > 0.0) - (v < 0.0);
        if (sign == 0) continue;
        if (last_sign != 0 && sign != last_sign) ++count;
        last_sign = sign;
    }
    return count;
}

double magnitude(const BiquadCoeffs& c, double freq, double sample_rate)
{
    // Real/imaginary parts of numerator and denominator written out by hand.
    const double w = 2.0 * std::numbers::pi * freq / sample_rate;
    const double num_re = c.b0 + c.b1 * std::cos(w) + c.b2 * std::cos(2 * w);
    const double num_im = -(c.b1 * std::sin(w) + c.b2 * std::sin(2 * w));
    const double den_re = 1.0 + c.a1 * std::cos(w) + c.a2 * std::cos(2 * w);
    const double den_im = -(c.a1 * std::sin(w) + c.a2 * std::sin(2 * w));
    return std::sqrt((num_re * num_re + num_im * num_im) / (den_re * den_re + den_im * den_im));
}

double measured_bandwidth(const BiquadCoeffs& c, double f0, double sample_rate)
{
    const double target = 1.0 / std::sqrt(2.0);
    auto crossing = [&](double inside, double outside) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (inside + outside);
            (magnitude(c, mid, sample_rate) >= target ? inside : outside) = mid;
        }
        return 0.5 * (inside + outside);
    };
    const double lower = crossing(f0, 1e-9);
    const double upper = crossing(f0, sample_rate / 2.0 - 1e-9);
    return upper - lower;
}

std::vector<double> periodogram(std::span<const double> x)
{
    const int n = static_cast<int>(x.size());
    std::vector<double> in(x.begin(), x.end());
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n / 2 + 1)));
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), out, FFTW_ESTIMATE);
    fftw_execute(plan);
    std::vector<double> power(static_cast<std::size_t>(n / 2 + 1));
    for (std::size_t k = 0; k < power.size(); ++k) {
        power[k] = (out[k][0] * out[k][0] + out[k][1] * out[k][1]) / n;
    }
    fftw_destroy_plan(plan);
    fftw_free(out);
    return power;
}

std::vector<double> averaged_periodogram(std::span<const double> x, std::size_t nfft)
{
    const std::size_t segments = x.size() / nfft;
    if (segments == 0) throw std::invalid_argument("signal shorter than one FFT segment");
    std::vector<double> avg(nfft / 2 + 1, 0.0);
    for (std::size_t s = 0; s < segments; ++s) {
        const auto p = periodogram(x.subspan(s * nfft, nfft));
        for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += p[k] / static_cast<double>(segments);
    }
    return avg;
}

double spectral_flatness(std::span<const double> power, std::size_t first, std::size_t last)
{
    double log_sum = 0.0;
    double sum = 0.0;
    for (std::size_t k = first; k < last; ++k) {
        log_sum += std::log(power[k]);
        sum += power[k];
    }
    const double n = static_cast<double>(last - first);
    return std::exp(log_sum / n) / (sum / n);
}

double dft_band_energy_fraction(std::span<const double> x, double sample_rate, double lo_hz, double hi_hz)
{
    const std::size_t n = x.size();
    double total = 0.0;
    for (const double v : x) total += v * v;
    const double bin_hz = sample_rate / static_cast<double>(n);
    const auto k_lo = static_cast<std::size_t>(std::ceil(lo_hz / bin_hz));
    const auto k_hi = static_cast<std::size_t>(std::floor(hi_hz / bin_hz));
    // Twiddle table indexed by (k*i) mod n keeps every phase exact.
    std::vector<double> cos_table(n), sin_table(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
        cos_table[m] = std::cos(phase);
        sin_table[m] = std::sin(phase);
    }
    double band = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        double re = 0.0, im = 0.0;
        std::size_t m = 0;
        for (std::size_t i = 0; i < n; ++i) {
            re += x[i] * cos_table[m];
            im -= x[i] * sin_table[m];
            m += k;
            if (m >= n) m -= n;
        }
        band += (re * re + im * im) / static_cast<double>(n);
    }
    return 2.0 * band / total;
}

double periodogram_band_energy_fraction(std::span<const double> x, double sample_rate, double lo_hz, double hi_hz)
{
    const auto p = periodogram(x);
    const double bin_hz = sample_rate / static_cast<double>(x.size());
    double total = 0.0;
    for (const double v : x) total += v * v;
    double band = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double f = static_cast<double>(k) * bin_hz;
        if (f >= lo_hz && f <= hi_hz) band += p[k];
    }
    return 2.0 * band / total;
}

}  // namespace motionsynth::testing
