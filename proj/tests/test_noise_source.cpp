// Noise source: monochrome conversion, normalization, shuffle, rate adaptation.

#include <motionsynth/noise_source.hpp>

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace motionsynth;
using namespace motionsynth::testing;

TEST_CASE("monochrome is the real-valued channel mean", "[noise]")
{
    VideoFrame frame = solid_frame(2, 1, Rgb{0, 0, 0});
    frame.pixels[0] = Rgb{10, 20, 31};
    frame.pixels[1] = Rgb{255, 255, 255};
    const auto mono = to_monochrome(frame);
    REQUIRE(mono.values.size() == 2);
    CHECK(mono.values[0] == Catch::Approx(61.0 / 3.0));
    CHECK(mono.values[1] == 255.0);
    CHECK(mono.width == 2);
    CHECK(mono.height == 1);
}

TEST_CASE("normalization maps the byte range onto [-1, 1]", "[noise]")
{
    CHECK(normalize_value(0.0) == -1.0);
    CHECK(normalize_value(255.0) == 1.0);
    CHECK(normalize_value(60.0) == Catch::Approx(-0.5294117647058824).epsilon(1e-15));
    CHECK(normalize_value(128.0) == Catch::Approx(0.0039215686274509665).epsilon(1e-12));
}

TEST_CASE("RGB (30, 60, 90) normalizes to about -0.529", "[noise]")
{
    const VideoFrame frame = solid_frame(4, 4, Rgb{30, 60, 90});
    const auto values = normalize(to_monochrome(frame));
    for (const double v : values) CHECK(v == Catch::Approx(-0.5294117647058824).epsilon(1e-12));
}

TEST_CASE("solid frames give constant normalized buffers", "[noise]")
{
    for (const std::uint8_t level : {0, 64, 128, 200, 255}) {
        const auto values = normalize(to_monochrome(solid_frame(51, 127, Rgb{level, level, level})));
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        CHECK(*lo == *hi);
        CHECK(*lo == normalize_value(level));
    }
}

TEST_CASE("normalized values always stay in [-1, 1]", "[noise][property]")
{
    std::mt19937 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        VideoFrame frame = solid_frame(60, 130, Rgb{});
        for (auto& px : frame.pixels) {
            px = Rgb{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
        }
        for (const double v : normalize(to_monochrome(frame))) {
            REQUIRE(v >= -1.0);
            REQUIRE(v <= 1.0);
        }
    }
}

TEST_CASE("shuffle is a permutation of its input", "[noise][property]")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 5000;
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
        const ShuffleKey key{rng(), static_cast<std::int64_t>(rng() % 1000)};
        auto y = shuffle(x, key);
        REQUIRE(y.size() == n);
        std::sort(y.begin(), y.end());
        REQUIRE(y == x);
    }
}

TEST_CASE("shuffle is deterministic in (seed, frame index)", "[noise][property]")
{
    const auto frame = random_gray_frame(64, 128, 99);
    const auto x = normalize(to_monochrome(frame));
    const auto a = shuffle(x, {7, 3});
    const auto b = shuffle(x, {7, 3});
    CHECK(a == b);
    CHECK(shuffle(x, {7, 4}) != a);
    CHECK(shuffle(x, {8, 3}) != a);

    std::vector<double> in_place = x;
    shuffle_in_place(in_place, {7, 3});
    CHECK(in_place == a);
}

TEST_CASE("shuffle actually moves samples", "[noise]")
{
    std::vector<double> x(4096);
    std::iota(x.begin(), x.end(), 0.0);
    const auto y = shuffle(x, {1, 0});
    std::size_t fixed = 0;
    for (std::size_t i = 0; i < x.size(); ++i) fixed += (x[i] == y[i]);
    // Expected number of fixed points of a uniform permutation is 1.
    CHECK(fixed < 10);
}

TEST_CASE("shuffle positions are close to uniform", "[noise][property]")
{
    // Where does element 0 land over many keys? Chi-square over 8 slots.
    constexpr int kSlots = 8;
    constexpr int kTrials = 16000;
    std::array<int, kSlots> counts{};
    std::vector<double> x(kSlots);
    std::iota(x.begin(), x.end(), 0.0);
    for (int t = 0; t < kTrials; ++t) {
        const auto y = shuffle(x, {42, t});
        const auto pos = std::find(y.begin(), y.end(), 0.0) - y.begin();
        ++counts[static_cast<std::size_t>(pos)];
    }
    const double expected = static_cast<double>(kTrials) / kSlots;
    double chi2 = 0.0;
    for (const int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // 7 dof, p = 0.001 critical value is 24.3.
    CHECK(chi2 < 24.3);
}

TEST_CASE("shuffle rejects empty input", "[noise]")
{
    std::vector<double> empty;
    CHECK_THROWS_AS(shuffle(empty, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(shuffle_in_place(empty, {1, 0}), std::invalid_argument);
}

TEST_CASE("single-element shuffle is the identity", "[noise]")
{
    std::vector<double> one{0.25};
    CHECK(shuffle(one, {5, 5}) == one);
}

TEST_CASE("shuffling a smooth gradient raises zero crossings", "[noise][property]")
{
    // Left half dark, right half bright: two long runs before shuffling.
    VideoFrame frame = solid_frame(320, 240, Rgb{});
    for (int y = 0; y < 240; ++y) {
        for (int x = 0; x < 320; ++x) {
            const auto v = static_cast<std::uint8_t>(x * 255 / 319);
            frame.at(x, y) = Rgb{v, v, v};
        }
    }
    const auto x = normalize(to_monochrome(frame));
    const auto before = zero_crossings(x);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto after = zero_crossings(shuffle(x, {seed, 0}));
        CHECK(after > 10 * before);
    }
}

TEST_CASE("rate adaptation at 48 kHz / 30 fps is exactly 1600", "[noise]")
{
    RateAdapter adapter(48000.0, 30.0);
    for (int i = 0; i < 100; ++i) REQUIRE(adapter.next() == 1600);
    CHECK(adapter.max_count() >= 1600);
}

TEST_CASE("rate adaptation at 29.97 fps carries the remainder", "[noise]")
{
    // Oracle: the running total after n frames is floor(n * sr / fps),
    // computed here in exact rational arithmetic (fps = 2997/100).
    RateAdapter adapter(48000.0, 29.97);
    std::size_t total = 0;
    for (std::uint64_t n = 1; n <= 1000; ++n) {
        const std::size_t count = adapter.next();
        REQUIRE((count == 1601 || count == 1602));
        total += count;
        REQUIRE(total == (n * 48000 * 100) / 2997);
        REQUIRE(count <= adapter.max_count());
    }
    CHECK(total == 1601601);
}

TEST_CASE("samples_per_frame is a pure step of the accumulator", "[noise]")
{
    const auto q = samples_per_frame(44100.0, 24.0, 0.0);
    CHECK(q.count == 1837);
    CHECK(q.accumulator == Catch::Approx(0.5));
    const auto q2 = samples_per_frame(44100.0, 24.0, q.accumulator);
    CHECK(q2.count == 1838);
    CHECK(q2.accumulator == Catch::Approx(0.0).margin(1e-9));
    CHECK_THROWS(samples_per_frame(48000.0, 0.0, 0.0));
    CHECK_THROWS(samples_per_frame(0.0, 30.0, 0.0));
}

TEST_CASE("rate adaptation long-run mean matches sr/fps", "[noise][property]")
{
    for (const double fps : {23.976, 24.0, 25.0, 29.97, 30.0, 59.94, 60.0, 7.5}) {
        for (const double sr : {44100.0, 48000.0, 96000.0}) {
            RateAdapter adapter(sr, fps);
            std::size_t total = 0;
            constexpr int kFrames = 3000;
            for (int i = 0; i < kFrames; ++i) total += adapter.next();
            CHECK(std::abs(static_cast<double>(total) - kFrames * sr / fps) < 1.0 + 1e-6 * kFrames * sr / fps);
        }
    }
}

TEST_CASE("segments cycle when the frame is shorter than the quota", "[noise]")
{
    const std::vector<double> permuted{0.1, 0.2, 0.3};
    const auto seg = take_segment(permuted, 7, 4, 48000.0);
    CHECK(seg.samples == std::vector<double>{0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 0.1});
    CHECK(seg.frame_index == 4);
    CHECK(seg.sample_rate == 48000.0);
}

TEST_CASE("segments take a prefix when the frame is longer than the quota", "[noise]")
{
    const auto frame = random_gray_frame(320, 240, 1);
    const auto permuted = shuffle(normalize(to_monochrome(frame)), {1, 0});
    const auto seg = take_segment(permuted, 1600, 0, 48000.0);
    REQUIRE(seg.samples.size() == 1600);
    CHECK(std::equal(seg.samples.begin(), seg.samples.end(), permuted.begin()));
}

TEST_CASE("segment edge cases", "[noise]")
{
    const std::vector<double> permuted{0.5};
    CHECK_THROWS_AS(take_segment(permuted, 0, 0, 48000.0), std::invalid_argument);
    CHECK_THROWS_AS(take_segment(std::span<const double>{}, 4, 0, 48000.0), std::invalid_argument);
    std::vector<double> out(5);
    take_segment(permuted, out);
    CHECK(std::all_of(out.begin(), out.end(), [](double v) { return v == 0.5; }));
}

TEST_CASE("the noise source is reproducible from frames and seed alone", "[noise][property]")
{
    auto run = [](std::uint64_t seed) {
        std::vector<double> all;
        RateAdapter adapter(48000.0, 29.97);
        for (int i = 0; i < 10; ++i) {
            const auto frame = random_gray_frame(64, 128, 1000 + static_cast<std::uint64_t>(i));
            const auto permuted = shuffle(normalize(to_monochrome(frame)), {seed, i});
            const auto seg = take_segment(permuted, adapter.next(), i, 48000.0);
            all.insert(all.end(), seg.samples.begin(), seg.samples.end());
        }
        return all;
    };
    CHECK(run(7) == run(7));
    CHECK(run(7) != run(8));
}

TEST_CASE("ramp frame: shuffled zero crossings exceed unshuffled with seed 0", "[noise]")
{
    VideoFrame frame = solid_frame(320, 240, Rgb{});
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        const auto v = static_cast<std::uint8_t>(i % 256);
        frame.pixels[i] = Rgb{v, v, v};
    }
    const auto x = normalize(to_monochrome(frame));
    const auto before = zero_crossings(x);
    const auto after = zero_crossings(shuffle(x, {0, 0}));
    // The ramp crosses once up and once down per 256-sample period.
    CHECK(before == 2 * 76800 / 256 - 1);
    CHECK(after > before);
}

TEST_CASE("44.1 kHz at 30 fps is exactly 1470", "[noise]")
{
    RateAdapter adapter(44100.0, 30.0);
    for (int i = 0; i < 100; ++i) REQUIRE(adapter.next() == 1470);
}

TEST_CASE("a constant 128 frame yields constant samples", "[noise]")
{
    const auto frame = solid_frame(64, 128, Rgb{128, 128, 128});
    const auto permuted = shuffle(normalize(to_monochrome(frame)), {0, 0});
    const auto seg = take_segment(permuted, 1600, 0, 48000.0);
    for (const double v : seg.samples) REQUIRE(v == Catch::Approx(0.0039215686274509665).epsilon(1e-12));
}
