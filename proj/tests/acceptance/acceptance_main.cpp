// Acceptance runner: checks criteria 1-10 and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <motionsynth/biquad.hpp>
#include <motionsynth/cli.hpp>
#include <motionsynth/engine.hpp>
#include <motionsynth/motion_control.hpp>
#include <motionsynth/noise_source.hpp>
#include <motionsynth/note_table.hpp>
#include <motionsynth/voice.hpp>

#include "alloc_counter.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace motionsynth;
using namespace motionsynth::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

/// Renders `frames` copies of a solid frame and returns (rms, seconds).
std::pair<double, double> render_solid(Rgb color, int frames)
{
    const auto t0 = Clock::now();
    std::vector<VideoFrame> video(static_cast<std::size_t>(frames), solid_frame(320, 240, color));
    VectorStream stream(std::move(video));
    Engine engine(EngineConfig{});
    const auto out = render_offline(engine, stream);
    return {rms(out.audio), seconds_since(t0)};
}

/// One frame's noise segment through the real noise-source path.
std::vector<double> noise_segment(const VideoFrame& frame, std::uint64_t seed, std::size_t count)
{
    const auto permuted = shuffle(normalize(to_monochrome(frame)), ShuffleKey{seed, frame.frame_index});
    return take_segment(permuted, count, frame.frame_index, 48000.0).samples;
}

Outcome c1()
{
    const auto [level, secs] = render_solid(Rgb{128, 128, 128}, 300);
    return {level < 1e-4 && secs < 5.0, fmt("rms=%.3g (<1e-4) runtime=%.2fs (<5s)", level, secs)};
}

Outcome c2()
{
    const auto [level, secs] = render_solid(Rgb{0, 0, 0}, 300);
    return {level < 1e-4, fmt("rms=%.3g (<1e-4) runtime=%.2fs", level, secs)};
}

Outcome c3()
{
    // A single raw periodogram of white noise has expected flatness
    // exp(-gamma) ~ 0.56 whatever the source, so the 4096-point spectrum is
    // estimated by averaging the periodograms of the segment's consecutive
    // 4096-sample blocks. The segment spans the whole shuffled frame.
    const auto frame = random_gray_frame(320, 240, 12345);
    const auto seg = noise_segment(frame, 0, frame.pixels.size());
    const auto power = averaged_periodogram(seg, 4096);
    const double flat = spectral_flatness(power, 1, power.size() - 1);
    const auto single = periodogram(std::span<const double>(seg).first(4096));
    const double flat_single = spectral_flatness(single, 1, single.size() - 1);
    return {flat > 0.85, fmt("flatness=%.4f (>0.85, %zu-block average; single periodogram %.4f)", flat,
                             seg.size() / 4096, flat_single)};
}

Outcome c4()
{
    bool ok = true;
    std::string detail;
    for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        double previous = -1.0;
        detail += fmt("seed %llu:", static_cast<unsigned long long>(seed));
        for (const int half : {16, 64, 127}) {
            const auto frame = random_gray_frame(320, 240, seed * 1000 + static_cast<std::uint64_t>(half), 128 - half,
                                                 std::min(255, 128 + half));
            const double level = rms(noise_segment(frame, seed, 1600));
            detail += fmt(" %.4f", level);
            ok = ok && level > previous;
            previous = level;
        }
        detail += "; ";
    }
    return {ok, detail + "strictly increasing"};
}

Outcome c5()
{
    const auto t0 = Clock::now();
    constexpr double fs = 48000.0;
    std::vector<double> noise;
    noise.reserve(480000);
    for (int i = 0; i < 300; ++i) {
        const auto frame = random_gray_frame(320, 240, 500 + static_cast<std::uint64_t>(i), 0, 255, i);
        const auto seg = noise_segment(frame, 0, 1600);
        noise.insert(noise.end(), seg.begin(), seg.end());
    }
    const auto partials = partial_set(440.0, fs, kDefaultPartials);
    NoteVoice voice(0, 440.0, partials, VoiceParams{});
    voice.gate_on(1.0);
    voice.envelope().set_state(EnvelopePhase::sustain, 1.0);
    std::vector<double> out(noise.size());
    voice.render(noise, out);
    const double render_secs = seconds_since(t0);

    double oracle = 0.0;
    double measured = 0.0;
    for (const double f : {440.0, 880.0, 1320.0}) {
        oracle += dft_band_energy_fraction(out, fs, f - 5.0, f + 5.0);
        measured += periodogram_band_energy_fraction(out, fs, f - 5.0, f + 5.0);
    }
    const bool agree = std::abs(oracle - measured) < 1e-6;
    return {measured >= 0.90 && agree && render_secs < 10.0,
            fmt("in-band energy periodogram=%.4f oracle=%.4f (>=0.90, agree) render=%.2fs (<10s)", measured, oracle,
                render_secs)};
}

Outcome c6()
{
    constexpr double f0 = 440.0;
    double bw[3];
    const double envs[3] = {0.1, 0.5, 1.0};
    for (int i = 0; i < 3; ++i) {
        bw[i] = measured_bandwidth(design_bandpass(f0, q_of_envelope(envs[i], QRange{}), 48000.0), f0, 48000.0);
    }
    const double target = f0 / 1000.0;
    const bool ok = bw[0] > bw[1] && bw[1] > bw[2] && bw[2] < 2.0 * target && bw[2] > target / 2.0;
    return {ok, fmt("bandwidth env0.1=%.4f env0.5=%.4f env1.0=%.4f Hz (f0/1000=%.3f)", bw[0], bw[1], bw[2], target)};
}

Outcome c7()
{
    constexpr int w = 320, h = 240;
    const auto freqs = NoteTable::build(0, kMajorScale).frequencies();
    const VideoFrame background = solid_frame(w, h, Rgb{0, 0, 0});
    const auto prev = to_monochrome(background);
    int mismatches = 0;
    int cells = 0;
    for (int row = 0; row < kGridRows; ++row) {
        for (int column = 0; column < kGridColumns; ++column) {
            VideoFrame cur = background;
            for (int y = 0; y < h; ++y) {
                if (cell_row(y, h) != row) continue;
                for (int x = 0; x < w; ++x) {
                    if (cell_column(x, w) == column) cur.at(x, y) = Rgb{255, 255, 255};
                }
            }
            GateState gates;
            const auto grid = grid_reduce(frame_diff(prev, to_monochrome(cur)));
            const auto events = detect_events(grid, gates, DetectorParams{}, 1, freqs);
            const bool ok = events.size() == 1 && events[0].kind == NoteEventKind::note_on &&
                            events[0].note_index == column && events[0].velocity == 127 - row;
            mismatches += !ok;
            ++cells;
        }
    }
    return {mismatches == 0 && cells == kGridCells, fmt("%d cells, %d mismatches", cells, mismatches)};
}

Outcome c8()
{
    const auto table = NoteTable::build(0, kMajorScale);
    const auto& e = table.entries();
    bool ok = e.size() == 51 && std::abs(e.front().freq_hz - 27.5) <= 0.01;
    for (std::size_t i = 0; i < e.size(); ++i) {
        ok = ok && std::ranges::find(kMajorScale, e[i].midi % 12) != kMajorScale.end();
        if (i > 0) ok = ok && e[i].freq_hz > e[i - 1].freq_hz;
    }
    return {ok, fmt("%zu entries, lowest %.4f Hz, highest %.3f Hz (midi %d)", e.size(), e.front().freq_hz,
                    e.back().freq_hz, e.back().midi)};
}

Outcome c9()
{
    TempDir dir;
    std::ostringstream sink;
    const auto clip = (dir / "clip.y4m").string();
    if (run_cli({"demo", "--out", clip, "--frames", "300"}, sink, sink) != 0) return {false, "demo clip failed"};
    for (const char* name : {"a", "b"}) {
        const int code = run_cli({"render", "--input", clip, "--out", (dir / (std::string(name) + ".wav")).string(), "--seed",
                                  "7", "--events", (dir / (std::string(name) + ".jsonl")).string()},
                                 sink, sink);
        if (code != 0) return {false, "render failed: " + sink.str()};
    }
    const auto wa = read_bytes(dir / "a.wav");
    const auto ea = read_bytes(dir / "a.jsonl");
    const bool ok = wa == read_bytes(dir / "b.wav") && ea == read_bytes(dir / "b.jsonl") && !ea.empty();
    return {ok, fmt("wav %zu bytes, event log %zu bytes, identical=%s", wa.size(), ea.size(), ok ? "yes" : "no")};
}

Outcome c10()
{
    Engine engine(EngineConfig{});
    for (int n = 0; n < 8; ++n) engine.trigger(3 + n * 6, 100);
    constexpr int kFrames = 400;
    constexpr int kWarmup = 10;
    std::vector<VideoFrame> frames;
    for (int i = 0; i < kFrames; ++i) {
        // Textured scene with sensor-like jitter below the change threshold,
        // so the 8 triggered voices are the whole load.
        frames.push_back(random_gray_frame(320, 240, 900 + static_cast<std::uint64_t>(i), 100, 112, i));
    }
    for (int i = 0; i < kWarmup; ++i) engine.process_frame(frames[static_cast<std::size_t>(i)]);
    std::vector<double> ms;
    ms.reserve(kFrames);
    std::size_t allocations = 0;
    int min_voices = 51;
    {
        AllocationProbe probe;
        for (int i = kWarmup; i < kFrames; ++i) {
            const auto t0 = Clock::now();
            engine.process_frame(frames[static_cast<std::size_t>(i)]);
            ms.push_back(seconds_since(t0) * 1000.0);
            min_voices = std::min(min_voices, engine.active_voices());
        }
        allocations = probe.count();
    }
    double mean = 0.0;
    for (const double v : ms) mean += v;
    mean /= static_cast<double>(ms.size());
    std::ranges::sort(ms);
    const double p99 = ms[static_cast<std::size_t>(0.99 * static_cast<double>(ms.size() - 1))];
    const bool ok = mean < 33.0 && p99 < 50.0 && allocations == 0 && min_voices == 8;
    return {ok, fmt("mean=%.2fms (<33) p99=%.2fms (<50) allocations=%zu active voices=%d", mean, p99, allocations,
                    min_voices)};
}

}  // namespace

int main()
{
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"1 solid-frame silence", c1},
        {"2 darkness silence", c2},
        {"3 static is white noise", c3},
        {"4 contrast/amplitude monotonicity", c4},
        {"5 filter selectivity", c5},
        {"6 envelope-Q coupling", c6},
        {"7 grid mapping", c7},
        {"8 note table", c8},
        {"9 determinism", c9},
        {"10 real-time budget", c10},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failed += !outcome.pass;
        std::printf("%s criterion %s: %s\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
        std::fflush(stdout);
    }
    return failed;
}
