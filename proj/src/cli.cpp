#include <motionsynth/cli.hpp>

#include <motionsynth/audio_sink.hpp>
#include <motionsynth/engine.hpp>
#include <motionsynth/event_log.hpp>
#include <motionsynth/session.hpp>
#include <motionsynth/wav.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <ostream>
#include <pthread.h>
#include <random>
#include <thread>

namespace motionsynth {

namespace {

struct SynthFlags {
    double fps = 30.0;
    std::uint64_t seed = 0;
    double sample_rate = 48000.0;
    std::string root = "C";
    std::string scale = "major";
    double attack = 0.08;
    double release = 0.6;
    double q_max = 1000.0;
    double q_min = 5.0;
    double master_gain = 0.7;
    std::string format = "pcm16";
    std::string events;
};

void add_synth_flags(CLI::App& cmd, SynthFlags& f)
{
    cmd.add_option("--fps", f.fps, "Frame rate of the video")->capture_default_str();
    cmd.add_option("--seed", f.seed, "Session seed for the pixel shuffle")->capture_default_str();
    cmd.add_option("--sample-rate", f.sample_rate, "Output sample rate in Hz")->capture_default_str();
    cmd.add_option("--root", f.root, "Scale root (C, F#, Bb, ... or 0-11)")->capture_default_str();
    cmd.add_option("--scale", f.scale, "Scale")->check(CLI::IsMember({"major", "chromatic"}))->capture_default_str();
    cmd.add_option("--attack", f.attack, "Envelope attack in seconds")->capture_default_str();
    cmd.add_option("--release", f.release, "Envelope release in seconds")->capture_default_str();
    cmd.add_option("--q-max", f.q_max, "Band-pass Q at full sustain")->capture_default_str();
    cmd.add_option("--q-min", f.q_min, "Band-pass Q at envelope zero")->capture_default_str();
    cmd.add_option("--master-gain", f.master_gain, "Gain applied to the voice sum")->capture_default_str();
    cmd.add_option("--format", f.format, "WAV sample format")->check(CLI::IsMember({"pcm16", "float32"}))->capture_default_str();
    cmd.add_option("--events", f.events, "Write note events as JSON lines to this file");
}

EngineConfig engine_config(const SynthFlags& f)
{
    EngineConfig cfg;
    cfg.fps = f.fps;
    cfg.session_seed = f.seed;
    cfg.sample_rate = f.sample_rate;
    cfg.root_pitch_class = parse_pitch_class(f.root);
    cfg.scale_intervals = f.scale == "chromatic" ? kChromaticScale : kMajorScale;
    cfg.attack_s = f.attack;
    cfg.release_s = f.release;
    cfg.q_range = QRange{f.q_min, f.q_max};
    cfg.master_gain = f.master_gain;
    validate(cfg);
    return cfg;
}

unsigned wav_rate(double sample_rate)
{
    if (sample_rate != std::floor(sample_rate) || sample_rate > 4.0e9) {
        throw ConfigError("sample rate must be a whole number of Hz for WAV output");
    }
    return static_cast<unsigned>(sample_rate);
}

int cmd_render(const SynthFlags& f, const std::string& input, const std::string& out_path, std::ostream& out)
{
    Engine engine(engine_config(f));
    const auto spec = WavSpec{wav_rate(f.sample_rate), parse_wav_format(f.format)};
    auto stream = open_source(describe_path(input, f.fps));
    const RenderOutput result = render_offline(engine, *stream);
    write_wav_file(out_path, result.audio, spec);
    if (!f.events.empty()) write_event_log_file(f.events, result.events);
    out << "rendered " << result.frames << " frames, " << result.audio.size() << " samples, " << result.events.size()
        << " events, " << result.clip_count << " clipped samples -> " << out_path << '\n';
    return 0;
}

int cmd_serve(const SynthFlags& f, const std::string& listen, const std::string& audio, std::ostream& out)
{
    ServeOptions options;
    std::tie(options.host, options.port) = parse_listen_address(listen);
    options.engine = engine_config(f);
    options.event_log = f.events;
    const auto rate = wav_rate(f.sample_rate);
    auto sink = make_audio_sink(audio, rate, parse_wav_format(f.format));

    // Route SIGINT/SIGTERM to a watcher thread that stops the server.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    SessionServer server(options, std::move(sink));
    out << "listening on " << options.host << ":" << server.port() << " (audio: " << audio << ")" << std::endl;
    std::thread watcher([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.run();
    pthread_kill(watcher.native_handle(), SIGTERM);
    watcher.join();
    return 0;
}

// Synthetic test video: a bright block drifting across a dim textured field.
int cmd_demo(const std::string& out_path, int frames, int width, int height, std::uint64_t seed, std::ostream& out)
{
    if (frames < 1 || width < kGridColumns || height < kGridRows) {
        throw ConfigError("demo needs >= 1 frame and at least a 51x127 frame");
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    file << "YUV4MPEG2 W" << width << " H" << height << " F30:1 Ip A1:1 Cmono\n";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> texture(40, 90);
    std::vector<std::uint8_t> background(static_cast<std::size_t>(width) * height);
    for (auto& px : background) px = static_cast<std::uint8_t>(texture(rng));
    const int block_w = std::max(width / 16, 4);
    const int block_h = std::max(height / 8, 4);
    std::vector<std::uint8_t> raster(background.size());
    for (int f = 0; f < frames; ++f) {
        raster = background;
        // Hold still for a few frames every 30 so notes get released.
        const int t = f - f / 30 * 5;
        const int bx = (t * 7) % (width - block_w);
        const int by = static_cast<int>((0.5 + 0.4 * std::sin(t * 0.05)) * (height - block_h));
        for (int y = by; y < by + block_h; ++y) {
            for (int x = bx; x < bx + block_w; ++x) raster[static_cast<std::size_t>(y) * width + x] = 230;
        }
        file << "FRAME\n";
        file.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    }
    out << "wrote " << frames << " frames (" << width << "x" << height << ") -> " << out_path << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Video sonification instrument: filtered-noise synthesis driven by motion"};
    app.name("motionsynth");
    app.require_subcommand(1);

    SynthFlags render_flags;
    std::string input;
    std::string out_path;
    auto* render = app.add_subcommand("render", "Render a video offline to WAV (and a JSON-lines event log)");
    render->add_option("--input", input, "Y4M file or directory of PGM/PNG frames")->required();
    render->add_option("--out", out_path, "Output WAV path")->required();
    add_synth_flags(*render, render_flags);

    SynthFlags serve_flags;
    std::string listen = "127.0.0.1:9000";
    std::string audio = "default";
    auto* serve = app.add_subcommand("serve", "Run the live session service");
    serve->add_option("--listen", listen, "Address to listen on (host:port)")->capture_default_str();
    serve->add_option("--audio", audio, "Audio output: default, null, or wav:PATH")->capture_default_str();
    add_synth_flags(*serve, serve_flags);

    std::string demo_out;
    int demo_frames = 300;
    int demo_width = 320;
    int demo_height = 240;
    std::uint64_t demo_seed = 1;
    auto* demo = app.add_subcommand("demo", "Write a synthetic Y4M clip with a moving block");
    demo->add_option("--out", demo_out, "Output .y4m path")->required();
    demo->add_option("--frames", demo_frames, "Number of frames")->capture_default_str();
    demo->add_option("--width", demo_width, "Frame width")->capture_default_str();
    demo->add_option("--height", demo_height, "Frame height")->capture_default_str();
    demo->add_option("--seed", demo_seed, "Background texture seed")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
            err << sub->help();
        }
        return 1;
    }

    try {
        if (render->parsed()) return cmd_render(render_flags, input, out_path, out);
        if (serve->parsed()) return cmd_serve(serve_flags, listen, audio, out);
        if (demo->parsed()) return cmd_demo(demo_out, demo_frames, demo_width, demo_height, demo_seed, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace motionsynth
