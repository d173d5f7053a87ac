#include <motionsynth/session.hpp>

#include <motionsynth/event_log.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace motionsynth {

EventQueue::EventQueue(std::size_t capacity) : ring_(capacity == 0 ? 1 : capacity) {}

void EventQueue::push(ServerMessage message)
{
    const std::lock_guard lock(mutex_);
    if (size_ == ring_.size()) {
        head_ = (head_ + 1) % ring_.size();
        --size_;
        dropped_.fetch_add(1, std::memory_order_relaxed);
    }
    ring_[(head_ + size_) % ring_.size()] = std::move(message);
    ++size_;
}

std::size_t EventQueue::drain(std::vector<ServerMessage>& out)
{
    const std::lock_guard lock(mutex_);
    const std::size_t n = size_;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::move(ring_[(head_ + i) % ring_.size()]));
    head_ = 0;
    size_ = 0;
    return n;
}

namespace {

class LiveSession {
public:
    LiveSession(EngineConfig cfg, const Hello& hello, std::size_t queue_capacity, AudioSink& sink)
        : engine_(std::move(cfg)), queue_(queue_capacity), sink_(sink), width_(hello.width), height_(hello.height),
          fps_(hello.fps)
    {
        engine_.prepare(width_, height_);
        env_points_.reserve(kGridColumns);
        worker_ = std::thread([this] { run(); });
    }

    ~LiveSession() { shutdown(); }

    void shutdown() noexcept
    {
        stop_.store(true, std::memory_order_release);
        box_.interrupt();
        if (worker_.joinable()) worker_.join();
    }

    // Network thread: copy a frame message into the mailbox.
    void submit(const FrameMessage& message)
    {
        auto& frame = box_.back_slot();
        frame.width = width_;
        frame.height = height_;
        frame.frame_index = message.frame_index;
        frame.timestamp = static_cast<double>(message.frame_index) / fps_;
        frame.pixels.resize(message.payload.size());
        for (std::size_t i = 0; i < message.payload.size(); ++i) {
            const auto v = message.payload[i];
            frame.pixels[i] = Rgb{v, v, v};
        }
        latest_intake_.store(message.frame_index, std::memory_order_relaxed);
        box_.publish();
    }

    void patch(const ConfigPatch& patch)
    {
        const std::lock_guard lock(patch_mutex_);
        pending_ = apply_patch(pending_ ? *pending_ : config_snapshot_, patch);
        config_snapshot_ = *pending_;
    }

    void set_config_snapshot(const EngineConfig& cfg) { config_snapshot_ = cfg; }

    Welcome welcome() const
    {
        const auto freqs = engine_.note_table().frequencies();
        return Welcome{kProtocolVersion, engine_.config().sample_rate, engine_.config().attack_s,
                       engine_.config().release_s, std::vector<double>(freqs.begin(), freqs.end())};
    }

    EventQueue& queue() noexcept { return queue_; }
    [[nodiscard]] bool failed() const noexcept { return failed_.load(std::memory_order_acquire); }

private:
    void run()
    {
        try {
            for (;;) {
                const auto seen = box_.published_count();
                if (stop_.load(std::memory_order_acquire)) return;
                if (const VideoFrame* frame = box_.take()) {
                    render(*frame);
                    continue;
                }
                box_.wait_past(seen);
            }
        } catch (const std::exception& e) {
            queue_.push(ErrorMessage{std::string("engine: ") + e.what()});
            failed_.store(true, std::memory_order_release);
        }
    }

    void render(const VideoFrame& frame)
    {
        if (patch_mutex_.try_lock()) {
            std::optional<EngineConfig> next;
            next.swap(pending_);
            patch_mutex_.unlock();
            if (next) engine_.reconfigure(std::move(*next));
        }

        const FrameResult result = engine_.process_frame(frame);
        sink_.write(result.audio);

        for (const auto& event : result.events) queue_.push(to_message(event));
        env_points_.clear();
        engine_.envelope_points(frame.frame_index, env_points_);
        for (const auto& point : env_points_) queue_.push(EnvMessage{point.note_index, point.value, point.frame_index});

        double energy = 0.0;
        for (const float s : result.audio) energy += static_cast<double>(s) * s;
        const double rms = result.audio.empty() ? 0.0 : std::sqrt(energy / static_cast<double>(result.audio.size()));
        queue_.push(StatsMessage{engine_.clip_count(), rms,
                                 latest_intake_.load(std::memory_order_relaxed) - frame.frame_index, queue_.dropped(),
                                 frame.frame_index});
    }

    Engine engine_;
    LatestMailbox<VideoFrame> box_;
    EventQueue queue_;
    AudioSink& sink_;
    int width_;
    int height_;
    double fps_;
    std::vector<EnvelopePoint> env_points_;

    std::mutex patch_mutex_;
    std::optional<EngineConfig> pending_;
    EngineConfig config_snapshot_;

    std::atomic<bool> stop_{false};
    std::atomic<bool> failed_{false};
    std::atomic<std::int64_t> latest_intake_{-1};
    std::thread worker_;
};

void send_message(Connection& conn, const ServerMessage& message)
{
    const auto bytes = encode_message(message);
    conn.send(bytes);
}

void reject(Connection& conn, const std::string& why)
{
    try {
        send_message(conn, ErrorMessage{why});
    } catch (const std::exception&) {
    }
    conn.close();
}

}  // namespace

SessionServer::SessionServer(ServeOptions options, std::unique_ptr<AudioSink> sink)
    : options_(std::move(options)), sink_(std::move(sink)), listener_(options_.host, options_.port)
{
    validate(options_.engine);
}

SessionServer::~SessionServer()
{
    stop();
}

void SessionServer::stop() noexcept
{
    stop_.store(true, std::memory_order_release);
}

void SessionServer::run()
{
    while (!stop_.load(std::memory_order_acquire)) {
        auto conn = listener_.accept(100);
        if (!conn) continue;
        try {
            serve(*conn);
        } catch (const std::exception& e) {
            std::clog << "motionsynth: session ended: " << e.what() << '\n';
        }
        conn->close();
        sessions_.fetch_add(1);
    }
}

void SessionServer::serve(Connection& conn)
{
    std::unique_ptr<LiveSession> session;
    std::int64_t last_index = -1;
    std::size_t frame_bytes = 0;
    std::vector<std::vector<std::uint8_t>> inbound;
    std::vector<ServerMessage> outbound;
    std::ofstream log;
    if (!options_.event_log.empty()) log.open(options_.event_log, std::ios::app | std::ios::binary);
    std::array<int, kGridColumns> open_rows{};
    std::array<double, kGridColumns> freqs{};

    auto log_event = [&](const ServerMessage& message) {
        if (!log.is_open()) return;
        if (const auto* on = std::get_if<NoteOnMessage>(&message)) {
            open_rows[static_cast<std::size_t>(on->note_index)] = on->row;
            freqs[static_cast<std::size_t>(on->note_index)] = on->freq_hz;
            log << to_json_line(NoteEvent{NoteEventKind::note_on, on->note_index, on->velocity, on->column, on->row,
                                          on->frame_index, on->freq_hz})
                << '\n';
        } else if (const auto* off = std::get_if<NoteOffMessage>(&message)) {
            const auto i = static_cast<std::size_t>(off->note_index);
            log << to_json_line(NoteEvent{NoteEventKind::note_off, off->note_index, 0, off->note_index, open_rows[i],
                                          off->frame_index, freqs[i]})
                << '\n';
        }
    };

    auto flush = [&] {
        if (!session) return;
        outbound.clear();
        session->queue().drain(outbound);
        for (const auto& message : outbound) {
            log_event(message);
            send_message(conn, message);
        }
        if (log.is_open()) log.flush();
    };

    while (!stop_.load(std::memory_order_acquire)) {
        inbound.clear();
        bool open = true;
        try {
            open = conn.receive(options_.poll_interval_ms, inbound);
        } catch (const ProtocolError& e) {
            flush();
            reject(conn, std::string("protocol error: ") + e.what());
            return;
        }

        for (const auto& bytes : inbound) {
            ClientMessage message;
            try {
                message = decode_client_message(bytes);
            } catch (const ProtocolError& e) {
                flush();
                reject(conn, std::string("protocol error: ") + e.what());
                return;
            }

            if (const auto* hello = std::get_if<Hello>(&message)) {
                if (session) {
                    reject(conn, "protocol error: duplicate hello");
                    return;
                }
                if (hello->protocol_version != kProtocolVersion) {
                    reject(conn, "protocol_version " + std::to_string(hello->protocol_version) +
                                     " unsupported; server speaks " + std::to_string(kProtocolVersion));
                    return;
                }
                if (hello->width < kGridColumns || hello->height < kGridRows) {
                    reject(conn, "frame size must be at least " + std::to_string(kGridColumns) + "x" +
                                     std::to_string(kGridRows));
                    return;
                }
                EngineConfig cfg = options_.engine;
                cfg.fps = hello->fps;
                try {
                    validate(cfg);
                    session = std::make_unique<LiveSession>(cfg, *hello, options_.event_queue_capacity, *sink_);
                    session->set_config_snapshot(cfg);
                } catch (const ConfigError& e) {
                    reject(conn, std::string("cannot start session: ") + e.what());
                    return;
                }
                frame_bytes = static_cast<std::size_t>(hello->width) * static_cast<std::size_t>(hello->height);
                const Welcome welcome = session->welcome();
                std::copy(welcome.note_freqs.begin(), welcome.note_freqs.end(), freqs.begin());
                send_message(conn, welcome);
                continue;
            }

            if (!session) {
                reject(conn, "protocol error: expected hello first");
                return;
            }

            if (const auto* frame = std::get_if<FrameMessage>(&message)) {
                if (frame->payload.size() != frame_bytes) {
                    flush();
                    reject(conn, "protocol error: frame payload " + std::to_string(frame->payload.size()) +
                                     " bytes, expected width*height = " + std::to_string(frame_bytes));
                    return;
                }
                if (frame->frame_index <= last_index) {
                    flush();
                    reject(conn, "protocol error: frame_index must increase");
                    return;
                }
                last_index = frame->frame_index;
                session->submit(*frame);
            } else if (const auto* patch = std::get_if<ConfigPatch>(&message)) {
                try {
                    session->patch(*patch);
                } catch (const ConfigError& e) {
                    send_message(conn, ErrorMessage{std::string("config_patch rejected: ") + e.what()});
                }
            }
        }

        flush();
        if (session && session->failed()) {
            flush();
            conn.close();
            return;
        }
        if (!open) return;
    }
}

}  // namespace motionsynth
