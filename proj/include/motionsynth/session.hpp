#pragma once

#include <motionsynth/audio_sink.hpp>
#include <motionsynth/engine.hpp>
#include <motionsynth/protocol.hpp>
#include <motionsynth/transport.hpp>

#include <atomic>
#include <filesystem>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace motionsynth {

/// Bounded message queue between the engine thread and the network thread.
/// When full, push() discards the oldest message and counts the drop.
class EventQueue {
public:
    explicit EventQueue(std::size_t capacity);

    void push(ServerMessage message);
    /// Moves every queued message into `out` (appending) and returns the count.
    std::size_t drain(std::vector<ServerMessage>& out);

    [[nodiscard]] std::uint64_t dropped() const noexcept { return dropped_.load(std::memory_order_relaxed); }
    [[nodiscard]] std::size_t capacity() const noexcept { return ring_.size(); }

private:
    std::mutex mutex_;
    std::vector<ServerMessage> ring_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    std::atomic<std::uint64_t> dropped_{0};
};

struct ServeOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 9000;
    /// fps is taken from each session's hello; everything else from here.
    EngineConfig engine;
    std::size_t event_queue_capacity = 1024;
    int poll_interval_ms = 5;
    /// When set, note events of every session are appended here as JSON lines.
    std::filesystem::path event_log;
};

/// Live session service. Serves one client at a time: the calling thread
/// does network intake and event delivery, a per-session engine thread
/// renders frames handed over through a latest-wins mailbox.
class SessionServer {
public:
    /// Binds immediately (port 0 picks a free port).
    SessionServer(ServeOptions options, std::unique_ptr<AudioSink> sink);
    ~SessionServer();

    [[nodiscard]] std::uint16_t port() const noexcept { return listener_.port(); }

    /// Accepts and serves sessions until stop().
    void run();
    /// Safe from any thread.
    void stop() noexcept;

    [[nodiscard]] std::uint64_t sessions_served() const noexcept { return sessions_.load(); }

private:
    void serve(Connection& conn);

    ServeOptions options_;
    std::unique_ptr<AudioSink> sink_;
    Listener listener_;
    std::atomic<bool> stop_{false};
    std::atomic<std::uint64_t> sessions_{0};
};

}  // namespace motionsynth
