#pragma once

#include <motionsynth/protocol.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace motionsynth {

/// One TCP peer exchanging framed protocol messages, either raw
/// (length-prefixed bytes on the socket) or inside WebSocket binary messages.
/// A server-side connection decides which by sniffing the first bytes: an
/// HTTP "GET " request is upgraded to WebSocket, anything else is raw.
class Connection {
public:
    enum class Role { server, client };
    enum class Mode { undecided, raw, websocket };

    Connection(int fd, Role role, Mode mode);
    ~Connection();
    Connection(Connection&& other) noexcept;
    Connection& operator=(Connection&& other) noexcept;
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    /// Client side. `websocket` performs the HTTP upgrade before returning.
    static Connection connect(const std::string& host, std::uint16_t port, bool websocket = false);

    /// Waits up to timeout_ms for input and appends every complete message to
    /// `out`. Returns false once the peer has closed. Throws ProtocolError on
    /// malformed framing.
    bool receive(int timeout_ms, std::vector<std::vector<std::uint8_t>>& out);

    /// Blocks until one framed message has been written.
    void send(std::span<const std::uint8_t> framed);

    /// Sends a WebSocket close frame (if applicable) and shuts the socket down.
    void close() noexcept;

    [[nodiscard]] Mode mode() const noexcept { return mode_; }
    [[nodiscard]] bool is_open() const noexcept { return fd_ >= 0; }

private:
    void write_all(std::span<const std::uint8_t> bytes);
    void process_input(std::vector<std::vector<std::uint8_t>>& out);
    bool try_handshake();
    bool try_websocket_frame(std::vector<std::vector<std::uint8_t>>& out);
    void send_ws_frame(std::uint8_t opcode, std::span<const std::uint8_t> payload);
    void client_handshake(const std::string& host, std::uint16_t port);

    int fd_ = -1;
    Role role_;
    Mode mode_;
    bool peer_closed_ = false;
    std::vector<std::uint8_t> inbox_;
    std::vector<std::uint8_t> fragments_;
    MessageFramer framer_;
};

/// Listening socket.
class Listener {
public:
    /// Binds host:port (port 0 picks a free port). Throws std::system_error.
    Listener(const std::string& host, std::uint16_t port);
    ~Listener();
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    [[nodiscard]] std::uint16_t port() const noexcept { return port_; }

    /// Waits up to timeout_ms for a peer.
    std::optional<Connection> accept(int timeout_ms);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

/// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept_key(const std::string& client_key);

/// Splits "host:port"; a bare port binds all interfaces. Throws ConfigError.
std::pair<std::string, std::uint16_t> parse_listen_address(const std::string& address);

}  // namespace motionsynth
