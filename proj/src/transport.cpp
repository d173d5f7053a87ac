#include <motionsynth/transport.hpp>

#include <motionsynth/error.hpp>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/evp.h>
#include <openssl/sha.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <random>
#include <string_view>
#include <system_error>

namespace motionsynth {

namespace {

constexpr std::size_t kMaxHandshakeBytes = 16 * 1024;
constexpr std::uint8_t kOpContinuation = 0x0;
constexpr std::uint8_t kOpText = 0x1;
constexpr std::uint8_t kOpBinary = 0x2;
constexpr std::uint8_t kOpClose = 0x8;
constexpr std::uint8_t kOpPing = 0x9;
constexpr std::uint8_t kOpPong = 0xA;

[[noreturn]] void throw_errno(const char* what)
{
    throw std::system_error(errno, std::generic_category(), what);
}

std::string base64(std::span<const std::uint8_t> bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Header value by case-insensitive name, from a raw HTTP head.
std::optional<std::string> header_value(std::string_view head, std::string_view name)
{
    const std::string wanted = lower(name);
    std::size_t pos = head.find("\r\n");
    while (pos != std::string_view::npos && pos + 2 < head.size()) {
        const std::size_t start = pos + 2;
        const std::size_t end = head.find("\r\n", start);
        const std::string_view line = head.substr(start, end == std::string_view::npos ? head.npos : end - start);
        const std::size_t colon = line.find(':');
        if (colon != std::string_view::npos && lower(trim(line.substr(0, colon))) == wanted) {
            return std::string(trim(line.substr(colon + 1)));
        }
        pos = end;
    }
    return std::nullopt;
}

}  // namespace

std::string websocket_accept_key(const std::string& client_key)
{
    const std::string material = client_key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
    std::array<std::uint8_t, SHA_DIGEST_LENGTH> digest{};
    SHA1(reinterpret_cast<const unsigned char*>(material.data()), material.size(), digest.data());
    return base64(digest);
}

std::pair<std::string, std::uint16_t> parse_listen_address(const std::string& address)
{
    const auto colon = address.rfind(':');
    const std::string host = colon == std::string::npos ? "0.0.0.0" : address.substr(0, colon);
    const std::string port_text = colon == std::string::npos ? address : address.substr(colon + 1);
    if (port_text.empty() || !std::all_of(port_text.begin(), port_text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        port_text.size() > 5) {
        throw ConfigError("invalid listen address '" + address + "' (expected host:port)");
    }
    const int port = std::stoi(port_text);
    if (port > 65535) throw ConfigError("port out of range in '" + address + "'");
    return {host.empty() ? "0.0.0.0" : host, static_cast<std::uint16_t>(port)};
}

Connection::Connection(int fd, Role role, Mode mode) : fd_(fd), role_(role), mode_(mode)
{
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

Connection::~Connection()
{
    if (fd_ >= 0) ::close(fd_);
}

Connection::Connection(Connection&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)),
      role_(other.role_),
      mode_(other.mode_),
      peer_closed_(other.peer_closed_),
      inbox_(std::move(other.inbox_)),
      fragments_(std::move(other.fragments_)),
      framer_(std::move(other.framer_))
{
}

Connection& Connection::operator=(Connection&& other) noexcept
{
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = std::exchange(other.fd_, -1);
        role_ = other.role_;
        mode_ = other.mode_;
        peer_closed_ = other.peer_closed_;
        inbox_ = std::move(other.inbox_);
        fragments_ = std::move(other.fragments_);
        framer_ = std::move(other.framer_);
    }
    return *this;
}

Connection Connection::connect(const std::string& host, std::uint16_t port, bool websocket)
{
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    const std::string port_text = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), port_text.c_str(), &hints, &result); rc != 0) {
        throw std::runtime_error("cannot resolve " + host + ": " + gai_strerror(rc));
    }
    const int fd = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(result);
        throw_errno("socket");
    }
    const int rc = ::connect(fd, result->ai_addr, result->ai_addrlen);
    ::freeaddrinfo(result);
    if (rc != 0) {
        const int err = errno;
        ::close(fd);
        throw std::system_error(err, std::generic_category(), "connect");
    }
    Connection conn(fd, Role::client, websocket ? Mode::websocket : Mode::raw);
    if (websocket) conn.client_handshake(host, port);
    return conn;
}

void Connection::client_handshake(const std::string& host, std::uint16_t port)
{
    std::array<std::uint8_t, 16> nonce{};
    std::random_device rd;
    for (auto& b : nonce) b = static_cast<std::uint8_t>(rd());
    const std::string key = base64(nonce);
    const std::string request = "GET / HTTP/1.1\r\nHost: " + host + ":" + std::to_string(port) +
                                "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Key: " + key +
                                "\r\nSec-WebSocket-Version: 13\r\n\r\n";
    write_all({reinterpret_cast<const std::uint8_t*>(request.data()), request.size()});

    std::array<std::uint8_t, 4096> buf{};
    for (;;) {
        const std::string_view text(reinterpret_cast<const char*>(inbox_.data()), inbox_.size());
        if (const auto end = text.find("\r\n\r\n"); end != std::string_view::npos) {
            const auto head = text.substr(0, end + 2);
            if (head.rfind("HTTP/1.1 101", 0) != 0) throw ProtocolError("WebSocket upgrade refused");
            const auto accept = header_value(head, "Sec-WebSocket-Accept");
            if (!accept || *accept != websocket_accept_key(key)) throw ProtocolError("bad Sec-WebSocket-Accept");
            inbox_.erase(inbox_.begin(), inbox_.begin() + static_cast<std::ptrdiff_t>(end + 4));
            return;
        }
        if (inbox_.size() > kMaxHandshakeBytes) throw ProtocolError("WebSocket handshake too long");
        const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
        if (n <= 0) throw ProtocolError("connection closed during WebSocket handshake");
        inbox_.insert(inbox_.end(), buf.begin(), buf.begin() + n);
    }
}

void Connection::write_all(std::span<const std::uint8_t> bytes)
{
    while (!bytes.empty()) {
        const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("send");
        }
        bytes = bytes.subspan(static_cast<std::size_t>(n));
    }
}

void Connection::send(std::span<const std::uint8_t> framed)
{
    if (fd_ < 0) throw std::runtime_error("send on a closed connection");
    if (mode_ == Mode::websocket) {
        send_ws_frame(kOpBinary, framed);
    } else {
        write_all(framed);
    }
}

void Connection::send_ws_frame(std::uint8_t opcode, std::span<const std::uint8_t> payload)
{
    std::vector<std::uint8_t> frame;
    frame.reserve(payload.size() + 14);
    frame.push_back(static_cast<std::uint8_t>(0x80 | opcode));
    const std::uint8_t mask_bit = role_ == Role::client ? 0x80 : 0x00;
    if (payload.size() < 126) {
        frame.push_back(static_cast<std::uint8_t>(mask_bit | payload.size()));
    } else if (payload.size() <= 0xFFFF) {
        frame.push_back(static_cast<std::uint8_t>(mask_bit | 126));
        frame.push_back(static_cast<std::uint8_t>(payload.size() >> 8));
        frame.push_back(static_cast<std::uint8_t>(payload.size() & 0xff));
    } else {
        frame.push_back(static_cast<std::uint8_t>(mask_bit | 127));
        for (int shift = 56; shift >= 0; shift -= 8) frame.push_back(static_cast<std::uint8_t>((payload.size() >> shift) & 0xff));
    }
    if (role_ == Role::client) {
        static thread_local std::minstd_rand rng{std::random_device{}()};
        std::array<std::uint8_t, 4> mask{};
        for (auto& b : mask) b = static_cast<std::uint8_t>(rng());
        frame.insert(frame.end(), mask.begin(), mask.end());
        for (std::size_t i = 0; i < payload.size(); ++i) frame.push_back(payload[i] ^ mask[i % 4]);
    } else {
        frame.insert(frame.end(), payload.begin(), payload.end());
    }
    write_all(frame);
}

bool Connection::receive(int timeout_ms, std::vector<std::vector<std::uint8_t>>& out)
{
    if (fd_ < 0 || peer_closed_) return false;
    process_input(out);
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready < 0) {
        if (errno == EINTR) return true;
        throw_errno("poll");
    }
    if (ready == 0) return true;
    std::array<std::uint8_t, 64 * 1024> buf{};
    const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) return true;
        if (errno == ECONNRESET) {
            peer_closed_ = true;
            return false;
        }
        throw_errno("recv");
    }
    if (n == 0) {
        peer_closed_ = true;
        return false;
    }
    inbox_.insert(inbox_.end(), buf.begin(), buf.begin() + n);
    process_input(out);
    return !peer_closed_;
}

void Connection::process_input(std::vector<std::vector<std::uint8_t>>& out)
{
    if (mode_ == Mode::undecided) {
        if (inbox_.size() < 4) return;
        if (std::memcmp(inbox_.data(), "GET ", 4) == 0) {
            if (!try_handshake()) return;
            mode_ = Mode::websocket;
        } else {
            mode_ = Mode::raw;
        }
    }
    if (mode_ == Mode::raw) {
        framer_.feed(inbox_);
        inbox_.clear();
        while (auto message = framer_.next()) out.push_back(std::move(*message));
        return;
    }
    while (try_websocket_frame(out)) {
    }
}

bool Connection::try_handshake()
{
    const std::string_view text(reinterpret_cast<const char*>(inbox_.data()), inbox_.size());
    const auto end = text.find("\r\n\r\n");
    if (end == std::string_view::npos) {
        if (inbox_.size() > kMaxHandshakeBytes) throw ProtocolError("HTTP request head too long");
        return false;
    }
    const auto head = text.substr(0, end + 2);
    const auto upgrade = header_value(head, "Upgrade");
    const auto key = header_value(head, "Sec-WebSocket-Key");
    if (!upgrade || lower(*upgrade) != "websocket" || !key) {
        const std::string reply = "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
        write_all({reinterpret_cast<const std::uint8_t*>(reply.data()), reply.size()});
        throw ProtocolError("HTTP request is not a WebSocket upgrade");
    }
    const std::string reply = "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                              "Sec-WebSocket-Accept: " + websocket_accept_key(*key) + "\r\n\r\n";
    write_all({reinterpret_cast<const std::uint8_t*>(reply.data()), reply.size()});
    inbox_.erase(inbox_.begin(), inbox_.begin() + static_cast<std::ptrdiff_t>(end + 4));
    return true;
}

bool Connection::try_websocket_frame(std::vector<std::vector<std::uint8_t>>& out)
{
    if (inbox_.size() < 2) return false;
    const bool fin = inbox_[0] & 0x80;
    const std::uint8_t opcode = inbox_[0] & 0x0F;
    const bool masked = inbox_[1] & 0x80;
    std::uint64_t length = inbox_[1] & 0x7F;
    std::size_t pos = 2;
    if (length == 126) {
        if (inbox_.size() < 4) return false;
        length = (static_cast<std::uint64_t>(inbox_[2]) << 8) | inbox_[3];
        pos = 4;
    } else if (length == 127) {
        if (inbox_.size() < 10) return false;
        length = 0;
        for (std::size_t i = 2; i < 10; ++i) length = (length << 8) | inbox_[i];
        pos = 10;
    }
    if (length > kMaxMessageBytes + 4) throw ProtocolError("WebSocket frame too large");
    if (role_ == Role::server && !masked) throw ProtocolError("client WebSocket frames must be masked");
    std::array<std::uint8_t, 4> mask{};
    if (masked) {
        if (inbox_.size() < pos + 4) return false;
        std::copy_n(inbox_.begin() + static_cast<std::ptrdiff_t>(pos), 4, mask.begin());
        pos += 4;
    }
    if (inbox_.size() < pos + length) return false;
    std::vector<std::uint8_t> payload(inbox_.begin() + static_cast<std::ptrdiff_t>(pos),
                                      inbox_.begin() + static_cast<std::ptrdiff_t>(pos + length));
    inbox_.erase(inbox_.begin(), inbox_.begin() + static_cast<std::ptrdiff_t>(pos + length));
    if (masked) {
        for (std::size_t i = 0; i < payload.size(); ++i) payload[i] ^= mask[i % 4];
    }

    switch (opcode) {
    case kOpPing: send_ws_frame(kOpPong, payload); return true;
    case kOpPong: return true;
    case kOpClose:
        if (fd_ >= 0) {
            try {
                send_ws_frame(kOpClose, {});
            } catch (const std::system_error&) {
            }
        }
        peer_closed_ = true;
        return false;
    case kOpText: throw ProtocolError("text WebSocket messages are not part of the protocol");
    case kOpBinary:
    case kOpContinuation:
        if (opcode == kOpBinary && !fragments_.empty()) throw ProtocolError("interleaved WebSocket fragments");
        fragments_.insert(fragments_.end(), payload.begin(), payload.end());
        if (fragments_.size() > kMaxMessageBytes + 4) throw ProtocolError("WebSocket message too large");
        if (fin) {
            MessageFramer framer;
            framer.feed(fragments_);
            auto message = framer.next();
            if (!message || framer.buffered() != 0) {
                throw ProtocolError("WebSocket message must hold exactly one framed message");
            }
            out.push_back(std::move(*message));
            fragments_.clear();
        }
        return true;
    default: throw ProtocolError("unknown WebSocket opcode");
    }
}

void Connection::close() noexcept
{
    if (fd_ < 0) return;
    if (mode_ == Mode::websocket && !peer_closed_) {
        try {
            send_ws_frame(kOpClose, {});
        } catch (...) {
        }
    }
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
}

Listener::Listener(const std::string& host, std::uint16_t port)
{
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw_errno("socket");
    const int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    const std::string bind_host = host == "localhost" ? "127.0.0.1" : host;
    if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw ConfigError("cannot parse listen host '" + host + "' (IPv4 expected)");
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 4) != 0) {
        const int err = errno;
        ::close(fd_);
        throw std::system_error(err, std::generic_category(), "bind/listen " + host + ":" + std::to_string(port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

Listener::~Listener()
{
    if (fd_ >= 0) ::close(fd_);
}

std::optional<Connection> Listener::accept(int timeout_ms)
{
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready <= 0) return std::nullopt;
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) return std::nullopt;
    return Connection(fd, Connection::Role::server, Connection::Mode::undecided);
}

}  // namespace motionsynth
