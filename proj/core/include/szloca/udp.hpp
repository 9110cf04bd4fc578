#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace szloca {

/// scheme://HOST:PORT
struct Endpoint {
  std::string scheme;
  std::string host;
  std::uint16_t port = 0;

  /// Throws Error(InvalidConfig) if the text is malformed or the scheme differs.
  static Endpoint parse(std::string_view text, std::string_view expected_scheme);

  [[nodiscard]] std::string to_string() const;
};

/// IPv4 datagram socket. Move-only; closes on destruction.
class UdpSocket {
 public:
  /// Bound to host:port (port 0 picks an ephemeral port).
  static UdpSocket bind(const std::string& host, std::uint16_t port);
  /// Unbound sender aimed at host:port.
  static UdpSocket sender(const std::string& host, std::uint16_t port);

  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;
  ~UdpSocket();

  /// Sends to the sender's destination. Returns false if the kernel refused it.
  bool send(std::span<const std::uint8_t> bytes);
  /// Sends to an explicit destination.
  bool send_to(std::span<const std::uint8_t> bytes, const std::string& host, std::uint16_t port);

  /// One datagram, or nullopt when nothing arrived within the timeout.
  std::optional<std::string> receive(std::chrono::milliseconds timeout);

  [[nodiscard]] std::uint16_t local_port() const;

 private:
  UdpSocket(int fd, std::vector<std::uint8_t> destination);

  int fd_ = -1;
  std::vector<std::uint8_t> destination_;  // raw sockaddr_in
};

struct EmitterStats {
  std::size_t enqueued = 0;
  std::size_t sent = 0;
  std::size_t dropped = 0;
  std::size_t send_errors = 0;
};

/// Sends datagrams from a worker thread. The queue is bounded: when full, the
/// oldest pending datagram is discarded so producers never block.
class OscEmitter {
 public:
  OscEmitter(const Endpoint& destination, std::size_t capacity);
  ~OscEmitter();

  OscEmitter(const OscEmitter&) = delete;
  OscEmitter& operator=(const OscEmitter&) = delete;

  void enqueue(std::vector<std::uint8_t> datagram);

  /// Blocks until every queued datagram has been handed to the socket.
  void flush();

  [[nodiscard]] EmitterStats stats() const;

 private:
  void run(std::stop_token stop);

  UdpSocket socket_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable_any ready_;
  std::condition_variable drained_;
  std::deque<std::vector<std::uint8_t>> queue_;
  bool busy_ = false;
  EmitterStats stats_;
  std::jthread worker_;
};

}  // namespace szloca
