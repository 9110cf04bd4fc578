#include "szloca/udp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <utility>

#include "szloca/error.hpp"

namespace szloca {
namespace {

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* found = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &found);
  if (rc != 0 || found == nullptr) {
    throw Error(ErrorCode::Io, "cannot resolve host '" + host + "': " + ::gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, found->ai_addr, sizeof addr);
  ::freeaddrinfo(found);
  addr.sin_port = htons(port);
  return addr;
}

int open_socket() {
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd < 0) throw Error(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));
  return fd;
}

std::vector<std::uint8_t> to_bytes(const sockaddr_in& addr) {
  std::vector<std::uint8_t> raw(sizeof addr);
  std::memcpy(raw.data(), &addr, sizeof addr);
  return raw;
}

}  // namespace

Endpoint Endpoint::parse(std::string_view text, std::string_view expected_scheme) {
  const auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::InvalidConfig,
                 "bad endpoint '" + std::string(text) + "': " + why);
  };
  const auto sep = text.find("://");
  if (sep == std::string_view::npos) throw fail("expected scheme://HOST:PORT");
  Endpoint ep;
  ep.scheme = std::string(text.substr(0, sep));
  if (ep.scheme != expected_scheme) {
    throw fail("scheme must be " + std::string(expected_scheme));
  }
  const std::string_view rest = text.substr(sep + 3);
  const auto colon = rest.rfind(':');
  if (colon == std::string_view::npos || colon == 0) throw fail("expected HOST:PORT");
  ep.host = std::string(rest.substr(0, colon));
  const std::string_view port = rest.substr(colon + 1);
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535) {
    throw fail("port must be an integer in [0, 65535]");
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

std::string Endpoint::to_string() const {
  return scheme + "://" + host + ":" + std::to_string(port);
}

UdpSocket::UdpSocket(int fd, std::vector<std::uint8_t> destination)
    : fd_(fd), destination_(std::move(destination)) {}

UdpSocket UdpSocket::bind(const std::string& host, std::uint16_t port) {
  const sockaddr_in addr = resolve(host, port);
  UdpSocket sock(open_socket(), {});
  const int yes = 1;
  ::setsockopt(sock.fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  if (::bind(sock.fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    throw Error(ErrorCode::Io, "bind " + host + ":" + std::to_string(port) + ": " +
                                   std::strerror(errno));
  }
  return sock;
}

UdpSocket UdpSocket::sender(const std::string& host, std::uint16_t port) {
  return UdpSocket(open_socket(), to_bytes(resolve(host, port)));
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), destination_(std::move(other.destination_)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
    destination_ = std::move(other.destination_);
  }
  return *this;
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

bool UdpSocket::send(std::span<const std::uint8_t> bytes) {
  if (destination_.empty()) throw Error(ErrorCode::Io, "socket has no destination");
  const auto n = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                          reinterpret_cast<const sockaddr*>(destination_.data()),
                          static_cast<socklen_t>(destination_.size()));
  return n == static_cast<ssize_t>(bytes.size());
}

bool UdpSocket::send_to(std::span<const std::uint8_t> bytes, const std::string& host,
                        std::uint16_t port) {
  const sockaddr_in addr = resolve(host, port);
  const auto n = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                          reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
  return n == static_cast<ssize_t>(bytes.size());
}

std::optional<std::string> UdpSocket::receive(std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready < 0) {
    if (errno == EINTR) return std::nullopt;
    throw Error(ErrorCode::Io, std::string("poll: ") + std::strerror(errno));
  }
  if (ready == 0) return std::nullopt;
  std::string buf(65536, '\0');
  const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
  if (n < 0) throw Error(ErrorCode::Io, std::string("recv: ") + std::strerror(errno));
  buf.resize(static_cast<std::size_t>(n));
  return buf;
}

std::uint16_t UdpSocket::local_port() const {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw Error(ErrorCode::Io, std::string("getsockname: ") + std::strerror(errno));
  }
  return ntohs(addr.sin_port);
}

OscEmitter::OscEmitter(const Endpoint& destination, std::size_t capacity)
    : socket_(UdpSocket::sender(destination.host, destination.port)),
      capacity_(capacity == 0 ? 1 : capacity),
      worker_([this](std::stop_token stop) { run(stop); }) {}

OscEmitter::~OscEmitter() {
  flush();
  worker_.request_stop();
}

void OscEmitter::enqueue(std::vector<std::uint8_t> datagram) {
  {
    std::lock_guard lock(mutex_);
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++stats_.dropped;
    }
    queue_.push_back(std::move(datagram));
    ++stats_.enqueued;
  }
  ready_.notify_one();
}

void OscEmitter::flush() {
  std::unique_lock lock(mutex_);
  drained_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

EmitterStats OscEmitter::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

void OscEmitter::run(std::stop_token stop) {
  std::unique_lock lock(mutex_);
  while (true) {
    ready_.wait(lock, stop, [this] { return !queue_.empty(); });
    if (queue_.empty()) return;
    auto datagram = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    const bool ok = socket_.send(datagram);
    lock.lock();
    busy_ = false;
    if (ok) {
      ++stats_.sent;
    } else {
      ++stats_.send_errors;
    }
    if (queue_.empty()) drained_.notify_all();
  }
}

}  // namespace szloca
