#include "net_util.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace xcast::sockets::detail {

void fail(const std::string& what) { throw Error(what + ": " + std::strerror(errno)); }

void set_nonblocking(int fd) {
  const int flags = ::fcntl(fd, F_GETFL, 0);
  if (flags < 0 || ::fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0) fail("fcntl");
}

namespace {

in_addr parse_ipv4(const std::string& address) {
  in_addr addr{};
  if (::inet_pton(AF_INET, address.c_str(), &addr) != 1) throw Error("not an IPv4 address: " + address);
  return addr;
}

}  // namespace

int tcp_listen(const std::string& address, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) fail("socket");
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  sa.sin_addr = parse_ipv4(address);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0) {
    ::close(fd);
    fail("bind " + address + ":" + std::to_string(port));
  }
  if (::listen(fd, 64) < 0) {
    ::close(fd);
    fail("listen");
  }
  set_nonblocking(fd);
  return fd;
}

std::uint16_t local_port(int fd) {
  sockaddr_in sa{};
  socklen_t len = sizeof sa;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len) < 0) fail("getsockname");
  return ntohs(sa.sin_port);
}

int tcp_connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) return -1;
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) {
    ::freeaddrinfo(res);
    return -1;
  }
  const int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc < 0) {
    ::close(fd);
    return -1;
  }
  set_nonblocking(fd);
  return fd;
}

int udp_multicast_sender(const std::string& interface_address, int ttl) {
  const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
  if (fd < 0) fail("socket");
  const in_addr iface = parse_ipv4(interface_address);
  if (::setsockopt(fd, IPPROTO_IP, IP_MULTICAST_IF, &iface, sizeof iface) < 0) fail("IP_MULTICAST_IF");
  const unsigned char t = static_cast<unsigned char>(ttl);
  ::setsockopt(fd, IPPROTO_IP, IP_MULTICAST_TTL, &t, sizeof t);
  const unsigned char loop = 1;
  ::setsockopt(fd, IPPROTO_IP, IP_MULTICAST_LOOP, &loop, sizeof loop);
  const int buf = 4 << 20;
  ::setsockopt(fd, SOL_SOCKET, SO_SNDBUF, &buf, sizeof buf);
  set_nonblocking(fd);
  return fd;
}

int udp_multicast_receiver(const std::string& group, std::uint16_t port, const std::string& interface_address) {
  const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
  if (fd < 0) fail("socket");
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEPORT, &one, sizeof one);
  const int buf = 8 << 20;
  ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  sa.sin_addr = parse_ipv4(group);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0) {
    ::close(fd);
    fail("bind multicast " + group + ":" + std::to_string(port));
  }
  ip_mreq mreq{};
  mreq.imr_multiaddr = parse_ipv4(group);
  mreq.imr_interface = parse_ipv4(interface_address);
  if (::setsockopt(fd, IPPROTO_IP, IP_ADD_MEMBERSHIP, &mreq, sizeof mreq) < 0) {
    ::close(fd);
    fail("IP_ADD_MEMBERSHIP " + group);
  }
  set_nonblocking(fd);
  return fd;
}

Connection::Connection(EventLoop& loop, int fd, FrameHandler on_frame, CloseHandler on_close)
    : loop_(loop), fd_(fd), on_frame_(std::move(on_frame)), on_close_(std::move(on_close)) {
  loop_.watch(fd_, POLLIN, [this](short revents) { on_events(revents); });
}

Connection::~Connection() {
  if (fd_ >= 0) {
    loop_.unwatch(fd_);
    ::close(fd_);
  }
}

void Connection::close() {
  if (fd_ < 0) return;
  loop_.unwatch(fd_);
  ::close(fd_);
  fd_ = -1;
  if (on_close_) {
    auto cb = std::move(on_close_);
    cb();
  }
}

void Connection::send(const Bytes& frame) {
  if (fd_ < 0) return;
  if (out_sent_ == out_.size()) {
    out_.clear();
    out_sent_ = 0;
  }
  out_.insert(out_.end(), frame.begin(), frame.end());
  flush();
}

void Connection::flush() {
  while (fd_ >= 0 && out_sent_ < out_.size()) {
    const auto n = ::send(fd_, out_.data() + out_sent_, out_.size() - out_sent_, MSG_NOSIGNAL);
    if (n > 0) {
      out_sent_ += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      loop_.set_events(fd_, POLLIN | POLLOUT);
      return;
    }
    if (n < 0 && errno == EINTR) continue;
    close();
    return;
  }
  if (fd_ >= 0) loop_.set_events(fd_, POLLIN);
}

void Connection::on_events(short revents) {
  if (revents & POLLOUT) flush();
  if (fd_ < 0) return;
  if (revents & (POLLIN | POLLHUP | POLLERR)) {
    std::uint8_t buf[64 * 1024];
    while (fd_ >= 0) {
      const auto n = ::recv(fd_, buf, sizeof buf, 0);
      if (n > 0) {
        assembler_.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
        try {
          while (auto frame = assembler_.next()) {
            on_frame_(*frame);
            if (fd_ < 0) return;
          }
        } catch (const Error&) {
          close();
          return;
        }
        continue;
      }
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) break;
      if (n < 0 && errno == EINTR) continue;
      close();  // EOF or error
      return;
    }
  }
}

}  // namespace xcast::sockets::detail
