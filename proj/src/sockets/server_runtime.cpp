#include "xcast/sockets/server_runtime.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>

#include "net_util.hpp"

namespace xcast::sockets {

ServerRuntime::ServerRuntime(ServerRuntimeConfig config, server::Catalog catalog, const OriginFactory& origin)
    : config_(std::move(config)) {
  if (!(config_.multicast_rate_bps > 0)) throw ConfigError("multicast rate must be positive");
  origin_ = origin(loop_);
  server_ = std::make_unique<server::EdgeServer>(config_.server, std::move(catalog), loop_, *this, *origin_);
  listen_fd_ = detail::tcp_listen(config_.bind_address, config_.port);
  port_ = detail::local_port(listen_fd_);
  mcast_fd_ = detail::udp_multicast_sender(config_.multicast_interface, config_.multicast_ttl);
  loop_.watch(listen_fd_, POLLIN, [this](short) { accept_ready(); });
}

ServerRuntime::~ServerRuntime() {
  stop();
  connections_.clear();
  server_.reset();
  origin_.reset();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  if (mcast_fd_ >= 0) ::close(mcast_fd_);
}

void ServerRuntime::start() {
  thread_ = std::thread([this] { run(); });
}

void ServerRuntime::run() {
  loop_.run();
  // stopped for good: clients must see the connection drop
  connections_.clear();
  if (listen_fd_ >= 0) {
    loop_.unwatch(listen_fd_);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

void ServerRuntime::stop() {
  loop_.stop();
  if (thread_.joinable()) thread_.join();
}

void ServerRuntime::accept_ready() {
  while (true) {
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_NONBLOCK | SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        std::cerr << "xcast-server: accept failed: " << std::strerror(errno) << '\n';
      }
      return;
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    const ChannelId channel = next_channel_++;
    connections_.emplace(channel, std::make_unique<detail::Connection>(
                                      loop_, fd,
                                      [this, channel](const Bytes& frame) { server_->on_control(channel, frame); },
                                      [this, channel] {
                                        // the connection may still be on the stack
                                        loop_.post([this, channel] {
                                          connections_.erase(channel);
                                          server_->on_disconnect(channel);
                                        });
                                      }));
  }
}

void ServerRuntime::send_control(ChannelId channel, Bytes frame) {
  auto it = connections_.find(channel);
  if (it != connections_.end()) it->second->send(frame);
}

void ServerRuntime::multicast(std::vector<Bytes> datagrams, std::function<void()> on_drained) {
  batches_.push_back({std::deque<Bytes>(std::make_move_iterator(datagrams.begin()),
                                        std::make_move_iterator(datagrams.end())),
                      std::move(on_drained)});
  pump();
}

void ServerRuntime::pump() {
  sockaddr_in dest{};
  dest.sin_family = AF_INET;
  dest.sin_port = htons(config_.multicast_port);
  ::inet_pton(AF_INET, config_.multicast_group.c_str(), &dest.sin_addr);

  const Timestamp now = loop_.now();
  if (next_send_ < now) next_send_ = now;
  while (!batches_.empty()) {
    auto& batch = batches_.front();
    if (batch.datagrams.empty()) {
      auto done = std::move(batch.on_drained);
      batches_.pop_front();
      if (done) done();
      continue;
    }
    if (next_send_ > loop_.now()) break;
    const Bytes& d = batch.datagrams.front();
    const auto n = ::sendto(mcast_fd_, d.data(), d.size(), 0, reinterpret_cast<sockaddr*>(&dest), sizeof dest);
    if (n < 0 && (errno == EAGAIN || errno == ENOBUFS)) {
      next_send_ = loop_.now() + std::chrono::milliseconds(1);
      break;
    }
    if (n < 0) std::cerr << "xcast-server: multicast send failed: " << std::strerror(errno) << '\n';
    next_send_ += Duration(static_cast<std::int64_t>(static_cast<double>(d.size()) * 8e9 / config_.multicast_rate_bps));
    batch.datagrams.pop_front();
  }
  if (!batches_.empty() && !pump_armed_) {
    pump_armed_ = true;
    loop_.schedule_at(next_send_, [this] {
      pump_armed_ = false;
      pump();
    });
  }
}

}  // namespace xcast::sockets
