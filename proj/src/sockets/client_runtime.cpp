#include "xcast/sockets/client_runtime.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <charconv>
#include <future>
#include <iostream>

#include <httplib.h>

#include "net_util.hpp"

namespace xcast::sockets {

int proxy_status(const client::RequestResult& result) {
  if (result.ok()) return 200;
  switch (result.failure) {
    case client::Failure::timeout:
      return 504;
    case client::Failure::rejected:
      return result.code == wire::ErrorCode::unknown_segment ? 404 : 502;
    default:
      return 502;
  }
}

ClientRuntime::ClientRuntime(ClientRuntimeConfig config, client::SegmentCache cache)
    : config_(std::move(config)),
      client_(client::ClientConfig{config_.id, config_.request_timeout}, loop_, std::move(cache)) {
  client_.attach(*this);
}

ClientRuntime::~ClientRuntime() {
  stop();
  connection_.reset();
  if (mcast_fd_ >= 0) ::close(mcast_fd_);
}

void ClientRuntime::start() {
  mcast_fd_ = detail::udp_multicast_receiver(config_.multicast_group, config_.multicast_port,
                                             config_.multicast_interface);
  loop_.watch(mcast_fd_, POLLIN, [this](short) {
    std::uint8_t buf[65536];
    while (true) {
      const auto n = ::recv(mcast_fd_, buf, sizeof buf, 0);
      if (n <= 0) break;
      client_.on_datagram(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
    }
  });
  thread_ = std::thread([this] { loop_.run(); });
  loop_.call([this] { return ensure_connected(); });
  if (config_.proxy) start_proxy();
}

void ClientRuntime::stop() {
  if (proxy_) proxy_->stop();
  if (proxy_thread_.joinable()) proxy_thread_.join();
  if (thread_.joinable()) {
    loop_.call([this] {
      connection_.reset();
      return 0;
    });
    loop_.stop();
    thread_.join();
  }
}

bool ClientRuntime::ensure_connected() {
  if (connection_ && connection_->open()) return true;
  connection_.reset();
  const int fd = detail::tcp_connect(config_.server_host, config_.server_port);
  if (fd < 0) return false;
  connection_ = std::make_unique<detail::Connection>(
      loop_, fd, [this](const Bytes& frame) { client_.on_control(frame); },
      [this] { loop_.post([this] { client_.on_disconnect(); }); });
  client_.join();
  return true;
}

bool ClientRuntime::connected() {
  return loop_.call([this] { return connection_ && connection_->open(); });
}

void ClientRuntime::send_control(Bytes frame) {
  if (!connection_ || !connection_->open()) throw Error("server unreachable");
  connection_->send(frame);
}

client::RequestResult ClientRuntime::request(std::uint32_t file_id, std::uint32_t segment_index) {
  std::lock_guard serial(request_mutex_);
  auto promise = std::make_shared<std::promise<client::RequestResult>>();
  auto future = promise->get_future();
  loop_.post([this, file_id, segment_index, promise] {
    if (!client_.cache().contains(SegmentRef{file_id, segment_index, 0}) && !ensure_connected()) {
      client::RequestResult r;
      r.ref = SegmentRef{file_id, segment_index, 0};
      r.failure = client::Failure::unreachable;
      r.error = "server unreachable";
      promise->set_value(r);
      return;
    }
    client_.request_segment(file_id, segment_index,
                            [promise](const client::RequestResult& r) { promise->set_value(r); });
  });
  if (future.wait_for(config_.request_timeout + std::chrono::seconds(5)) != std::future_status::ready) {
    client::RequestResult r;
    r.ref = SegmentRef{file_id, segment_index, 0};
    r.failure = client::Failure::timeout;
    r.error = "no answer from the client loop";
    return r;
  }
  return future.get();
}

namespace {

bool parse_index(const std::string& text, std::uint32_t& out) {
  if (text.empty() || text.size() > 10) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

void ClientRuntime::start_proxy() {
  proxy_ = std::make_unique<httplib::Server>();
  proxy_->Get(R"(/video/([^/]*)/([^/]*))", [this](const httplib::Request& req, httplib::Response& res) {
    std::uint32_t file = 0;
    std::uint32_t index = 0;
    if (!parse_index(req.matches[1], file) || !parse_index(req.matches[2], index)) {
      res.status = 400;
      res.set_content("malformed segment path\n", "text/plain");
      return;
    }
    if (index == 0) {
      res.status = 404;
      res.set_content("segment indices start at 1\n", "text/plain");
      return;
    }
    const auto result = request(file, index);
    res.status = proxy_status(result);
    if (result.ok()) {
      res.set_content(std::string(result.body->begin(), result.body->end()), "application/octet-stream");
    } else {
      res.set_content(result.error + "\n", "text/plain");
    }
  });
  proxy_->Get(R"(/video(/.*)?)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
    res.set_content("expected /video/{file}/{segment}\n", "text/plain");
  });
  proxy_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) res.set_content("not found\n", "text/plain");
  });
  int port = config_.proxy_port;
  if (port == 0) {
    port = proxy_->bind_to_any_port(config_.proxy_address);
  } else if (!proxy_->bind_to_port(config_.proxy_address, port)) {
    port = -1;
  }
  if (port <= 0) throw Error("proxy cannot bind " + config_.proxy_address + ":" + std::to_string(config_.proxy_port));
  proxy_port_ = static_cast<std::uint16_t>(port);
  proxy_thread_ = std::thread([this] { proxy_->listen_after_bind(); });
  proxy_->wait_until_ready();
}

}  // namespace xcast::sockets
