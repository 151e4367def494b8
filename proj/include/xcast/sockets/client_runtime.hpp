#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "xcast/client/client.hpp"
#include "xcast/sockets/event_loop.hpp"

namespace httplib {
class Server;
}

namespace xcast::sockets {

namespace detail {
class Connection;
}

struct ClientRuntimeConfig {
  ClientId id = 1;
  std::string server_host = "127.0.0.1";
  std::uint16_t server_port = 7700;
  std::string multicast_group = "239.77.0.1";
  std::uint16_t multicast_port = 7701;
  std::string multicast_interface = "127.0.0.1";
  Duration request_timeout = std::chrono::seconds(30);
  /// Local HTTP proxy serving GET /video/{file}/{segment}.
  bool proxy = false;
  std::string proxy_address = "127.0.0.1";
  /// 0 picks an ephemeral port.
  std::uint16_t proxy_port = 8090;
};

/// A client over real sockets: TCP control channel, multicast receiver and
/// the optional local proxy.
class ClientRuntime : public ClientLink {
 public:
  ClientRuntime(ClientRuntimeConfig config, client::SegmentCache cache = client::SegmentCache{});
  ~ClientRuntime() override;

  /// Joins the multicast group, starts the loop thread, connects to the
  /// server and starts the proxy. An unreachable server is not an error here.
  void start();
  void stop();

  /// Blocking request from any thread but the loop's. Requests are serialized.
  client::RequestResult request(std::uint32_t file_id, std::uint32_t segment_index);
  bool connected();
  std::uint16_t proxy_port() const { return proxy_port_; }
  EventLoop& loop() { return loop_; }
  /// Loop thread only.
  client::Client& client() { return client_; }

  void send_control(Bytes frame) override;

 private:
  bool ensure_connected();
  void start_proxy();

  ClientRuntimeConfig config_;
  EventLoop loop_;
  client::Client client_;
  std::unique_ptr<detail::Connection> connection_;
  int mcast_fd_ = -1;
  std::thread thread_;
  std::mutex request_mutex_;
  std::unique_ptr<httplib::Server> proxy_;
  std::thread proxy_thread_;
  std::uint16_t proxy_port_ = 0;
};

/// HTTP status for a proxied request outcome.
int proxy_status(const client::RequestResult& result);

}  // namespace xcast::sockets
