#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include "xcast/server/edge_server.hpp"
#include "xcast/sockets/event_loop.hpp"

namespace xcast::sockets {

namespace detail {
class Connection;
}

struct ServerRuntimeConfig {
  std::string bind_address = "0.0.0.0";
  /// 0 picks an ephemeral port.
  std::uint16_t port = 7700;
  std::string multicast_group = "239.77.0.1";
  std::uint16_t multicast_port = 7701;
  /// Local address whose interface carries the multicast traffic.
  std::string multicast_interface = "127.0.0.1";
  int multicast_ttl = 1;
  /// Datagrams are paced to this rate.
  double multicast_rate_bps = 24e6;
  server::ServerConfig server;
};

using OriginFactory = std::function<std::unique_ptr<server::OriginSource>(EventLoop&)>;

/// The edge server over real sockets: a TCP listener for control channels
/// and a UDP multicast sender.
class ServerRuntime : public ServerLink {
 public:
  /// Binds the sockets; throws Error when that fails.
  ServerRuntime(ServerRuntimeConfig config, server::Catalog catalog, const OriginFactory& origin);
  ~ServerRuntime() override;

  std::uint16_t port() const { return port_; }
  EventLoop& loop() { return loop_; }
  /// Only touch from the loop thread, e.g. through loop().call().
  server::EdgeServer& server() { return *server_; }

  /// Serves on a background thread.
  void start();
  /// Serves on the calling thread until stop(), then closes every socket.
  void run();
  /// Final; the runtime cannot be restarted.
  void stop();

  void send_control(ChannelId channel, Bytes frame) override;
  void multicast(std::vector<Bytes> datagrams, std::function<void()> on_drained) override;

 private:
  struct Batch {
    std::deque<Bytes> datagrams;
    std::function<void()> on_drained;
  };

  void accept_ready();
  void pump();

  ServerRuntimeConfig config_;
  EventLoop loop_;
  std::unique_ptr<server::OriginSource> origin_;
  std::unique_ptr<server::EdgeServer> server_;
  int listen_fd_ = -1;
  int mcast_fd_ = -1;
  std::uint16_t port_ = 0;
  std::map<ChannelId, std::unique_ptr<detail::Connection>> connections_;
  ChannelId next_channel_ = 1;
  std::deque<Batch> batches_;
  Timestamp next_send_{};
  bool pump_armed_ = false;
  std::thread thread_;
};

}  // namespace xcast::sockets
