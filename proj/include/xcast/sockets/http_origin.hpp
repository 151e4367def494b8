#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "xcast/server/catalog.hpp"
#include "xcast/sockets/event_loop.hpp"

namespace httplib {
class Server;
}

namespace xcast::sockets {

/// OriginSource that GETs `{base_url}/{file_id}/{segment_index}.bin`. Each
/// fetch runs on its own thread; the answer is posted back to the loop.
class HttpOrigin : public server::OriginSource {
 public:
  HttpOrigin(std::string base_url, EventLoop& loop, std::chrono::seconds timeout = std::chrono::seconds(10));
  ~HttpOrigin() override;

  void fetch(const SegmentRef& ref, Callback done) override;

 private:
  std::string scheme_host_;
  std::string path_prefix_;
  EventLoop& loop_;
  std::chrono::seconds timeout_;
  struct Workers;
  std::shared_ptr<Workers> workers_;
};

/// Minimal HTTP origin serving synthetic_segment bodies for a catalog.
class OriginServer {
 public:
  explicit OriginServer(server::Catalog catalog);
  ~OriginServer();

  /// Binds and serves on a background thread; port 0 picks one. Returns the port.
  std::uint16_t start(const std::string& address, std::uint16_t port);
  /// Serves on the calling thread until stop().
  void listen(const std::string& address, std::uint16_t port);
  void stop();
  std::size_t requests() const { return requests_; }

 private:
  server::Catalog catalog_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace xcast::sockets
