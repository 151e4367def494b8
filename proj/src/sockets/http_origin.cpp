#include "xcast/sockets/http_origin.hpp"

#include <condition_variable>
#include <mutex>

#include <httplib.h>

namespace xcast::sockets {

/// Fetch threads are detached; the origin waits for them on destruction.
struct HttpOrigin::Workers {
  std::mutex mutex;
  std::condition_variable idle;
  std::size_t active = 0;
  bool alive = true;
};

HttpOrigin::HttpOrigin(std::string base_url, EventLoop& loop, std::chrono::seconds timeout)
    : loop_(loop), timeout_(timeout), workers_(std::make_shared<Workers>()) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  const auto scheme = base_url.find("://");
  const auto slash = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (scheme == std::string::npos) throw ConfigError("origin url needs a scheme: " + base_url);
  scheme_host_ = base_url.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? "" : base_url.substr(slash);
}

HttpOrigin::~HttpOrigin() {
  std::unique_lock lock(workers_->mutex);
  workers_->alive = false;
  workers_->idle.wait(lock, [&] { return workers_->active == 0; });
}

void HttpOrigin::fetch(const SegmentRef& ref, Callback done) {
  const std::string path =
      path_prefix_ + "/" + std::to_string(ref.file_id) + "/" + std::to_string(ref.segment_index) + ".bin";
  {
    std::lock_guard lock(workers_->mutex);
    ++workers_->active;
  }
  std::thread([workers = workers_, loop = &loop_, path, done = std::move(done), host = scheme_host_,
               timeout = timeout_]() mutable {
    httplib::Client http(host);
    http.set_connection_timeout(timeout);
    http.set_read_timeout(timeout);
    std::optional<Bytes> body;
    std::string error;
    if (auto res = http.Get(path)) {
      if (res->status == 200) {
        body = Bytes(res->body.begin(), res->body.end());
      } else {
        error = "origin answered " + std::to_string(res->status) + " for " + path;
      }
    } else {
      error = "origin unreachable: " + httplib::to_string(res.error());
    }
    std::lock_guard lock(workers->mutex);
    if (workers->alive) {
      loop->post([workers, done = std::move(done), body = std::move(body), error = std::move(error)]() mutable {
        {
          std::lock_guard inner(workers->mutex);
          if (!workers->alive) return;
        }
        done(std::move(body), std::move(error));
      });
    }
    --workers->active;
    workers->idle.notify_all();
  }).detach();
}

OriginServer::OriginServer(server::Catalog catalog)
    : catalog_(std::move(catalog)), http_(std::make_unique<httplib::Server>()) {
  http_->Get(R"(/(\d+)/(\d+)\.bin)", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    try {
      const auto file = static_cast<std::uint32_t>(std::stoul(req.matches[1]));
      const auto index = static_cast<std::uint32_t>(std::stoul(req.matches[2]));
      if (auto ref = catalog_.lookup(file, index)) {
        const Bytes body = server::synthetic_segment(*ref);
        res.set_content(std::string(body.begin(), body.end()), "application/octet-stream");
        return;
      }
    } catch (const std::exception&) {
    }
    res.status = 404;
  });
}

OriginServer::~OriginServer() { stop(); }

std::uint16_t OriginServer::start(const std::string& address, std::uint16_t port) {
  int bound = port;
  if (port == 0) {
    bound = http_->bind_to_any_port(address);
  } else if (!http_->bind_to_port(address, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error("origin cannot bind " + address + ":" + std::to_string(port));
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return static_cast<std::uint16_t>(bound);
}

void OriginServer::listen(const std::string& address, std::uint16_t port) {
  if (!http_->listen(address, port)) throw Error("origin cannot listen on " + address + ":" + std::to_string(port));
}

void OriginServer::stop() {
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace xcast::sockets
