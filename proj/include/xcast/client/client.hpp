#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xcast/client/segment_cache.hpp"
#include "xcast/runtime.hpp"
#include "xcast/wire/messages.hpp"

namespace xcast::client {

using namespace std::chrono_literals;

struct ClientConfig {
  ClientId id = 0;
  /// A request with no delivery by then fails.
  Duration request_timeout = 30s;
};

enum class Delivery { local, multicast, fallback, failed };

enum class Failure { none, timeout, unreachable, rejected, decode, busy };

struct RequestResult {
  SegmentRef ref;
  Delivery delivery = Delivery::failed;
  Failure failure = Failure::none;
  std::optional<Bytes> body;
  std::string error;
  /// Set for failures reported by the server.
  std::optional<wire::ErrorCode> code;
  Timestamp requested{};
  Timestamp completed{};

  bool ok() const { return body.has_value(); }
  /// T_e: request to decoded segment.
  Duration t_e() const { return completed - requested; }
};

using RequestCallback = std::function<void(const RequestResult&)>;

enum class ReceiveState { receiving, requesting, done };

/// One segment group this client belongs to.
struct ReceiveSession {
  wire::SegInfo info;
  std::size_t my_index = 0;
  /// Original packets held, received or recovered.
  std::map<std::uint16_t, Bytes> held;
  /// Retransmission datagrams by seq, kept until their RET_INFO entry is known.
  std::map<std::uint16_t, Bytes> coded;
  std::map<std::uint16_t, wire::RetEmission> emission_for;
  std::uint32_t announced = 0;
  ReceiveState state = ReceiveState::receiving;

  std::set<std::uint16_t> missing() const;
};

struct ClientStats {
  std::uint64_t datagrams = 0;
  std::uint64_t foreign_datagrams = 0;
  std::uint64_t duplicate_datagrams = 0;
  std::uint64_t recovered_packets = 0;
  std::uint64_t ret_reqs = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t protocol_errors = 0;
};

/// The client endpoint: joins and advertises its cache, forwards segment
/// requests, takes part in the multicast sessions it is a member of, reports
/// losses and decodes against its cache. At most one request is outstanding.
///
/// All calls must come from the executor's thread.
class Client : public ClientHandler {
 public:
  Client(ClientConfig config, Executor& executor, SegmentCache cache = SegmentCache{});
  ~Client() override;

  void attach(ClientLink& link) { link_ = &link; }
  /// Sends JOIN_ADVERT listing the cache contents.
  void join();
  /// Cached segments are answered at once without touching the network.
  /// Fails straight away when another request is outstanding.
  void request_segment(std::uint32_t file_id, std::uint32_t segment_index, RequestCallback done);

  void on_control(std::span<const std::uint8_t> frame) override;
  void on_datagram(std::span<const std::uint8_t> datagram) override;
  void on_disconnect() override;

  ClientId id() const { return config_.id; }
  const SegmentCache& cache() const { return cache_; }
  SegmentCache& cache() { return cache_; }
  const ClientStats& stats() const { return stats_; }
  bool busy() const { return pending_.has_value(); }
  const std::map<std::uint16_t, ReceiveSession>& sessions() const { return sessions_; }

 private:
  struct Pending {
    SegmentRef ref;
    RequestCallback done;
    Timestamp requested{};
    std::optional<Executor::TimerId> timer;
  };

  void send(const wire::Message& message);
  void handle_seg_info(const wire::SegInfo& info);
  void handle_eod(const wire::Eod& eod);
  void handle_ret_info(const wire::RetInfo& info);
  void handle_seg_data(const wire::SegData& data);
  void handle_seg_error(const wire::SegError& error);
  void try_recover(ReceiveSession& s, std::uint16_t seq);
  std::size_t packet_length(const ReceiveSession& s, std::uint16_t seq) const;
  void decode(std::uint16_t group);
  void complete(const SegmentRef& ref, Delivery how, std::optional<Bytes> body, std::string error,
                Failure failure = Failure::none, std::optional<wire::ErrorCode> code = std::nullopt);

  ClientConfig config_;
  Executor& executor_;
  SegmentCache cache_;
  ClientLink* link_ = nullptr;
  std::optional<Pending> pending_;
  std::map<std::uint16_t, ReceiveSession> sessions_;
  ClientStats stats_;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace xcast::client
