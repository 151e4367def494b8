#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "xcast/coding/retransmission.hpp"
#include "xcast/coding/xor_codec.hpp"
#include "xcast/runtime.hpp"
#include "xcast/scheduler/scheduler.hpp"
#include "xcast/server/catalog.hpp"
#include "xcast/server/segment_store.hpp"
#include "xcast/wire/messages.hpp"

namespace xcast::server {

using namespace std::chrono_literals;

struct ServerConfig {
  scheduler::SchedulerConfig scheduler;
  std::uint16_t payload_size = 1400;
  /// How long a round waits for RET_REQs after its EOD.
  Duration ret_req_timeout = 200ms;
  /// Consecutive silent rounds after which a client counts as gone.
  std::uint32_t max_missed_rounds = 3;
  /// Retransmission rounds before the unicast fallback.
  std::uint32_t max_retransmission_rounds = 10;

  void validate() const;
};

enum class MemberStatus { sending, await_ret_req, retransmitting, done, fallback, departed };

struct SessionReport {
  std::uint16_t segment_group_id = 0;
  coding::CodingSet coding_set;
  Timestamp started{};
  Timestamp finished{};
  std::uint32_t udp_packets = 0;
  /// Retransmission rounds that sent at least one emission.
  std::uint32_t rounds = 0;
  std::uint32_t retransmission_emissions = 0;
  std::uint64_t bytes_segment = 0;
  std::uint64_t bytes_control = 0;
  std::map<ClientId, MemberStatus> outcome;

  bool coded() const { return coding_set.size() > 1; }
};

struct ServerStats {
  std::uint64_t bytes_segment = 0;
  std::uint64_t bytes_control = 0;
  std::uint64_t sessions = 0;
  std::uint64_t coded_sessions = 0;
  std::uint64_t retransmission_emissions = 0;
  std::uint64_t fallback_deliveries = 0;
  std::uint64_t rejected_requests = 0;
};

struct ServerObserver {
  std::function<void(const scheduler::Dispatch&)> on_dispatch;
  std::function<void(const SessionReport&)> on_session;
};

/// The edge server: client registry with H(c) tracking, origin fetch, the
/// scheduler, and one multicast transmission session at a time.
///
/// Every entry point must be called from the executor's thread.
class EdgeServer : public ServerHandler {
 public:
  /// Throws ConfigError when a catalog segment cannot be sent in one group.
  EdgeServer(ServerConfig config, Catalog catalog, Executor& executor, ServerLink& link, OriginSource& origin);
  ~EdgeServer() override;

  void on_control(ChannelId channel, std::span<const std::uint8_t> frame) override;
  void on_disconnect(ChannelId channel) override;

  const coding::ClientTable& registry() const { return clients_; }
  const ServerStats& stats() const { return stats_; }
  const std::vector<SessionReport>& sessions() const { return reports_; }
  const scheduler::Scheduler& scheduler() const { return scheduler_; }
  const Catalog& catalog() const { return catalog_; }
  const SegmentStore& store() const { return store_; }
  bool session_active() const { return session_ != nullptr; }
  void set_observer(ServerObserver observer) { observer_ = std::move(observer); }

 private:
  struct Member {
    ClientId client = 0;
    SegmentRef segment;
    MemberStatus status = MemberStatus::sending;
    std::set<std::uint16_t> missing;
    bool reported = false;
    std::uint32_t missed_rounds = 0;
  };
  struct Session;

  void handle_join(ChannelId channel, const wire::JoinAdvert& join);
  void handle_request(ChannelId channel, const wire::SegReq& req);
  void handle_ret_req(ChannelId channel, const wire::RetReq& req);

  void admit(ClientId client, const SegmentRef& ref);
  void apply(const scheduler::SchedulerEffect& effect);
  void start_session(const scheduler::Dispatch& dispatch);
  void end_of_data();
  void round_timeout(std::uint16_t group, std::uint32_t round);
  void maybe_close_round();
  void next_round();
  void fallback(Member& member);
  void finish_session();

  void send(ChannelId channel, const wire::Message& message);
  void send_to(ClientId client, const wire::Message& message);
  void remove_client(ClientId client);
  std::optional<ClientId> client_on(ChannelId channel) const;

  ServerConfig config_;
  Catalog catalog_;
  Executor& executor_;
  ServerLink& link_;
  SegmentStore store_;
  scheduler::Scheduler scheduler_;

  coding::ClientTable clients_;
  std::map<ClientId, ChannelId> channel_of_;
  std::map<ChannelId, ClientId> client_of_;

  std::unique_ptr<Session> session_;
  std::uint16_t next_group_ = 1;
  std::vector<SessionReport> reports_;
  ServerStats stats_;
  ServerObserver observer_;
  std::shared_ptr<bool> alive_ = std::make_shared<bool>(true);
};

}  // namespace xcast::server
