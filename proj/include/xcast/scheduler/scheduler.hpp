#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "xcast/coding/codability.hpp"
#include "xcast/types.hpp"

namespace xcast::scheduler {

using namespace std::chrono_literals;
using coding::ClientTable;
using coding::CodingMember;
using coding::CodingSet;

using EntryId = std::uint64_t;

enum class EntryState { waiting, awaiting_confirm, ready };

/// One entry of the request queue Q_r.
struct PendingRequest {
  EntryId id = 0;
  CodingSet coding_set;
  /// Clients whose member is a proactive guess not yet confirmed by a request.
  std::set<ClientId> proactive_members;
  Timestamp enqueue_time{};
  EntryState state = EntryState::waiting;

  bool has_confirmed_member() const { return proactive_members.size() < coding_set.size(); }
};

struct SchedulerConfig {
  Duration t_r = 50ms;
  bool proactive_enabled = true;
  /// Off reproduces the uncoded baseline: every request is its own entry.
  bool coding_enabled = true;
  double size_affinity = 0.8;
  std::size_t max_queue = 64;
  /// Unconfirmed proactive members older than this are evicted.
  Duration proactive_ttl = 8s;

  /// Throws ConfigError.
  void validate() const;
};

/// B_t: the single in-flight transmission.
struct TransmissionBuffer {
  std::optional<PendingRequest> current;
  Timestamp started_at{};
};

struct SegmentRequest {
  ClientId client = 0;
  SegmentRef segment;
};

enum class ArrivalOutcome {
  none,
  confirmed,
  merged,
  enqueued,
  duplicate,
  rejected_unknown_client,
  rejected_queue_full,
};

struct Dispatch {
  EntryId entry = 0;
  CodingSet coding_set;
};

struct TimerRequest {
  EntryId entry = 0;
  Timestamp deadline{};
};

/// What one scheduler event changed. The caller acts on dispatch (start a
/// transmission) and arm_timer (call on_timer_fire at the deadline).
struct SchedulerEffect {
  ArrivalOutcome arrival = ArrivalOutcome::none;
  std::optional<EntryId> entry;
  std::optional<Dispatch> dispatch;
  std::optional<TimerRequest> arm_timer;
  std::vector<EntryId> dropped;
  std::vector<CodingMember> proactive_inserted;
  std::vector<CodingMember> proactive_stripped;
};

/// Successor f_i^(s+1) of a segment, if the stream has one.
using NextSegmentFn = std::function<std::optional<SegmentRef>(const SegmentRef&)>;

/// The request pipeline: queue Q_r, buffer B_t, greedy coding on arrival,
/// proactive next-segment insertion and the T_r confirmation window.
///
/// Single-threaded: the owner serializes every call through one event stream.
/// `clients` is the server's registry view of W/H at the time of the event.
class Scheduler {
 public:
  Scheduler(SchedulerConfig config, NextSegmentFn next_segment);

  SchedulerEffect on_request_arrival(const SegmentRequest& request, const ClientTable& clients, Timestamp now);
  SchedulerEffect on_transmission_complete(const ClientTable& clients, Timestamp now);
  /// Stale timers (entry no longer awaiting confirmation) are a no-op.
  SchedulerEffect on_timer_fire(EntryId entry, const ClientTable& clients, Timestamp now);
  /// Removes every queued member of a departed client.
  SchedulerEffect on_client_departed(ClientId client, const ClientTable& clients, Timestamp now);

  const std::deque<PendingRequest>& queue() const { return queue_; }
  const TransmissionBuffer& buffer() const { return buffer_; }
  std::optional<EntryId> awaiting() const { return awaiting_; }
  const SchedulerConfig& config() const { return config_; }
  bool busy() const { return buffer_.current.has_value(); }

 private:
  PendingRequest* find(EntryId id);
  void try_dispatch(const ClientTable& clients, Timestamp now, SchedulerEffect& effect);
  void resolve_awaiting(const ClientTable& clients, Timestamp now, SchedulerEffect& effect);
  void dispatch(std::deque<PendingRequest>::iterator entry, const ClientTable& clients, Timestamp now,
                SchedulerEffect& effect);
  void insert_proactive(const CodingMember& delivered, const ClientTable& clients, Timestamp now,
                        SchedulerEffect& effect);
  void strip_members(const std::function<bool(const PendingRequest&, const CodingMember&)>& doomed,
                     SchedulerEffect& effect);
  void sweep_expired(Timestamp now, SchedulerEffect& effect);
  std::optional<std::size_t> partner_for(const coding::ClientState& candidate, const ClientTable& clients) const;

  SchedulerConfig config_;
  NextSegmentFn next_segment_;
  std::deque<PendingRequest> queue_;
  TransmissionBuffer buffer_;
  std::optional<EntryId> awaiting_;
  EntryId next_id_ = 1;
};

/// Pairwise codability of every queued entry against `clients`; returns the
/// first offending entry id, if any. Used by tests and debug checks.
std::optional<EntryId> find_invalid_entry(const Scheduler& scheduler, const ClientTable& clients);

}  // namespace xcast::scheduler
