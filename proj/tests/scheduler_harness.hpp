#pragma once
// Drives a Scheduler with a toy event loop: fixed airtime per byte, clients
// that request their next segment a fixed delay after each delivery, and
// optional extra scripted arrivals. Checks the scheduler's safety invariants
// on every event.

#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "xcast/scheduler/scheduler.hpp"

namespace harness {

using namespace xcast;
using namespace xcast::scheduler;

struct Arrival {
  ClientId client;
  SegmentRef segment;
};
struct Completion {};
struct TimerFire {
  EntryId entry;
};
using Event = std::variant<Arrival, Completion, TimerFire>;

struct Transmission {
  Timestamp start;
  Timestamp end;
  CodingSet set;
};

struct Violation {
  std::string what;
};

class Harness {
 public:
  Harness(SchedulerConfig config, ClientTable clients, std::map<std::uint32_t, std::vector<std::uint32_t>> files,
          double bytes_per_ns, Duration response_delay)
      : files_(std::move(files)),
        clients_(std::move(clients)),
        bytes_per_ns_(bytes_per_ns),
        response_delay_(response_delay),
        scheduler_(config, [this](const SegmentRef& s) { return next(s); }) {}

  /// Clients listed here request their next segment after each delivery.
  void set_streaming(ClientId client, bool on) { streaming_[client] = on; }

  void arrive(Timestamp at, ClientId client, std::uint32_t file, std::uint32_t index) {
    push(at, Arrival{client, segment(file, index)});
  }

  std::optional<SegmentRef> next(const SegmentRef& s) const {
    auto it = files_.find(s.file_id);
    if (it == files_.end() || s.segment_index >= it->second.size()) return std::nullopt;
    return segment(s.file_id, s.segment_index + 1);
  }

  SegmentRef segment(std::uint32_t file, std::uint32_t index) const {
    return SegmentRef{file, index, files_.at(file).at(index - 1)};
  }

  Duration airtime(std::uint64_t bytes) const {
    return Duration(static_cast<long>(static_cast<double>(bytes) / bytes_per_ns_));
  }

  Duration max_airtime() const {
    std::uint32_t longest = 0;
    for (const auto& [f, sizes] : files_) {
      for (auto s : sizes) longest = std::max(longest, s);
    }
    return airtime(longest);
  }

  void run(std::size_t max_events = 1'000'000) {
    while (!events_.empty() && processed_ < max_events) {
      auto [at, seq, event] = events_.top();
      events_.pop();
      now_ = at;
      ++processed_;
      if (auto* a = std::get_if<Arrival>(&event)) {
        const std::size_t queue_len = scheduler_.queue().size();
        auto effect = scheduler_.on_request_arrival({a->client, a->segment}, clients_, now_);
        if (effect.arrival == ArrivalOutcome::confirmed || effect.arrival == ArrivalOutcome::merged ||
            effect.arrival == ArrivalOutcome::enqueued) {
          pending_[{a->client, a->segment}] = {now_, queue_len};
          clients_[a->client].wanted = {a->segment};
        }
        apply(effect);
        if (auto bad = find_invalid_entry(scheduler_, clients_)) violation("invalid entry " + std::to_string(*bad));
      } else if (std::holds_alternative<Completion>(event)) {
        deliver();
        apply(scheduler_.on_transmission_complete(clients_, now_));
      } else {
        apply(scheduler_.on_timer_fire(std::get<TimerFire>(event).entry, clients_, now_));
      }
    }
  }

  const std::vector<Transmission>& transmissions() const { return transmissions_; }
  const std::vector<Violation>& violations() const { return violations_; }
  const Scheduler& scheduler() const { return scheduler_; }
  std::size_t processed() const { return processed_; }
  std::size_t max_delay_ratio_checks() const { return delay_checks_; }
  ClientTable& clients() { return clients_; }

 private:
  using Key = std::tuple<Timestamp, std::uint64_t, Event>;
  struct Later {
    bool operator()(const Key& a, const Key& b) const {
      return std::tie(std::get<0>(a), std::get<1>(a)) > std::tie(std::get<0>(b), std::get<1>(b));
    }
  };

  void push(Timestamp at, Event e) { events_.emplace(at, seq_++, std::move(e)); }

  void violation(std::string what) { violations_.push_back({std::move(what)}); }

  void apply(const SchedulerEffect& effect) {
    if (effect.arm_timer) push(effect.arm_timer->deadline, TimerFire{effect.arm_timer->entry});
    if (!effect.dispatch) return;
    if (in_flight_) violation("dispatch while a transmission is in flight");
    for (const auto& m : effect.dispatch->coding_set.members) {
      if (scheduler_.buffer().current && scheduler_.buffer().current->proactive_members.contains(m.client)) {
        violation("unconfirmed proactive member dispatched");
      }
      auto it = pending_.find({m.client, m.segment});
      if (it == pending_.end()) {
        violation("dispatched a member nobody requested: " + to_string(m.segment));
        continue;
      }
      const auto [arrived, queue_len] = it->second;
      const Duration bound = static_cast<long>(queue_len + 1) * (max_airtime() + scheduler_.config().t_r);
      ++delay_checks_;
      if (now_ - arrived > bound) violation("starvation: " + to_string(m.segment));
      pending_.erase(it);
    }
    in_flight_ = Transmission{now_, now_ + airtime(effect.dispatch->coding_set.coded_length()),
                              effect.dispatch->coding_set};
    push(in_flight_->end, Completion{});
  }

  void deliver() {
    if (!in_flight_) {
      violation("completion without transmission");
      return;
    }
    transmissions_.push_back(*in_flight_);
    for (const auto& m : in_flight_->set.members) {
      auto& c = clients_[m.client];
      c.wanted.erase(m.segment);
      c.cached.insert(m.segment);
      if (streaming_[m.client]) {
        if (auto n = next(m.segment)) push(now_ + response_delay_, Arrival{m.client, *n});
      }
    }
    in_flight_.reset();
  }

  std::map<std::uint32_t, std::vector<std::uint32_t>> files_;
  ClientTable clients_;
  double bytes_per_ns_;
  Duration response_delay_;
  Scheduler scheduler_;
  std::priority_queue<Key, std::vector<Key>, Later> events_;
  std::uint64_t seq_ = 0;
  Timestamp now_{};
  std::size_t processed_ = 0;
  std::size_t delay_checks_ = 0;
  std::optional<Transmission> in_flight_;
  std::map<std::pair<ClientId, SegmentRef>, std::pair<Timestamp, std::size_t>> pending_;
  std::map<ClientId, bool> streaming_;
  std::vector<Transmission> transmissions_;
  std::vector<Violation> violations_;
};

/// Two clients streaming files 1 and 2 (each caching all of the other's file),
/// client 2 starting half a segment airtime after client 1.
inline Harness staggered_pair(bool proactive, std::uint32_t segments) {
  SchedulerConfig config;
  config.proactive_enabled = proactive;
  std::map<std::uint32_t, std::vector<std::uint32_t>> files{{1, std::vector<std::uint32_t>(segments, 250'000)},
                                                             {2, std::vector<std::uint32_t>(segments, 250'000)}};
  ClientTable clients;
  for (ClientId c : {1U, 2U}) {
    const std::uint32_t other = c == 1 ? 2 : 1;
    coding::ClientState state{c, {}, {}};
    for (std::uint32_t s = 1; s <= segments; ++s) state.cached.insert(SegmentRef{other, s, 250'000});
    clients[c] = state;
  }
  const double bytes_per_ns = 24e6 / 8 / 1e9;  // 24 Mbit/s
  Harness h(config, clients, files, bytes_per_ns, std::chrono::milliseconds(1));
  h.set_streaming(1, true);
  h.set_streaming(2, true);
  h.arrive(Timestamp(0), 1, 1, 1);
  h.arrive(h.airtime(250'000) / 2, 2, 2, 1);
  return h;
}

}  // namespace harness
