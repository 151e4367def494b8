#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "xcast/runtime.hpp"

namespace xcast::netsim {

/// One line of the simulation trace.
struct TraceEvent {
  Timestamp at{};
  /// tx, deliver, drop, uplink, timer, disconnect, or an application note.
  std::string kind;
  ClientId client = 0;
  std::uint64_t bytes = 0;
  /// Wire tag byte of the frame, or -1.
  int tag = -1;
  /// End of the radio airtime for tx events.
  Timestamp end{};
  std::string detail;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

class Trace {
 public:
  void record(TraceEvent event) {
    if (enabled_) events_.push_back(std::move(event));
  }
  void record(Timestamp at, std::string kind, ClientId client = 0, std::uint64_t bytes = 0, int tag = -1,
              Timestamp end = {}, std::string detail = {}) {
    if (enabled_) events_.push_back({at, std::move(kind), client, bytes, tag, end, std::move(detail)});
  }
  void set_enabled(bool on) { enabled_ = on; }
  bool enabled() const { return enabled_; }
  const std::vector<TraceEvent>& events() const { return events_; }
  void clear() { events_.clear(); }

  /// One JSON object per line, in event order.
  std::string to_json_lines() const;
  static std::vector<TraceEvent> parse_json_lines(const std::string& text);

 private:
  bool enabled_ = true;
  std::vector<TraceEvent> events_;
};

/// Discrete-event executor over virtual time. Events at equal times run in
/// scheduling order, so a run is a pure function of its inputs.
class Simulator : public Executor {
 public:
  explicit Simulator(std::size_t event_budget = 50'000'000) : budget_(event_budget) {}

  Timestamp now() const override { return now_; }
  TimerId schedule_at(Timestamp when, std::function<void()> fn) override;
  void cancel(TimerId id) override;

  /// Internal events (deliveries) that should not show up as timer fires.
  TimerId post(Timestamp when, std::function<void()> fn);

  /// Runs one event; false when nothing is pending.
  bool step();
  /// Drains the heap. Throws Error once the event budget is spent, which
  /// catches livelocks such as endlessly re-armed timers.
  std::size_t run_until_idle();
  /// Runs events up to and including `deadline`, then sets the clock to it.
  std::size_t run_until(Timestamp deadline);

  std::size_t pending() const { return callbacks_.size(); }
  std::size_t executed() const { return executed_; }

  /// Timer fires are recorded here when set.
  void set_trace(Trace* trace) { trace_ = trace; }

 private:
  struct Callback {
    std::function<void()> fn;
    bool traced = false;
  };
  using Slot = std::pair<Timestamp, TimerId>;

  TimerId add(Timestamp when, std::function<void()> fn, bool traced);

  Timestamp now_{};
  TimerId next_id_ = 1;
  std::size_t budget_;
  std::size_t executed_ = 0;
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> heap_;
  std::map<TimerId, Callback> callbacks_;
  Trace* trace_ = nullptr;
};

}  // namespace xcast::netsim
