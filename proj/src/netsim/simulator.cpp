#include "xcast/netsim/simulator.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace xcast::netsim {

std::string Trace::to_json_lines() const {
  std::ostringstream out;
  for (const auto& e : events_) {
    nlohmann::ordered_json j;
    j["t_ns"] = e.at.count();
    j["kind"] = e.kind;
    j["client"] = e.client;
    j["bytes"] = e.bytes;
    j["tag"] = e.tag;
    if (e.kind == "tx") j["end_ns"] = e.end.count();
    if (!e.detail.empty()) j["detail"] = e.detail;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<TraceEvent> Trace::parse_json_lines(const std::string& text) {
  std::vector<TraceEvent> events;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TraceEvent e;
      e.at = Timestamp(j.at("t_ns").get<std::int64_t>());
      e.kind = j.at("kind").get<std::string>();
      e.client = j.value("client", ClientId{0});
      e.bytes = j.value("bytes", std::uint64_t{0});
      e.tag = j.value("tag", -1);
      e.end = Timestamp(j.value("end_ns", std::int64_t{0}));
      e.detail = j.value("detail", std::string{});
      events.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error("trace line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return events;
}

Executor::TimerId Simulator::add(Timestamp when, std::function<void()> fn, bool traced) {
  if (when < now_) when = now_;
  const TimerId id = next_id_++;
  callbacks_.emplace(id, Callback{std::move(fn), traced});
  heap_.emplace(when, id);
  return id;
}

Executor::TimerId Simulator::schedule_at(Timestamp when, std::function<void()> fn) {
  return add(when, std::move(fn), true);
}

Executor::TimerId Simulator::post(Timestamp when, std::function<void()> fn) { return add(when, std::move(fn), false); }

void Simulator::cancel(TimerId id) { callbacks_.erase(id); }

bool Simulator::step() {
  while (!heap_.empty()) {
    auto [when, id] = heap_.top();
    heap_.pop();
    auto it = callbacks_.find(id);
    if (it == callbacks_.end()) continue;  // cancelled
    if (executed_ >= budget_) {
      throw Error("event budget of " + std::to_string(budget_) + " exhausted at t=" +
                  std::to_string(when.count()) + "ns with " + std::to_string(callbacks_.size()) +
                  " events pending");
    }
    auto cb = std::move(it->second);
    callbacks_.erase(it);
    now_ = when;
    ++executed_;
    if (cb.traced && trace_) trace_->record(now_, "timer");
    cb.fn();
    return true;
  }
  return false;
}

std::size_t Simulator::run_until_idle() {
  std::size_t n = 0;
  while (step()) ++n;
  return n;
}

std::size_t Simulator::run_until(Timestamp deadline) {
  std::size_t n = 0;
  while (!heap_.empty()) {
    auto [when, id] = heap_.top();
    if (!callbacks_.contains(id)) {
      heap_.pop();
      continue;
    }
    if (when > deadline) break;
    step();
    ++n;
  }
  if (now_ < deadline) now_ = deadline;
  return n;
}

}  // namespace xcast::netsim
