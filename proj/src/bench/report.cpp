#include "xcast/bench/report.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace xcast::bench {

namespace {

double mean_t_e_ms(const RunResult& r) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : r.samples) {
    if (s.delivery == client::Delivery::multicast || s.delivery == client::Delivery::fallback) {
      sum += std::chrono::duration<double, std::milli>(s.t_e).count();
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

nlohmann::ordered_json run_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["bytes_segment"] = r.bytes_segment;
  j["bytes_control"] = r.bytes_control;
  j["sessions"] = r.server.sessions;
  j["coded_sessions"] = r.server.coded_sessions;
  j["retransmission_emissions"] = r.server.retransmission_emissions;
  j["fallback_deliveries"] = r.server.fallback_deliveries;
  j["mean_throughput_bps"] = r.mean_throughput_bps();
  j["mean_t_e_ms"] = mean_t_e_ms(r);
  j["fidelity"] = r.fidelity;
  j["completion_rule"] = r.completion_rule;
  j["cache_coherent"] = r.cache_coherent;
  j["finished"] = r.finished;
  j["virtual_time_s"] = std::chrono::duration<double>(r.virtual_time).count();
  auto& clients = j["clients"] = nlohmann::ordered_json::array();
  for (const auto& c : r.clients) {
    clients.push_back({{"client", c.client},
                       {"requested", c.requested},
                       {"delivered", c.delivered},
                       {"failed", c.failed},
                       {"fallback", c.fallback},
                       {"mean_throughput_bps", c.mean_throughput_bps}});
  }
  return j;
}

}  // namespace

std::string csv_header() {
  return "name,clients,coded_bytes_segment,coded_bytes_control,uncoded_bytes_segment,uncoded_bytes_control,"
         "coding_gain,control_fraction,coded_sessions,retransmission_emissions,coded_throughput_bps,"
         "uncoded_throughput_bps,coded_mean_t_e_ms,fidelity";
}

void write_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
  out << csv_header() << '\n';
  for (const auto& r : reports) {
    out << r.name << ',' << r.clients << ',' << r.coded.bytes_segment << ',' << r.coded.bytes_control << ','
        << r.uncoded.bytes_segment << ',' << r.uncoded.bytes_control << ',' << fixed(r.coding_gain, 6) << ','
        << fixed(r.control_fraction, 6) << ',' << r.coded.server.coded_sessions << ','
        << r.coded.server.retransmission_emissions << ',' << fixed(r.coded.mean_throughput_bps(), 1) << ','
        << fixed(r.uncoded.mean_throughput_bps(), 1) << ',' << fixed(mean_t_e_ms(r.coded), 3) << ','
        << (r.coded.fidelity && r.uncoded.fidelity ? "ok" : "corrupt") << '\n';
  }
}

void write_json(std::ostream& out, const std::vector<MetricsReport>& reports) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json e;
    e["name"] = r.name;
    e["clients"] = r.clients;
    e["coding_gain"] = r.coding_gain;
    e["control_fraction"] = r.control_fraction;
    e["coded"] = run_json(r.coded);
    e["uncoded"] = run_json(r.uncoded);
    j.push_back(std::move(e));
  }
  out << j.dump(2) << '\n';
}

std::vector<std::string> emit_report(const std::vector<MetricsReport>& reports, const std::string& stem) {
  const std::string csv = stem + ".csv";
  const std::string json = stem + ".json";
  std::ofstream c(csv);
  std::ofstream j(json);
  if (!c || !j) throw Error("cannot write report files at " + stem);
  write_csv(c, reports);
  write_json(j, reports);
  return {csv, json};
}

std::string summarize_trace(const std::vector<netsim::TraceEvent>& events) {
  struct Tally {
    std::uint64_t count = 0;
    std::uint64_t bytes = 0;
  };
  std::map<std::pair<std::string, int>, Tally> tallies;
  Timestamp last{};
  for (const auto& e : events) {
    auto& t = tallies[{e.kind, e.tag}];
    ++t.count;
    t.bytes += e.bytes;
    last = std::max(last, std::max(e.at, e.end));
  }
  std::ostringstream out;
  out << "events " << events.size() << ", span " << fixed(std::chrono::duration<double>(last).count(), 6) << " s\n";
  out << std::left << std::setw(12) << "kind" << std::setw(6) << "tag" << std::right << std::setw(10) << "count"
      << std::setw(14) << "bytes" << '\n';
  for (const auto& [key, t] : tallies) {
    out << std::left << std::setw(12) << key.first << std::setw(6) << (key.second < 0 ? "-" : std::to_string(key.second))
        << std::right << std::setw(10) << t.count << std::setw(14) << t.bytes << '\n';
  }
  return out.str();
}

}  // namespace xcast::bench
