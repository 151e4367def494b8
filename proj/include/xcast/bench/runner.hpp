#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xcast/bench/scenario.hpp"
#include "xcast/client/client.hpp"
#include "xcast/netsim/simulator.hpp"

namespace xcast::bench {

struct RequestSample {
  ClientId client = 0;
  SegmentRef ref;
  client::Delivery delivery = client::Delivery::failed;
  Timestamp requested{};
  Duration t_e{};
  /// Members of the session that delivered it (1 = uncoded).
  std::size_t coded_with = 0;
  /// Longest segment in that session.
  std::uint32_t session_longest = 0;
  bool identical = false;

  /// Perceived throughput: segment bits / T_e.
  double throughput_bps() const;
};

struct ClientMetrics {
  ClientId client = 0;
  std::uint32_t requested = 0;
  std::uint32_t delivered = 0;
  std::uint32_t failed = 0;
  std::uint32_t fallback = 0;
  double mean_throughput_bps = 0.0;
};

struct ByteCounts {
  std::uint64_t segment = 0;
  std::uint64_t control = 0;

  std::uint64_t total() const { return segment + control; }
};

struct RunResult {
  std::uint64_t bytes_segment = 0;
  std::uint64_t bytes_control = 0;
  server::ServerStats server;
  std::vector<server::SessionReport> sessions;
  std::vector<ClientMetrics> clients;
  std::vector<RequestSample> samples;
  /// Every delivered body matched the origin.
  bool fidelity = true;
  /// Every session ended with all members reporting UDP_PKT_COUNT=0.
  bool completion_rule = true;
  /// Server view of each client's cache equals the client's cache.
  bool cache_coherent = true;
  /// All scripted requests were answered.
  bool finished = true;
  Timestamp virtual_time{};
  std::vector<netsim::TraceEvent> trace;

  std::uint64_t bytes_total() const { return bytes_segment + bytes_control; }
  ByteCounts bytes() const { return {bytes_segment, bytes_control}; }
  double mean_throughput_bps() const;
};

/// Server transmissions in a trace: UDP_PKT and SEG_DATA frames carry segment
/// data, every other server frame is control.
ByteCounts count_tx_bytes(const std::vector<netsim::TraceEvent>& trace);

/// TX bits without coding / TX bits with coding; 0 when nothing was sent.
double coding_gain(const ByteCounts& uncoded, const ByteCounts& coded);
/// Control bytes / segment bytes; 0 when no segment bytes were sent.
double control_fraction(const ByteCounts& counts);

/// One simulated run of the scenario as configured.
RunResult simulate(const Scenario& scenario, bool keep_trace = false);

struct MetricsReport {
  std::string name;
  std::uint32_t clients = 0;
  RunResult coded;
  RunResult uncoded;
  /// TX bits without index coding / TX bits with it.
  double coding_gain = 0.0;
  /// Control bytes / segment bytes of the coded run.
  double control_fraction = 0.0;
};

/// Runs the scenario with coding as configured and again with coding off.
MetricsReport run_scenario(const Scenario& scenario);

struct SizingComparison {
  MetricsReport fixed;
  MetricsReport variable;
};

/// Same scenario with fixed segment sizes and with lognormal sizes of equal
/// mean and the given CV.
SizingComparison compare_segment_sizing(const Scenario& base, double cv, std::uint64_t seed = 1);

/// K = each entry of `ks`, built with sweep_scenario.
std::vector<MetricsReport> run_sweep(const std::vector<std::uint32_t>& ks, const SweepOptions& options);

}  // namespace xcast::bench
