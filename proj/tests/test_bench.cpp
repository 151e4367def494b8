#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xcast/bench/report.hpp"
#include "xcast/bench/runner.hpp"

using namespace xcast;
using namespace xcast::bench;
using namespace std::chrono_literals;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> load_errors(const std::string& text) {
  try {
    load_scenario(text, "t.toml");
  } catch (const ScenarioError& e) {
    return e.problems();
  }
  return {};
}

bool has_error(const std::vector<std::string>& errors, const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(), [&](const std::string& e) { return e.find(needle) != e.npos; });
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("xcast-bench-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

const char* kScenario = R"(name = "demo"
seed = 5
time_limit_s = 120

[channel]
multicast_rate_mbps = 12
control_latency_us = 100
loss = { model = "iid", p = 0.05 }

[server]
payload_size = 1000
t_r_ms = 20
coding = true
proactive = false
max_retransmission_rounds = 4

[[files]]
id = 1
segments = 3
size_bytes = 50000

[[files]]
id = 2
sizes = [1000, 2000, 3000]

[[clients]]
id = 7
file = 1
segments = 3
start_ms = 5
think_ms = 2
cache = [[2, 1]]
loss = { model = "burst", p_enter = 0.1, p_stay = 0.5 }

[[clients]]
id = 8
file = 2
first_segment = 2
segments = 2

[codability]
mode = "full"
)";

}  // namespace

TEST_CASE("scenario file fields land where they belong") {
  const auto s = load_scenario(kScenario);
  CHECK(s.name == "demo");
  CHECK(s.seed == 5);
  CHECK(s.time_limit == 120s);
  CHECK(s.channel.multicast_rate_bps == doctest::Approx(12e6));
  CHECK(s.channel.control_latency == 100us);
  CHECK(s.channel.default_loss.kind == netsim::LossModel::Kind::iid);
  CHECK(s.channel.default_loss.p == doctest::Approx(0.05));
  CHECK(s.server.payload_size == 1000);
  CHECK(s.server.scheduler.t_r == 20ms);
  CHECK_FALSE(s.server.scheduler.proactive_enabled);
  CHECK(s.server.max_retransmission_rounds == 4);
  REQUIRE(s.files.size() == 2);
  CHECK(s.files[0].sizes == std::vector<std::uint32_t>(3, 50000));
  CHECK(s.files[1].sizes == std::vector<std::uint32_t>{1000, 2000, 3000});
  REQUIRE(s.clients.size() == 2);
  CHECK(s.clients[0].start == 5ms);
  CHECK(s.clients[0].think == 2ms);
  CHECK(s.clients[0].loss->kind == netsim::LossModel::Kind::burst);
  CHECK(s.clients[1].stream() == std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 2}, {2, 3}});
  CHECK(s.codability == CodabilityMode::full);
  // full codability: client 8 caches everything client 7 streams, and vice versa
  const auto h8 = s.seeded_cache(s.clients[1]);
  CHECK(h8.size() == 3);
  const auto h7 = s.seeded_cache(s.clients[0]);
  CHECK(h7.contains(SegmentRef{2, 1, 0}));
  CHECK(h7.contains(SegmentRef{2, 3, 0}));
}

TEST_CASE("scenario errors name the line and the field") {
  auto errors = load_errors("name = \"x\"\n\n[[files]]\nid = 1\nsegments = \"ten\"\n");
  CHECK(has_error(errors, "t.toml:5: files[0].segments: expected an integer"));

  errors = load_errors("[[files]]\nid = 1\nsegments = 2\nwat = 3\n[[clients]]\nid = 1\nfile = 4\n");
  CHECK(has_error(errors, "t.toml:4: files[0].wat: unknown key"));

  errors = load_errors("[[files]]\nid = 1\nsegments = 2\n[[clients]]\nid = 1\nfile = 4\n");
  CHECK(has_error(errors, "t.toml:6: clients[0].file: unknown file 4"));

  errors = load_errors("[[files]]\nid = 1\nsegments = 2\n[[clients]]\nid = 1\nfile = 1\nsegments = 5\n");
  CHECK(has_error(errors, "clients[0].segments: stream runs past the end of file 1"));

  errors = load_errors("[channel]\nloss = { model = \"iid\", p = 2.0 }\n[[files]]\nid = 1\nsegments = 2\n"
                       "[[clients]]\nid = 1\nfile = 1\n");
  CHECK(has_error(errors, "channel: loss p must be in [0, 1]"));

  errors = load_errors("this is = not toml =\n");
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].rfind("t.toml:1:", 0) == 0);

  CHECK_THROWS_AS(load_scenario_file("/nonexistent/x.toml"), ScenarioError);
}

TEST_CASE("declared codable pairs are checked against the caches") {
  const std::string base = R"([[files]]
id = 1
segments = 2
[[files]]
id = 2
segments = 2
[[clients]]
id = 1
file = 1
segments = 2
cache = [[2, 1], [2, 2]]
[[clients]]
id = 2
file = 2
segments = 2
)";
  const auto ok = base + "cache = [[1, 1], [1, 2]]\n[codability]\nmode = \"declared\"\npairs = [[1, 2]]\n";
  CHECK_NOTHROW(load_scenario(ok));
  const auto short_cache = base + "cache = [[1, 1]]\n[codability]\nmode = \"declared\"\npairs = [[1, 2]]\n";
  const auto errors = load_errors(short_cache);
  CHECK(has_error(errors, "codability.pairs[0]: client 2 does not cache f1^2 wanted by client 1"));
  CHECK(has_error(errors, "t.toml:19:"));
}

TEST_CASE("metric formulas on a hand-built trace") {
  using netsim::TraceEvent;
  std::vector<TraceEvent> trace;
  auto tx = [&](int tag, std::uint64_t bytes) { trace.push_back({Timestamp{}, "tx", 0, bytes, tag, {}, ""}); };
  tx(1, 40);      // SEG_INFO
  tx(2, 1000);    // UDP_PKT
  tx(2, 1000);
  tx(3, 7);       // EOD
  tx(5, 30);      // RET_INFO
  tx(9, 500);     // SEG_DATA
  tx(8, 20);      // SEG_ERROR
  trace.push_back({Timestamp{}, "uplink", 1, 99, 4, {}, ""});
  trace.push_back({Timestamp{}, "deliver", 1, 1000, 2, {}, ""});
  trace.push_back({Timestamp{}, "drop", 2, 1000, 2, {}, ""});

  const auto coded = count_tx_bytes(trace);
  CHECK(coded.segment == 2500);
  CHECK(coded.control == 97);
  CHECK(control_fraction(coded) == doctest::Approx(97.0 / 2500.0));
  const ByteCounts uncoded{5000, 194};
  CHECK(coding_gain(uncoded, coded) == doctest::Approx(2.0));
  CHECK(coding_gain(uncoded, {}) == 0.0);
  CHECK(control_fraction({}) == 0.0);

  RequestSample s;
  s.ref = SegmentRef{1, 1, 250'000};
  s.t_e = 100ms;
  CHECK(s.throughput_bps() == doctest::Approx(20e6));  // 2e6 bits over 0.1 s
}

TEST_CASE("trace byte count agrees with the server's own accounting") {
  SweepOptions o;
  o.segments = 6;
  o.size.mean_bytes = 40'000;
  o.loss = netsim::LossModel::iid(0.05);
  const auto r = simulate(sweep_scenario(3, o), true);
  const auto counted = count_tx_bytes(r.trace);
  CHECK(counted.segment == r.bytes_segment);
  CHECK(counted.control == r.bytes_control);
}

TEST_CASE("one client: coding changes nothing") {
  SweepOptions o;
  o.segments = 10;
  const auto r = run_scenario(sweep_scenario(1, o));
  CHECK(r.coding_gain == doctest::Approx(1.0).epsilon(0.02));
  CHECK(r.coded.server.coded_sessions == 0);
}

TEST_CASE("synchronized codable clients: gain tracks K, coded bytes stay flat") {
  // the opening request goes out alone, so short streams fall below K
  SweepOptions o;
  const auto reports = run_sweep({1, 2, 3, 4, 5}, o);
  REQUIRE(reports.size() == 5);
  const double base = static_cast<double>(reports[0].coded.bytes_segment);
  double previous_fraction = -1.0;
  for (const auto& r : reports) {
    const double k = r.clients;
    CHECK(r.coding_gain == doctest::Approx(k).epsilon(0.05));
    CHECK(static_cast<double>(r.coded.bytes_segment) == doctest::Approx(base).epsilon(0.05));
    CHECK(static_cast<double>(r.uncoded.bytes_segment) == doctest::Approx(k * base).epsilon(0.05));
    CHECK(r.control_fraction < 0.02);
    CHECK(r.control_fraction >= previous_fraction);
    previous_fraction = r.control_fraction;
    CHECK(r.coded.fidelity);
    CHECK(r.coded.finished);
    CHECK(r.coded.completion_rule);
    CHECK(r.coded.cache_coherent);
  }
}

TEST_CASE("report files: fixed header, one row per K, byte-identical reruns") {
  SweepOptions o;
  o.segments = 4;
  o.size.mean_bytes = 30'000;
  const auto dir = temp_dir();
  const auto a = emit_report(run_sweep({1, 2, 3, 4, 5}, o), (dir / "a").string());
  const auto b = emit_report(run_sweep({1, 2, 3, 4, 5}, o), (dir / "b").string());
  REQUIRE(a.size() == 2);
  const auto csv = slurp(a[0]);
  CHECK(csv.rfind(csv_header() + "\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(csv_header() ==
        "name,clients,coded_bytes_segment,coded_bytes_control,uncoded_bytes_segment,uncoded_bytes_control,"
        "coding_gain,control_fraction,coded_sessions,retransmission_emissions,coded_throughput_bps,"
        "uncoded_throughput_bps,coded_mean_t_e_ms,fidelity");
  CHECK(slurp(a[0]) == slurp(b[0]));
  CHECK(slurp(a[1]) == slurp(b[1]));
  CHECK(slurp(a[1]).find("\"coding_gain\"") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("same seed and config give the same trace") {
  SweepOptions o;
  o.segments = 5;
  o.size.mean_bytes = 20'000;
  o.loss = netsim::LossModel::burst(0.05, 0.5);
  const auto a = simulate(sweep_scenario(3, o), true);
  const auto b = simulate(sweep_scenario(3, o), true);
  CHECK(a.trace == b.trace);
  o.seed = 2;
  CHECK(simulate(sweep_scenario(3, o), true).trace != a.trace);
}

TEST_CASE("zero-variance sizing gives identical fixed and variable runs") {
  SweepOptions o;
  o.segments = 6;
  const auto cmp = compare_segment_sizing(sweep_scenario(3, o), 0.0);
  CHECK(cmp.fixed.coded.bytes_total() == cmp.variable.coded.bytes_total());
  CHECK(cmp.fixed.coded.mean_throughput_bps() == cmp.variable.coded.mean_throughput_bps());
  CHECK(cmp.fixed.coding_gain == cmp.variable.coding_gain);
}

TEST_CASE("lognormal sizes keep the configured mean and spread") {
  const auto sizes = sample_sizes({250'000, 0.3}, 20'000, 4);
  double sum = 0, sq = 0;
  for (auto s : sizes) {
    sum += s;
    sq += static_cast<double>(s) * s;
  }
  const double mean = sum / static_cast<double>(sizes.size());
  const double sd = std::sqrt(sq / static_cast<double>(sizes.size()) - mean * mean);
  CHECK(mean == doctest::Approx(250'000).epsilon(0.01));
  CHECK(sd / mean == doctest::Approx(0.3).epsilon(0.05));
  CHECK(sample_sizes({1000, 0.0}, 5, 1) == std::vector<std::uint32_t>(5, 1000));
  CHECK(sample_sizes({250'000, 0.3}, 50, 9) == sample_sizes({250'000, 0.3}, 50, 9));
}

TEST_CASE("staggered pair: the trace shows f1^2 coded with f2^1") {
  Scenario s = sweep_scenario(2, {});
  for (auto& f : s.files) f.sizes.resize(20);
  for (auto& c : s.clients) c.segments = 20;
  // second client starts half a segment airtime later
  s.clients[1].start = std::chrono::duration_cast<Duration>(std::chrono::duration<double>(250'000 * 8 / 24e6 / 2));
  const auto r = simulate(s, true);
  std::vector<std::string> dispatches;
  for (const auto& e : r.trace) {
    if (e.kind == "dispatch") dispatches.push_back(e.detail);
  }
  REQUIRE(dispatches.size() >= 2);
  CHECK(dispatches[0] == "f1^1");
  CHECK(dispatches[1] == "f1^2+f2^1");
  std::size_t coded = 0;
  for (std::size_t i = 1; i < dispatches.size(); ++i) coded += dispatches[i].find('+') != std::string::npos;
  CHECK(static_cast<double>(coded) >= 0.9 * static_cast<double>(dispatches.size() - 1));
}

TEST_CASE("short segment coded with a long one waits for the long airtime") {
  Scenario s = sweep_scenario(2, {});
  s.files[0].sizes.assign(12, 1'000'000);
  s.files[1].sizes.assign(12, 200'000);
  for (auto& c : s.clients) c.segments = 12;
  const auto r = simulate(s);
  const double rate = s.channel.multicast_rate_bps;
  std::size_t checked = 0;
  for (const auto& sample : r.samples) {
    // steady state: coded, short side, not the opening segments
    if (sample.coded_with != 2 || sample.ref.size_bytes != 200'000 || sample.ref.segment_index < 3) continue;
    const double long_airtime = sample.session_longest * 8.0 / rate;
    CHECK(std::chrono::duration<double>(sample.t_e).count() == doctest::Approx(long_airtime).epsilon(0.02));
    ++checked;
  }
  CHECK(checked >= 8);
}

TEST_CASE("lossy runs deliver byte-identical segments and follow the completion rule") {
  for (double p : {0.05, 0.1, 0.3}) {
    SweepOptions o;
    o.segments = 5;
    o.size.mean_bytes = 60'000;
    o.loss = netsim::LossModel::iid(p);
    o.seed = 3;
    const auto r = simulate(sweep_scenario(4, o));
    CAPTURE(p);
    CHECK(r.fidelity);
    CHECK(r.finished);
    CHECK(r.completion_rule);
    CHECK(r.cache_coherent);
    CHECK(r.server.retransmission_emissions > 0);
  }
}

TEST_CASE("service config for the socket server") {
  const auto c = load_service_config(R"(seed = 3
[network]
port = 9000
multicast_group = "239.1.2.3"
multicast_rate_mbps = 10
[server]
t_r_ms = 5
[[files]]
id = 4
segments = 7
size_bytes = 1234
[origin]
url = "http://127.0.0.1:8080/media"
)");
  CHECK(c.port == 9000);
  CHECK(c.multicast_group == "239.1.2.3");
  CHECK(c.multicast_rate_bps == doctest::Approx(10e6));
  CHECK(c.server.scheduler.t_r == 5ms);
  CHECK(c.catalog().segment_count(4) == 7);
  CHECK(c.origin == "http://127.0.0.1:8080/media");

  try {
    load_service_config("[network]\nport = 70000\n[origin]\nurl = \"ftp://x\"\n", "svc.toml");
    FAIL("expected an error");
  } catch (const ScenarioError& e) {
    CHECK(has_error(e.problems(), "svc.toml:2: network.port: out of range"));
    CHECK(has_error(e.problems(), "svc.toml:4: origin.url"));
  }
}
