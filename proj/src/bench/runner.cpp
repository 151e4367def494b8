#include "xcast/bench/runner.hpp"

#include <memory>
#include <numeric>

#include "xcast/server/edge_server.hpp"

namespace xcast::bench {

double RequestSample::throughput_bps() const {
  if (t_e <= Duration::zero()) return 0.0;
  return static_cast<double>(ref.size_bytes) * 8.0 / std::chrono::duration<double>(t_e).count();
}

double RunResult::mean_throughput_bps() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.delivery == client::Delivery::multicast || s.delivery == client::Delivery::fallback) {
      sum += s.throughput_bps();
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

ByteCounts count_tx_bytes(const std::vector<netsim::TraceEvent>& trace) {
  ByteCounts out;
  for (const auto& e : trace) {
    if (e.kind != "tx") continue;
    const auto type = static_cast<wire::MessageType>(e.tag);
    const bool segment = type == wire::MessageType::udp_pkt || type == wire::MessageType::seg_data;
    (segment ? out.segment : out.control) += e.bytes;
  }
  return out;
}

double coding_gain(const ByteCounts& uncoded, const ByteCounts& coded) {
  if (coded.total() == 0) return 0.0;
  return static_cast<double>(uncoded.total()) / static_cast<double>(coded.total());
}

double control_fraction(const ByteCounts& counts) {
  if (counts.segment == 0) return 0.0;
  return static_cast<double>(counts.control) / static_cast<double>(counts.segment);
}

namespace {

std::string label(const coding::CodingSet& set) {
  std::string out;
  for (const auto& m : set.members) {
    if (!out.empty()) out += "+";
    out += to_string(m.segment);
  }
  return out;
}

/// One streaming client and its request script.
struct Player {
  const ClientSpec* spec = nullptr;
  std::unique_ptr<client::Client> client;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> script;
  std::size_t next = 0;
};

}  // namespace

RunResult simulate(const Scenario& scenario, bool keep_trace) {
  scenario.validate();
  RunResult result;
  netsim::Simulator sim;
  netsim::ChannelConfig channel = scenario.channel;
  for (const auto& c : scenario.clients) {
    if (c.loss) channel.loss[c.id] = *c.loss;
  }
  netsim::Network net(sim, channel);
  net.trace().set_enabled(keep_trace);
  server::SyntheticOrigin origin;
  const auto catalog = scenario.catalog();
  server::EdgeServer server(scenario.server, catalog, sim, net, origin);
  net.attach_server(&server);

  // which session delivered what, for T_e attribution
  std::map<std::pair<ClientId, SegmentRef>, const server::SessionReport*> delivered_by;
  server.set_observer({
      [&](const scheduler::Dispatch& d) {
        if (keep_trace) net.note("dispatch", label(d.coding_set));
      },
      [&](const server::SessionReport& r) {
        for (const auto& [client, status] : r.outcome) {
          if (status == server::MemberStatus::fallback || status == server::MemberStatus::departed) {
            result.completion_rule = false;
          }
        }
        if (keep_trace) {
          net.note("session", "group " + std::to_string(r.segment_group_id) + " " + label(r.coding_set) +
                                  " rounds=" + std::to_string(r.rounds));
        }
      },
  });

  std::vector<Player> players;
  players.reserve(scenario.clients.size());
  for (const auto& spec : scenario.clients) {
    client::SegmentCache cache;
    for (const auto& ref : scenario.seeded_cache(spec)) cache.insert(ref, server::synthetic_segment(ref));
    Player p;
    p.spec = &spec;
    p.client = std::make_unique<client::Client>(client::ClientConfig{spec.id, std::chrono::minutes(10)}, sim,
                                                std::move(cache));
    p.script = spec.stream();
    players.push_back(std::move(p));
  }

  std::function<void(Player&)> request_next = [&](Player& p) {
    if (p.next >= p.script.size()) return;
    const auto [file, index] = p.script[p.next++];
    p.client->request_segment(file, index, [&, pp = &p](const client::RequestResult& r) {
      RequestSample sample;
      sample.client = pp->spec->id;
      sample.ref = r.ref;
      sample.delivery = r.delivery;
      sample.requested = r.requested;
      sample.t_e = r.t_e();
      if (r.ok()) {
        const auto expected = catalog.lookup(r.ref.file_id, r.ref.segment_index);
        sample.ref = expected.value_or(r.ref);
        sample.identical = expected && *r.body == server::synthetic_segment(*expected);
        if (!sample.identical) result.fidelity = false;
      }
      result.samples.push_back(sample);
      sim.post(sim.now() + pp->spec->think, [&, pp] { request_next(*pp); });
    });
  };

  for (auto& p : players) {
    const ChannelId ch = net.connect(p.spec->id, p.client.get());
    p.client->attach(net.client_link(ch));
    sim.post(Timestamp(p.spec->start), [&, pp = &p] {
      pp->client->join();
      request_next(*pp);
    });
  }

  sim.run_until(Timestamp(scenario.time_limit));
  result.virtual_time = sim.now();

  // attribute each multicast delivery to its session
  std::map<std::pair<ClientId, SegmentRef>, std::pair<std::size_t, std::uint32_t>> session_of;
  for (const auto& r : server.sessions()) {
    const auto longest = static_cast<std::uint32_t>(r.coding_set.coded_length());
    for (const auto& m : r.coding_set.members) session_of[{m.client, m.segment}] = {r.coding_set.size(), longest};
  }
  for (auto& s : result.samples) {
    if (auto it = session_of.find({s.client, s.ref}); it != session_of.end()) {
      s.coded_with = it->second.first;
      s.session_longest = it->second.second;
    }
  }

  for (const auto& p : players) {
    ClientMetrics m;
    m.client = p.spec->id;
    m.requested = static_cast<std::uint32_t>(p.next);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : result.samples) {
      if (s.client != m.client) continue;
      if (s.delivery == client::Delivery::failed) {
        ++m.failed;
        continue;
      }
      ++m.delivered;
      if (s.delivery == client::Delivery::fallback) ++m.fallback;
      if (s.delivery != client::Delivery::local) {
        sum += s.throughput_bps();
        ++n;
      }
    }
    m.mean_throughput_bps = n ? sum / static_cast<double>(n) : 0.0;
    if (m.delivered != p.script.size() || p.next != p.script.size()) result.finished = false;
    result.clients.push_back(m);

    // the server's H(c) must equal the client's actual cache
    auto state = server.registry().find(m.client);
    const auto refs = p.client->cache().refs();
    if (state == server.registry().end() ||
        state->second.cached != std::set<SegmentRef>(refs.begin(), refs.end())) {
      result.cache_coherent = false;
    }
  }
  if (server.session_active()) result.finished = false;

  result.server = server.stats();
  result.bytes_segment = result.server.bytes_segment;
  result.bytes_control = result.server.bytes_control;
  result.sessions = server.sessions();
  if (keep_trace) result.trace = net.trace().events();
  return result;
}

MetricsReport run_scenario(const Scenario& scenario) {
  MetricsReport report;
  report.name = scenario.name;
  report.clients = static_cast<std::uint32_t>(scenario.clients.size());
  report.coded = simulate(scenario);
  Scenario baseline = scenario;
  baseline.server.scheduler.coding_enabled = false;
  report.uncoded = simulate(baseline);
  report.coding_gain = coding_gain(report.uncoded.bytes(), report.coded.bytes());
  report.control_fraction = control_fraction(report.coded.bytes());
  return report;
}

SizingComparison compare_segment_sizing(const Scenario& base, double cv, std::uint64_t seed) {
  auto resized = [&](double spread) {
    Scenario s = base;
    for (auto& f : s.files) {
      const double mean = std::accumulate(f.sizes.begin(), f.sizes.end(), 0.0) / static_cast<double>(f.sizes.size());
      f.sizes = sample_sizes({static_cast<std::uint32_t>(std::llround(mean)), spread},
                             static_cast<std::uint32_t>(f.sizes.size()), seed * 1000003ULL + f.id);
    }
    return s;
  };
  SizingComparison out;
  Scenario fixed = resized(0.0);
  fixed.name = base.name + "-fixed";
  Scenario variable = resized(cv);
  variable.name = base.name + "-variable";
  out.fixed = run_scenario(fixed);
  out.variable = run_scenario(variable);
  return out;
}

std::vector<MetricsReport> run_sweep(const std::vector<std::uint32_t>& ks, const SweepOptions& options) {
  std::vector<MetricsReport> out;
  for (auto k : ks) out.push_back(run_scenario(sweep_scenario(k, options)));
  return out;
}

}  // namespace xcast::bench
