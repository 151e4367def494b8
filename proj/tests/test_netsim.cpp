#include <doctest.h>

#include <cmath>

#include "xcast/netsim/network.hpp"

using namespace xcast;
using namespace xcast::netsim;
using namespace std::chrono_literals;

namespace {

struct Sink : ClientHandler {
  std::vector<Bytes> control;
  std::vector<Bytes> datagrams;
  std::vector<Timestamp> datagram_times;
  Simulator* sim = nullptr;
  bool disconnected = false;

  void on_control(std::span<const std::uint8_t> f) override { control.emplace_back(f.begin(), f.end()); }
  void on_datagram(std::span<const std::uint8_t> d) override {
    datagrams.emplace_back(d.begin(), d.end());
    if (sim) datagram_times.push_back(sim->now());
  }
  void on_disconnect() override { disconnected = true; }
};

struct ServerSink : ServerHandler {
  std::vector<std::pair<ChannelId, Bytes>> frames;
  std::vector<ChannelId> gone;
  void on_control(ChannelId ch, std::span<const std::uint8_t> f) override { frames.emplace_back(ch, Bytes(f.begin(), f.end())); }
  void on_disconnect(ChannelId ch) override { gone.push_back(ch); }
};

Bytes datagram(std::size_t size, std::uint8_t tag = 2) {
  Bytes b(size, 0xAB);
  b[4] = tag;
  return b;
}

/// Sends `count` datagrams of `size` bytes to `clients` sinks; returns the trace.
std::vector<TraceEvent> blast(const ChannelConfig& cfg, std::size_t clients, std::size_t count, std::size_t size,
                              std::vector<Sink>* sinks_out = nullptr, std::vector<LinkCounters>* counters = nullptr) {
  Simulator sim;
  Network net(sim, cfg);
  std::vector<Sink> sinks(clients);
  for (std::size_t i = 0; i < clients; ++i) net.connect(static_cast<ClientId>(i + 1), &sinks[i]);
  std::vector<Bytes> batch;
  for (std::size_t i = 0; i < count; ++i) batch.push_back(datagram(size));
  net.multicast(std::move(batch), nullptr);
  sim.run_until_idle();
  if (counters) {
    for (std::size_t i = 0; i < clients; ++i) counters->push_back(net.counters(static_cast<ClientId>(i + 1)));
  }
  if (sinks_out) *sinks_out = std::move(sinks);
  return net.trace().events();
}

}  // namespace

TEST_CASE("empty simulator runs nothing and traces nothing") {
  Simulator sim;
  Network net(sim, {});
  CHECK(sim.run_until_idle() == 0);
  CHECK(net.trace().events().empty());
}

TEST_CASE("events fire in time order, ties in scheduling order") {
  Simulator sim;
  std::vector<int> order;
  sim.schedule_at(Timestamp(30ns), [&] { order.push_back(3); });
  sim.schedule_at(Timestamp(10ns), [&] { order.push_back(1); });
  sim.schedule_at(Timestamp(10ns), [&] { order.push_back(2); });
  const auto cancelled = sim.schedule_at(Timestamp(20ns), [&] { order.push_back(99); });
  sim.cancel(cancelled);
  sim.cancel(12345);
  sim.run_until_idle();
  CHECK(order == std::vector<int>{1, 2, 3});
  CHECK(sim.now() == Timestamp(30ns));
}

TEST_CASE("run_until stops at the deadline") {
  Simulator sim;
  int fired = 0;
  sim.schedule_at(Timestamp(5ms), [&] { ++fired; });
  sim.schedule_at(Timestamp(15ms), [&] { ++fired; });
  sim.run_until(Timestamp(10ms));
  CHECK(fired == 1);
  CHECK(sim.now() == Timestamp(10ms));
  CHECK(sim.pending() == 1);
}

TEST_CASE("event budget catches a self-rearming timer") {
  Simulator sim(1000);
  std::function<void()> rearm = [&] { sim.schedule_after(1ms, rearm); };
  sim.schedule_after(1ms, rearm);
  CHECK_THROWS_AS(sim.run_until_idle(), Error);
}

TEST_CASE("lossless channel delivers every datagram to every client") {
  std::vector<Sink> sinks;
  std::vector<LinkCounters> counters;
  blast({}, 3, 50, 1000, &sinks, &counters);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(sinks[i].datagrams.size() == 50);
    CHECK(counters[i].sent == 50);
    CHECK(counters[i].delivered == 50);
    CHECK(counters[i].dropped == 0);
  }
}

TEST_CASE("iid(1.0) silences one client only") {
  ChannelConfig cfg;
  cfg.loss[2] = LossModel::iid(1.0);
  std::vector<Sink> sinks;
  blast(cfg, 3, 200, 100, &sinks);
  CHECK(sinks[0].datagrams.size() == 200);
  CHECK(sinks[1].datagrams.empty());
  CHECK(sinks[2].datagrams.size() == 200);
}

TEST_CASE("iid(0.1) over 10^4 packets delivers 0.90 within three binomial sigmas") {
  ChannelConfig cfg;
  cfg.default_loss = LossModel::iid(0.1);
  cfg.rng_seed = 42;
  std::vector<LinkCounters> counters;
  const std::size_t n = 10'000;
  blast(cfg, 4, n, 64, nullptr, &counters);
  const double sigma = std::sqrt(0.1 * 0.9 / static_cast<double>(n));
  for (const auto& c : counters) {
    const double fraction = static_cast<double>(c.delivered) / static_cast<double>(n);
    CHECK(std::abs(fraction - 0.9) <= 3 * sigma);
    CHECK(std::abs(fraction - 0.9) <= 0.01);
  }
}

TEST_CASE("burst loss matches its stationary drop rate and clusters drops") {
  ChannelConfig cfg;
  cfg.default_loss = LossModel::burst(0.05, 0.7);
  cfg.rng_seed = 9;
  const auto model = cfg.default_loss;
  // stationary probability of the bad state: p_enter / (p_enter + 1 - p_stay)
  const double expected = 0.05 / (0.05 + 0.3);
  CHECK(model.mean_loss() == doctest::Approx(expected));
  const std::size_t n = 40'000;
  std::vector<LinkCounters> counters;
  auto trace = blast(cfg, 1, n, 64, nullptr, &counters);
  const double rate = static_cast<double>(counters[0].dropped) / static_cast<double>(n);
  CHECK(rate == doctest::Approx(expected).epsilon(0.1));
  // P(drop | previous dropped) is p_stay, far above the mean
  std::size_t pairs = 0, both = 0;
  bool prev = false;
  // a drop is recorded right after its tx
  std::vector<bool> dropped;
  for (const auto& e : trace) {
    if (e.kind == "tx") dropped.push_back(false);
    if (e.kind == "drop") dropped.back() = true;
  }
  REQUIRE(dropped.size() == n);
  for (std::size_t i = 0; i < n; ++i) {
    if (prev) {
      ++pairs;
      both += dropped[i] ? 1 : 0;
    }
    prev = dropped[i];
  }
  CHECK(static_cast<double>(both) / static_cast<double>(pairs) == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("loss probabilities are validated") {
  CHECK_THROWS_AS(LossModel::iid(1.5).validate(), ConfigError);
  CHECK_THROWS_AS(LossModel::burst(-0.1, 0.5).validate(), ConfigError);
  ChannelConfig cfg;
  cfg.multicast_rate_bps = 0;
  Simulator sim;
  CHECK_THROWS_AS(Network(sim, cfg), ConfigError);
}

TEST_CASE("conservation: delivered + dropped = sent for every client") {
  ChannelConfig cfg;
  cfg.default_loss = LossModel::iid(0.3);
  cfg.loss[1] = LossModel::burst(0.1, 0.5);
  std::vector<LinkCounters> counters;
  std::vector<Sink> sinks;
  blast(cfg, 5, 3000, 64, &sinks, &counters);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(counters[i].delivered + counters[i].dropped == counters[i].sent);
    CHECK(sinks[i].datagrams.size() == counters[i].delivered);
  }
}

TEST_CASE("identical seeds give identical traces, different seeds do not") {
  ChannelConfig cfg;
  cfg.default_loss = LossModel::iid(0.2);
  cfg.rng_seed = 77;
  const auto a = blast(cfg, 3, 500, 200);
  const auto b = blast(cfg, 3, 500, 200);
  CHECK(a == b);
  cfg.rng_seed = 78;
  CHECK(blast(cfg, 3, 500, 200) != a);
}

TEST_CASE("single radio: airtimes never overlap and follow the rate") {
  Simulator sim;
  ChannelConfig cfg;
  cfg.multicast_rate_bps = 8e6;  // 1 byte per microsecond
  Network net(sim, cfg);
  Sink a, b;
  a.sim = &sim;
  const auto ch_a = net.connect(1, &a);
  net.connect(2, &b);
  std::vector<Bytes> first, second;
  for (int i = 0; i < 10; ++i) first.push_back(datagram(1000));
  for (int i = 0; i < 10; ++i) second.push_back(datagram(500));
  bool drained = false;
  net.multicast(std::move(first), nullptr);
  // a control frame interleaved with data shares the radio
  net.send_control(ch_a, datagram(100, 1));
  net.multicast(std::move(second), [&] { drained = true; });
  sim.run_until_idle();
  CHECK(drained);
  std::vector<std::pair<Timestamp, Timestamp>> spans;
  for (const auto& e : net.trace().events()) {
    if (e.kind == "tx") {
      spans.emplace_back(e.at, e.end);
      CHECK(e.end - e.at == std::chrono::microseconds(e.bytes));
    }
  }
  REQUIRE(spans.size() == 21);
  for (std::size_t i = 1; i < spans.size(); ++i) CHECK(spans[i].first >= spans[i - 1].second);
  // total airtime 10*1000 + 100 + 10*500 bytes at 1 byte/us
  CHECK(spans.back().second == Timestamp(15'100us));
  // delivery trails the end of airtime by the latency
  REQUIRE(a.datagram_times.size() == 20);
  CHECK(a.datagram_times.front() == Timestamp(1000us) + cfg.control_latency);
  CHECK(a.control.size() == 1);
}

TEST_CASE("control frames are lossless and in order, uplink pays latency only") {
  Simulator sim;
  ChannelConfig cfg;
  cfg.default_loss = LossModel::iid(1.0);
  Network net(sim, cfg);
  ServerSink server;
  net.attach_server(&server);
  Sink c;
  const auto ch = net.connect(1, &c);
  for (std::uint8_t i = 0; i < 20; ++i) {
    auto f = datagram(10, 3);
    f[5] = i;
    net.send_control(ch, f);
  }
  net.client_link(ch).send_control(datagram(10, 4));
  sim.run_until_idle();
  REQUIRE(c.control.size() == 20);
  for (std::uint8_t i = 0; i < 20; ++i) CHECK(c.control[i][5] == i);
  REQUIRE(server.frames.size() == 1);
  CHECK(server.frames[0].first == ch);
  bool uplink_seen = false;
  for (const auto& e : net.trace().events()) {
    if (e.kind == "uplink") {
      uplink_seen = true;
      CHECK(e.at == Timestamp(0));
    }
  }
  CHECK(uplink_seen);
}

TEST_CASE("disconnect stops deliveries and notifies the server") {
  Simulator sim;
  Network net(sim, {});
  ServerSink server;
  net.attach_server(&server);
  Sink c;
  const auto ch = net.connect(1, &c);
  net.multicast({datagram(100)}, nullptr);
  net.disconnect(ch);
  net.send_control(ch, datagram(10, 1));
  sim.run_until_idle();
  CHECK(c.datagrams.empty());
  CHECK(c.control.empty());
  CHECK(server.gone == std::vector<ChannelId>{ch});
  CHECK_THROWS_AS(net.client_link(999), LookupError);
}

TEST_CASE("trace survives a JSON-lines roundtrip") {
  ChannelConfig cfg;
  cfg.default_loss = LossModel::iid(0.25);
  Simulator sim;
  Network net(sim, cfg);
  Sink a, b;
  net.connect(1, &a);
  net.connect(2, &b);
  net.multicast({datagram(300), datagram(200)}, nullptr);
  sim.schedule_after(1ms, [] {});
  net.note("dispatch", "f1^2 + f2^1 \"quoted\"", 1);
  sim.run_until_idle();
  const auto& events = net.trace().events();
  const auto text = net.trace().to_json_lines();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(events.size()));
  CHECK(Trace::parse_json_lines(text) == events);
  CHECK_THROWS_AS(Trace::parse_json_lines("{\"t_ns\": 1}\nnot json\n"), Error);
}
