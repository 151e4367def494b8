#include "xcast/netsim/network.hpp"

#include <memory>

namespace xcast::netsim {

namespace {

/// Uniform [0, 1) from the top 53 bits, identical on every standard library.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int tag_of(const Bytes& frame) { return frame.size() > 4 ? frame[4] : -1; }

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1]");
}

}  // namespace

double LossModel::mean_loss() const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::iid:
      return p;
    case Kind::burst: {
      const double leave = 1.0 - p_stay;
      if (p_enter + leave == 0.0) return 0.0;
      return p_enter / (p_enter + leave);
    }
  }
  return 0.0;
}

void LossModel::validate() const {
  check_probability(p, "loss p");
  check_probability(p_enter, "loss p_enter");
  check_probability(p_stay, "loss p_stay");
}

const LossModel& ChannelConfig::loss_for(ClientId client) const {
  auto it = loss.find(client);
  return it == loss.end() ? default_loss : it->second;
}

void ChannelConfig::validate() const {
  if (!(multicast_rate_bps > 0.0)) throw ConfigError("multicast_rate_bps must be positive");
  if (control_latency < Duration::zero()) throw ConfigError("control_latency must not be negative");
  default_loss.validate();
  for (const auto& [client, model] : loss) model.validate();
}

class Network::Uplink : public ClientLink {
 public:
  Uplink(Network& net, ChannelId channel) : net_(net), channel_(channel) {}
  void send_control(Bytes frame) override { net_.uplink(channel_, std::move(frame)); }

 private:
  Network& net_;
  ChannelId channel_;
};

Network::Network(Simulator& sim, ChannelConfig config) : sim_(sim), config_(std::move(config)) {
  config_.validate();
  sim_.set_trace(&trace_);
}

Network::~Network() { sim_.set_trace(nullptr); }

ChannelId Network::connect(ClientId client, ClientHandler* handler) {
  const ChannelId id = next_channel_++;
  Endpoint e;
  e.client = client;
  e.handler = handler;
  e.link = std::make_unique<Uplink>(*this, id);
  endpoints_.emplace(id, std::move(e));
  if (!loss_state_.contains(client)) {
    std::seed_seq seed{static_cast<std::uint32_t>(config_.rng_seed), static_cast<std::uint32_t>(config_.rng_seed >> 32),
                       client};
    loss_state_.emplace(client, LossState{std::mt19937_64(seed), false});
  }
  counters_[client];
  return id;
}

ClientLink& Network::client_link(ChannelId channel) {
  auto it = endpoints_.find(channel);
  if (it == endpoints_.end()) throw LookupError("unknown channel " + std::to_string(channel));
  return *it->second.link;
}

void Network::disconnect(ChannelId channel) {
  auto it = endpoints_.find(channel);
  if (it == endpoints_.end() || !it->second.open) return;
  it->second.open = false;
  trace_.record(sim_.now(), "disconnect", it->second.client);
  sim_.post(sim_.now() + config_.control_latency, [this, channel] {
    if (server_) server_->on_disconnect(channel);
  });
}

Duration Network::airtime(std::uint64_t bytes) const {
  return Duration(static_cast<std::int64_t>(static_cast<double>(bytes) * 8.0 * 1e9 / config_.multicast_rate_bps));
}

Timestamp Network::occupy_radio(std::uint64_t bytes, ClientId client, int tag) {
  const Timestamp start = std::max(sim_.now(), radio_free_at_);
  radio_free_at_ = start + airtime(bytes);
  trace_.record(start, "tx", client, bytes, tag, radio_free_at_);
  return radio_free_at_;
}

bool Network::draw_loss(ClientId client) {
  const auto& model = config_.loss_for(client);
  auto& state = loss_state_.at(client);
  switch (model.kind) {
    case LossModel::Kind::none:
      return false;
    case LossModel::Kind::iid:
      return uniform(state.rng) < model.p;
    case LossModel::Kind::burst:
      state.bad = uniform(state.rng) < (state.bad ? model.p_stay : model.p_enter);
      return state.bad;
  }
  return false;
}

void Network::send_control(ChannelId channel, Bytes frame) {
  auto it = endpoints_.find(channel);
  if (it == endpoints_.end() || !it->second.open) return;
  const ClientId client = it->second.client;
  const int tag = tag_of(frame);
  const Timestamp end = occupy_radio(frame.size(), client, tag);
  sim_.post(end + config_.control_latency, [this, channel, client, tag, frame = std::move(frame)] {
    auto e = endpoints_.find(channel);
    if (e == endpoints_.end() || !e->second.open) return;
    trace_.record(sim_.now(), "deliver", client, frame.size(), tag);
    e->second.handler->on_control(frame);
  });
}

void Network::multicast(std::vector<Bytes> datagrams, std::function<void()> on_drained) {
  Timestamp last = std::max(sim_.now(), radio_free_at_);
  for (auto& d : datagrams) {
    auto shared = std::make_shared<const Bytes>(std::move(d));
    const int tag = tag_of(*shared);
    last = occupy_radio(shared->size(), 0, tag);
    for (auto& [channel, endpoint] : endpoints_) {
      if (!endpoint.open) continue;
      const ClientId client = endpoint.client;
      auto& counters = counters_[client];
      ++counters.sent;
      if (draw_loss(client)) {
        ++counters.dropped;
        trace_.record(last, "drop", client, shared->size(), tag);
        continue;
      }
      ++counters.delivered;
      sim_.post(last + config_.control_latency, [this, channel = channel, client, tag, shared] {
        auto e = endpoints_.find(channel);
        if (e == endpoints_.end() || !e->second.open) return;
        trace_.record(sim_.now(), "deliver", client, shared->size(), tag);
        e->second.handler->on_datagram(*shared);
      });
    }
  }
  if (on_drained) sim_.post(last, std::move(on_drained));
}

void Network::uplink(ChannelId channel, Bytes frame) {
  auto it = endpoints_.find(channel);
  if (it == endpoints_.end()) return;
  const ClientId client = it->second.client;
  trace_.record(sim_.now(), "uplink", client, frame.size(), tag_of(frame));
  sim_.post(sim_.now() + config_.control_latency, [this, channel, frame = std::move(frame)] {
    if (server_) server_->on_control(channel, frame);
  });
}

const LinkCounters& Network::counters(ClientId client) const {
  static const LinkCounters empty;
  auto it = counters_.find(client);
  return it == counters_.end() ? empty : it->second;
}

void Network::note(std::string kind, std::string detail, ClientId client) {
  trace_.record(sim_.now(), std::move(kind), client, 0, -1, {}, std::move(detail));
}

}  // namespace xcast::netsim
