#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "xcast/netsim/simulator.hpp"
#include "xcast/runtime.hpp"

namespace xcast::netsim {

/// Per-client packet loss on the multicast channel.
struct LossModel {
  enum class Kind { none, iid, burst };

  Kind kind = Kind::none;
  /// iid: drop probability.
  double p = 0.0;
  /// burst (Gilbert-Elliott): good->bad probability per packet, and the
  /// probability of staying bad. Bad drops everything, good nothing.
  double p_enter = 0.0;
  double p_stay = 0.0;

  static LossModel none() { return {}; }
  static LossModel iid(double p) { return {Kind::iid, p, 0.0, 0.0}; }
  static LossModel burst(double p_enter, double p_stay) { return {Kind::burst, 0.0, p_enter, p_stay}; }

  /// Long-run drop rate.
  double mean_loss() const;
  /// Throws ConfigError.
  void validate() const;
};

struct ChannelConfig {
  double multicast_rate_bps = 24e6;
  /// Propagation delay for every frame, both directions.
  Duration control_latency = std::chrono::microseconds(250);
  LossModel default_loss;
  std::map<ClientId, LossModel> loss;
  std::uint64_t rng_seed = 1;

  const LossModel& loss_for(ClientId client) const;
  void validate() const;
};

struct LinkCounters {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

/// Shared-radio model of an access point. Every server transmission
/// (control frames and multicast datagrams) queues on one radio and takes
/// bytes*8/rate of airtime; it reaches receivers control_latency after its
/// airtime ends. Control frames are never lost. Multicast datagrams reach each
/// connected client unless that client's loss model drops them. Uplink frames
/// only pay the latency.
class Network : public ServerLink {
 public:
  Network(Simulator& sim, ChannelConfig config);
  ~Network() override;

  void attach_server(ServerHandler* server) { server_ = server; }

  /// Opens a control channel for `client`; the returned link is owned by the
  /// network and stays valid for its lifetime.
  ChannelId connect(ClientId client, ClientHandler* handler);
  ClientLink& client_link(ChannelId channel);
  /// Closes the channel; the server hears about it after the latency.
  void disconnect(ChannelId channel);

  void send_control(ChannelId channel, Bytes frame) override;
  void multicast(std::vector<Bytes> datagrams, std::function<void()> on_drained) override;

  Duration airtime(std::uint64_t bytes) const;
  Timestamp radio_free_at() const { return radio_free_at_; }
  const LinkCounters& counters(ClientId client) const;
  const ChannelConfig& config() const { return config_; }
  Trace& trace() { return trace_; }
  const Trace& trace() const { return trace_; }

  /// Application-level trace line (dispatch decisions, session results).
  void note(std::string kind, std::string detail, ClientId client = 0);

 private:
  class Uplink;
  struct Endpoint {
    ClientId client = 0;
    ClientHandler* handler = nullptr;
    bool open = true;
    std::unique_ptr<Uplink> link;
  };
  struct LossState {
    std::mt19937_64 rng;
    bool bad = false;
  };

  Timestamp occupy_radio(std::uint64_t bytes, ClientId client, int tag);
  bool draw_loss(ClientId client);
  void uplink(ChannelId channel, Bytes frame);

  Simulator& sim_;
  ChannelConfig config_;
  ServerHandler* server_ = nullptr;
  std::map<ChannelId, Endpoint> endpoints_;
  ChannelId next_channel_ = 1;
  Timestamp radio_free_at_{};
  std::map<ClientId, LossState> loss_state_;
  std::map<ClientId, LinkCounters> counters_;
  Trace trace_;
};

}  // namespace xcast::netsim
