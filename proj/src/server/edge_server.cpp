#include "xcast/server/edge_server.hpp"

#include <algorithm>
#include <iostream>

namespace xcast::server {

namespace {

constexpr std::uint32_t kMaxSeq = 0xFFFF;

wire::SegmentKey key_of(const SegmentRef& ref) { return {ref.file_id, ref.segment_index}; }

bool outstanding(MemberStatus s) {
  return s == MemberStatus::sending || s == MemberStatus::await_ret_req || s == MemberStatus::retransmitting;
}

}  // namespace

void ServerConfig::validate() const {
  scheduler.validate();
  if (payload_size == 0) throw ConfigError("payload_size must be positive");
  if (ret_req_timeout <= Duration::zero()) throw ConfigError("ret_req_timeout must be positive");
  if (max_missed_rounds == 0) throw ConfigError("max_missed_rounds must be positive");
}

struct EdgeServer::Session {
  std::uint16_t group = 0;
  std::vector<Member> members;
  std::map<std::uint16_t, Bytes> packets;
  std::uint32_t total = 0;
  /// Emissions announced by earlier RET_INFOs; fixes retransmission seq numbers.
  std::uint32_t announced = 0;
  /// Bumped at every EOD so late timers can tell they are stale.
  std::uint32_t eod_round = 0;
  bool collecting = false;
  std::optional<Executor::TimerId> timer;
  SessionReport report;

  Member* find(ClientId client) {
    auto it = std::find_if(members.begin(), members.end(), [&](const Member& m) { return m.client == client; });
    return it == members.end() ? nullptr : &*it;
  }
};

EdgeServer::EdgeServer(ServerConfig config, Catalog catalog, Executor& executor, ServerLink& link,
                       OriginSource& origin)
    : config_(config),
      catalog_(std::move(catalog)),
      executor_(executor),
      link_(link),
      store_(origin),
      scheduler_(config.scheduler, [this](const SegmentRef& ref) { return catalog_.next(ref); }) {
  config_.validate();
  // leave half the seq space for retransmissions
  const std::uint64_t packets = wire::packets_for(catalog_.max_segment_size(), config_.payload_size);
  if (packets > kMaxSeq / 2) {
    throw ConfigError("segments of " + std::to_string(catalog_.max_segment_size()) +
                      " bytes need too many packets at payload_size " + std::to_string(config_.payload_size));
  }
}

EdgeServer::~EdgeServer() {
  *alive_ = false;
  if (session_ && session_->timer) executor_.cancel(*session_->timer);
}

std::optional<ClientId> EdgeServer::client_on(ChannelId channel) const {
  auto it = client_of_.find(channel);
  if (it == client_of_.end()) return std::nullopt;
  return it->second;
}

void EdgeServer::send(ChannelId channel, const wire::Message& message) {
  Bytes frame = wire::encode_message(message);
  const bool segment = std::holds_alternative<wire::SegData>(message);
  (segment ? stats_.bytes_segment : stats_.bytes_control) += frame.size();
  if (session_) {
    // only traffic that belongs to the running group is charged to it
    const bool in_session =
        std::visit([&](const auto& m) -> bool {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, wire::SegInfo> || std::is_same_v<T, wire::Eod> ||
                        std::is_same_v<T, wire::RetInfo>) {
            return m.segment_group_id == session_->group;
          } else if constexpr (std::is_same_v<T, wire::SegData>) {
            const Member* member = session_->find(m.client_id);
            return member && member->status == MemberStatus::fallback;
          } else {
            return false;
          }
        }, message);
    if (in_session) (segment ? session_->report.bytes_segment : session_->report.bytes_control) += frame.size();
  }
  link_.send_control(channel, std::move(frame));
}

void EdgeServer::send_to(ClientId client, const wire::Message& message) {
  auto it = channel_of_.find(client);
  if (it != channel_of_.end()) send(it->second, message);
}

void EdgeServer::on_control(ChannelId channel, std::span<const std::uint8_t> frame) {
  wire::Message message;
  try {
    message = wire::decode_message(frame);
  } catch (const wire::WireError& e) {
    std::cerr << "xcast-server: dropping bad frame on channel " << channel << ": " << e.what() << '\n';
    return;
  }
  if (auto* join = std::get_if<wire::JoinAdvert>(&message)) {
    handle_join(channel, *join);
  } else if (auto* req = std::get_if<wire::SegReq>(&message)) {
    handle_request(channel, *req);
  } else if (auto* ret = std::get_if<wire::RetReq>(&message)) {
    handle_ret_req(channel, *ret);
  } else {
    std::cerr << "xcast-server: unexpected " << wire::type_name(wire::type_of(message)) << " on channel " << channel
              << '\n';
  }
}

void EdgeServer::on_disconnect(ChannelId channel) {
  if (auto client = client_on(channel)) remove_client(*client);
}

void EdgeServer::remove_client(ClientId client) {
  if (auto it = channel_of_.find(client); it != channel_of_.end()) {
    client_of_.erase(it->second);
    channel_of_.erase(it);
  }
  clients_.erase(client);
  apply(scheduler_.on_client_departed(client, clients_, executor_.now()));
  if (session_) {
    if (Member* m = session_->find(client); m && outstanding(m->status)) {
      m->status = MemberStatus::departed;
      maybe_close_round();
    }
  }
}

void EdgeServer::handle_join(ChannelId channel, const wire::JoinAdvert& join) {
  const ClientId client = join.client_id;
  if (clients_.contains(client)) {
    std::cerr << "xcast-server: client " << client << " rejoined, replacing its entry\n";
    remove_client(client);
  }
  if (auto previous = client_on(channel)) remove_client(*previous);
  coding::ClientState state{client, {}, {}};
  for (const auto& key : join.entries) {
    if (auto ref = catalog_.lookup(key.file_id, key.segment_index)) state.cached.insert(*ref);
  }
  clients_[client] = std::move(state);
  channel_of_[client] = channel;
  client_of_[channel] = client;
}

void EdgeServer::handle_request(ChannelId channel, const wire::SegReq& req) {
  auto owner = client_on(channel);
  if (!owner || *owner != req.client_id) {
    send(channel, wire::SegError{req.client_id, req.segment, wire::ErrorCode::not_registered});
    return;
  }
  auto ref = catalog_.lookup(req.segment.file_id, req.segment.segment_index);
  if (!ref) {
    send(channel, wire::SegError{req.client_id, req.segment, wire::ErrorCode::unknown_segment});
    return;
  }
  const ClientId client = req.client_id;
  clients_[client].wanted = {*ref};
  std::weak_ptr<bool> alive = alive_;
  store_.get(*ref, [this, alive, client, ref = *ref](std::optional<Bytes> body, std::string error) {
    if (alive.expired()) return;
    auto state = clients_.find(client);
    if (state == clients_.end() || !state->second.wanted.contains(ref)) return;
    if (!body) {
      std::cerr << "xcast-server: origin fetch for " << to_string(ref) << " failed: " << error << '\n';
      state->second.wanted.clear();
      send_to(client, wire::SegError{client, key_of(ref), wire::ErrorCode::origin_failure});
      return;
    }
    admit(client, ref);
  });
}

void EdgeServer::admit(ClientId client, const SegmentRef& ref) {
  auto& state = clients_.at(client);
  if (state.cached.contains(ref)) {
    // nothing to code against; hand it over directly
    state.wanted.clear();
    send_to(client, wire::SegData{client, key_of(ref), *store_.find(ref)});
    return;
  }
  auto effect = scheduler_.on_request_arrival({client, ref}, clients_, executor_.now());
  if (effect.arrival == scheduler::ArrivalOutcome::rejected_queue_full) {
    ++stats_.rejected_requests;
    ++stats_.fallback_deliveries;
    state.wanted.clear();
    state.cached.insert(ref);
    send_to(client, wire::SegData{client, key_of(ref), *store_.find(ref)});
  }
  apply(effect);
}

void EdgeServer::apply(const scheduler::SchedulerEffect& effect) {
  for (const auto& guess : effect.proactive_inserted) {
    store_.get(guess.segment, [](std::optional<Bytes>, std::string) {});
  }
  if (effect.arm_timer) {
    std::weak_ptr<bool> alive = alive_;
    const auto entry = effect.arm_timer->entry;
    executor_.schedule_at(effect.arm_timer->deadline, [this, alive, entry] {
      if (alive.expired()) return;
      apply(scheduler_.on_timer_fire(entry, clients_, executor_.now()));
    });
  }
  if (effect.dispatch) start_session(*effect.dispatch);
}

void EdgeServer::start_session(const scheduler::Dispatch& dispatch) {
  auto session = std::make_unique<Session>();
  session->group = next_group_++;
  if (next_group_ == 0) next_group_ = 1;
  session->report.segment_group_id = session->group;
  session->report.coding_set = dispatch.coding_set;
  session->report.started = executor_.now();

  std::vector<Bytes> bodies;
  for (const auto& m : dispatch.coding_set.members) {
    const Bytes* body = store_.find(m.segment);
    if (!body) throw Error("no body for dispatched segment " + to_string(m.segment));
    bodies.push_back(*body);
    Member member;
    member.client = m.client;
    member.segment = m.segment;
    session->members.push_back(std::move(member));
  }
  auto payload = coding::xor_encode(bodies);
  session->total = wire::packets_for(payload.body.size(), config_.payload_size);
  for (std::uint32_t seq = 0; seq < session->total; ++seq) {
    const std::size_t begin = std::size_t{seq} * config_.payload_size;
    const std::size_t end = std::min(payload.body.size(), begin + config_.payload_size);
    session->packets.emplace(static_cast<std::uint16_t>(seq),
                             Bytes(payload.body.begin() + static_cast<std::ptrdiff_t>(begin),
                                   payload.body.begin() + static_cast<std::ptrdiff_t>(end)));
  }
  for (auto& m : session->members) {
    for (std::uint32_t seq = 0; seq < session->total; ++seq) m.missing.insert(static_cast<std::uint16_t>(seq));
  }
  session->report.udp_packets = session->total;
  session_ = std::move(session);

  ++stats_.sessions;
  if (dispatch.coding_set.size() > 1) ++stats_.coded_sessions;
  if (observer_.on_dispatch) observer_.on_dispatch(dispatch);

  wire::SegInfo info;
  info.segment_group_id = session_->group;
  info.total_udp_packets = static_cast<std::uint16_t>(session_->total);
  info.payload_size = config_.payload_size;
  for (const auto& m : dispatch.coding_set.members) {
    info.members.push_back({m.client, m.segment.file_id, m.segment.segment_index, m.segment.size_bytes});
  }
  for (const auto& m : session_->members) send_to(m.client, info);

  std::vector<Bytes> datagrams;
  datagrams.reserve(session_->total);
  for (const auto& [seq, bytes] : session_->packets) {
    datagrams.push_back(wire::encode_message(wire::UdpPkt{session_->group, seq, bytes}));
    stats_.bytes_segment += datagrams.back().size();
    session_->report.bytes_segment += datagrams.back().size();
  }
  std::weak_ptr<bool> alive = alive_;
  const auto group = session_->group;
  link_.multicast(std::move(datagrams), [this, alive, group] {
    if (alive.expired() || !session_ || session_->group != group) return;
    end_of_data();
  });
}

void EdgeServer::end_of_data() {
  auto& s = *session_;
  ++s.eod_round;
  s.collecting = true;
  for (auto& m : s.members) {
    if (!outstanding(m.status)) continue;
    m.status = MemberStatus::await_ret_req;
    m.reported = false;
    send_to(m.client, wire::Eod{s.group});
  }
  std::weak_ptr<bool> alive = alive_;
  const auto group = s.group;
  const auto round = s.eod_round;
  s.timer = executor_.schedule_after(config_.ret_req_timeout, [this, alive, group, round] {
    if (alive.expired()) return;
    round_timeout(group, round);
  });
  maybe_close_round();
}

void EdgeServer::handle_ret_req(ChannelId channel, const wire::RetReq& req) {
  auto owner = client_on(channel);
  if (!owner || *owner != req.client_id || !session_ || session_->group != req.segment_group_id) return;
  Member* m = session_->find(req.client_id);
  if (!m || m->status != MemberStatus::await_ret_req || m->reported || !session_->collecting) return;
  for (auto seq : req.seq_nos) {
    if (seq >= session_->total) {
      std::cerr << "xcast-server: client " << req.client_id << " reported seq " << seq << " outside group "
                << req.segment_group_id << '\n';
      return;
    }
  }
  m->missing = std::set<std::uint16_t>(req.seq_nos.begin(), req.seq_nos.end());
  m->reported = true;
  m->missed_rounds = 0;
  if (m->missing.empty()) m->status = MemberStatus::done;
  maybe_close_round();
}

void EdgeServer::round_timeout(std::uint16_t group, std::uint32_t round) {
  if (!session_ || session_->group != group || session_->eod_round != round || !session_->collecting) return;
  session_->timer.reset();
  std::vector<ClientId> gone;
  for (auto& m : session_->members) {
    if (m.status != MemberStatus::await_ret_req || m.reported) continue;
    // silent: assume it still lacks everything it lacked before
    m.reported = true;
    if (++m.missed_rounds >= config_.max_missed_rounds) gone.push_back(m.client);
  }
  for (ClientId c : gone) {
    std::cerr << "xcast-server: client " << c << " silent for " << config_.max_missed_rounds
              << " rounds, treating as disconnected\n";
    remove_client(c);
    if (!session_ || session_->group != group) return;
  }
  maybe_close_round();
}

void EdgeServer::maybe_close_round() {
  if (!session_ || !session_->collecting) return;
  for (const auto& m : session_->members) {
    if (m.status == MemberStatus::await_ret_req && !m.reported) return;
  }
  session_->collecting = false;
  if (session_->timer) {
    executor_.cancel(*session_->timer);
    session_->timer.reset();
  }
  next_round();
}

void EdgeServer::fallback(Member& m) {
  m.status = MemberStatus::fallback;
  ++stats_.fallback_deliveries;
  send_to(m.client, wire::SegData{m.client, key_of(m.segment), *store_.find(m.segment)});
}

void EdgeServer::next_round() {
  auto& s = *session_;
  coding::LossReports reports;
  std::set<ClientId> group;
  for (auto& m : s.members) {
    if (m.status != MemberStatus::await_ret_req) continue;
    group.insert(m.client);
    reports[m.client] = m.missing;
  }
  if (reports.empty()) {
    finish_session();
    return;
  }
  if (s.report.rounds >= config_.max_retransmission_rounds) {
    for (auto& m : s.members) {
      if (m.status == MemberStatus::await_ret_req) fallback(m);
    }
    finish_session();
    return;
  }

  const auto graph = coding::build_retransmission_graph(reports, group);
  auto emissions = coding::plan_retransmissions(graph, s.packets);
  if (s.total + s.announced + emissions.size() > kMaxSeq) {
    for (auto& m : s.members) {
      if (m.status == MemberStatus::await_ret_req) fallback(m);
    }
    finish_session();
    return;
  }

  wire::RetInfo info;
  info.segment_group_id = s.group;
  std::vector<Bytes> datagrams;
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    wire::RetEmission e;
    for (const auto& lost : emissions[i].served) e.served.push_back({lost.client, lost.seq});
    info.emissions.push_back(std::move(e));
    const auto seq = static_cast<std::uint16_t>(s.total + s.announced + i);
    datagrams.push_back(wire::encode_message(wire::UdpPkt{s.group, seq, std::move(emissions[i].body)}));
    stats_.bytes_segment += datagrams.back().size();
    s.report.bytes_segment += datagrams.back().size();
  }
  s.announced += static_cast<std::uint32_t>(emissions.size());
  ++s.report.rounds;
  s.report.retransmission_emissions += static_cast<std::uint32_t>(emissions.size());
  stats_.retransmission_emissions += emissions.size();

  for (auto& m : s.members) {
    if (m.status != MemberStatus::await_ret_req) continue;
    m.status = MemberStatus::retransmitting;
    send_to(m.client, info);
  }
  std::weak_ptr<bool> alive = alive_;
  const auto g = s.group;
  link_.multicast(std::move(datagrams), [this, alive, g] {
    if (alive.expired() || !session_ || session_->group != g) return;
    end_of_data();
  });
}

void EdgeServer::finish_session() {
  auto session = std::move(session_);
  session->report.finished = executor_.now();
  for (const auto& m : session->members) {
    session->report.outcome[m.client] = m.status;
    if (m.status != MemberStatus::done && m.status != MemberStatus::fallback) continue;
    auto state = clients_.find(m.client);
    if (state == clients_.end()) continue;
    state->second.wanted.erase(m.segment);
    state->second.cached.insert(m.segment);
  }
  reports_.push_back(session->report);
  if (observer_.on_session) observer_.on_session(reports_.back());
  apply(scheduler_.on_transmission_complete(clients_, executor_.now()));
}

}  // namespace xcast::server
