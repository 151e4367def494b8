#include "xcast/client/client.hpp"

#include <algorithm>
#include <iostream>

#include "xcast/coding/xor_codec.hpp"

namespace xcast::client {

std::set<std::uint16_t> ReceiveSession::missing() const {
  std::set<std::uint16_t> out;
  for (std::uint32_t seq = 0; seq < info.total_udp_packets; ++seq) {
    if (!held.contains(static_cast<std::uint16_t>(seq))) out.insert(static_cast<std::uint16_t>(seq));
  }
  return out;
}

Client::Client(ClientConfig config, Executor& executor, SegmentCache cache)
    : config_(config), executor_(executor), cache_(std::move(cache)) {}

Client::~Client() {
  *alive_ = false;
  if (pending_ && pending_->timer) executor_.cancel(*pending_->timer);
}

void Client::send(const wire::Message& message) {
  if (!link_) throw Error("client " + std::to_string(config_.id) + " is not attached to a transport");
  ++stats_.messages_sent;
  link_->send_control(wire::encode_message(message));
}

void Client::join() {
  wire::JoinAdvert advert;
  advert.client_id = config_.id;
  for (const auto& ref : cache_.refs()) advert.entries.push_back({ref.file_id, ref.segment_index});
  send(advert);
}

void Client::request_segment(std::uint32_t file_id, std::uint32_t segment_index, RequestCallback done) {
  const SegmentRef key{file_id, segment_index, 0};
  RequestResult result;
  result.ref = key;
  result.requested = executor_.now();
  if (const Bytes* body = cache_.find(key)) {
    result.ref = *cache_.stored_ref(key);
    result.delivery = Delivery::local;
    result.body = *body;
    result.completed = result.requested;
    done(result);
    return;
  }
  if (pending_) {
    result.error = "request for " + to_string(pending_->ref) + " still outstanding";
    result.failure = Failure::busy;
    result.completed = result.requested;
    done(result);
    return;
  }
  pending_ = Pending{key, std::move(done), executor_.now(), std::nullopt};
  std::weak_ptr<bool> alive = alive_;
  pending_->timer = executor_.schedule_after(config_.request_timeout, [this, alive, key] {
    if (alive.expired() || !pending_ || pending_->ref != key) return;
    pending_->timer.reset();
    complete(key, Delivery::failed, std::nullopt, "timed out waiting for " + to_string(key), Failure::timeout);
  });
  try {
    send(wire::SegReq{config_.id, {file_id, segment_index}});
  } catch (const Error& e) {
    complete(key, Delivery::failed, std::nullopt, e.what(), Failure::unreachable);
  }
}

void Client::complete(const SegmentRef& ref, Delivery how, std::optional<Bytes> body, std::string error,
                      Failure failure, std::optional<wire::ErrorCode> code) {
  if (!pending_ || pending_->ref != ref) return;
  auto pending = std::move(*pending_);
  pending_.reset();
  if (pending.timer) executor_.cancel(*pending.timer);
  RequestResult result;
  result.ref = body ? SegmentRef{ref.file_id, ref.segment_index, static_cast<std::uint32_t>(body->size())} : ref;
  result.delivery = body ? how : Delivery::failed;
  result.failure = body ? Failure::none : failure;
  result.body = std::move(body);
  result.error = std::move(error);
  result.code = code;
  result.requested = pending.requested;
  result.completed = executor_.now();
  pending.done(result);
}

void Client::on_control(std::span<const std::uint8_t> frame) {
  wire::Message message;
  try {
    message = wire::decode_message(frame);
  } catch (const wire::WireError& e) {
    ++stats_.protocol_errors;
    std::cerr << "xcast-client " << config_.id << ": bad control frame: " << e.what() << '\n';
    return;
  }
  std::visit([&](const auto& m) {
    using T = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<T, wire::SegInfo>) {
      handle_seg_info(m);
    } else if constexpr (std::is_same_v<T, wire::Eod>) {
      handle_eod(m);
    } else if constexpr (std::is_same_v<T, wire::RetInfo>) {
      handle_ret_info(m);
    } else if constexpr (std::is_same_v<T, wire::SegData>) {
      handle_seg_data(m);
    } else if constexpr (std::is_same_v<T, wire::SegError>) {
      handle_seg_error(m);
    } else {
      ++stats_.protocol_errors;
    }
  }, message);
}

void Client::on_disconnect() {
  if (pending_) {
    const auto ref = pending_->ref;
    complete(ref, Delivery::failed, std::nullopt, "server unreachable", Failure::unreachable);
  }
}

void Client::handle_seg_info(const wire::SegInfo& info) {
  auto me = std::find_if(info.members.begin(), info.members.end(),
                         [&](const wire::SegInfoMember& m) { return m.client_id == config_.id; });
  if (me == info.members.end()) return;
  ReceiveSession s;
  s.info = info;
  s.my_index = static_cast<std::size_t>(me - info.members.begin());
  for (const auto& m : info.members) {
    if (m.client_id == config_.id) continue;
    if (!cache_.contains(SegmentRef{m.file_id, m.segment_index, 0})) {
      ++stats_.protocol_errors;
      std::cerr << "xcast-client " << config_.id << ": group " << info.segment_group_id << " codes against f"
                << m.file_id << '^' << m.segment_index << " which is not cached\n";
    }
  }
  sessions_[info.segment_group_id] = std::move(s);
}

std::size_t Client::packet_length(const ReceiveSession& s, std::uint16_t seq) const {
  std::uint64_t longest = 0;
  for (const auto& m : s.info.members) longest = std::max<std::uint64_t>(longest, m.segment_length);
  const std::uint64_t begin = std::uint64_t{seq} * s.info.payload_size;
  return static_cast<std::size_t>(std::min<std::uint64_t>(s.info.payload_size, longest - begin));
}

void Client::on_datagram(std::span<const std::uint8_t> datagram) {
  ++stats_.datagrams;
  wire::Message message;
  try {
    message = wire::decode_message(datagram);
  } catch (const wire::WireError&) {
    ++stats_.protocol_errors;
    return;
  }
  auto* pkt = std::get_if<wire::UdpPkt>(&message);
  if (!pkt) {
    ++stats_.protocol_errors;
    return;
  }
  auto it = sessions_.find(pkt->segment_group_id);
  if (it == sessions_.end()) {
    ++stats_.foreign_datagrams;
    return;
  }
  auto& s = it->second;
  if (s.state == ReceiveState::done) {
    ++stats_.duplicate_datagrams;
    return;
  }
  if (pkt->udp_seq_no < s.info.total_udp_packets) {
    if (pkt->payload.size() != packet_length(s, pkt->udp_seq_no)) {
      ++stats_.protocol_errors;
      return;
    }
    if (s.held.contains(pkt->udp_seq_no)) {
      ++stats_.duplicate_datagrams;
      return;
    }
    s.held.emplace(pkt->udp_seq_no, std::move(pkt->payload));
    return;
  }
  if (!s.coded.emplace(pkt->udp_seq_no, std::move(pkt->payload)).second) {
    ++stats_.duplicate_datagrams;
    return;
  }
  try_recover(s, pkt->udp_seq_no);
}

void Client::handle_ret_info(const wire::RetInfo& info) {
  auto it = sessions_.find(info.segment_group_id);
  if (it == sessions_.end() || it->second.state == ReceiveState::done) return;
  auto& s = it->second;
  const std::uint32_t base = s.info.total_udp_packets + s.announced;
  s.announced += static_cast<std::uint32_t>(info.emissions.size());
  for (std::size_t i = 0; i < info.emissions.size(); ++i) {
    const auto seq = static_cast<std::uint16_t>(base + i);
    s.emission_for[seq] = info.emissions[i];
    try_recover(s, seq);
  }
}

void Client::try_recover(ReceiveSession& s, std::uint16_t seq) {
  auto body = s.coded.find(seq);
  auto emission = s.emission_for.find(seq);
  if (body == s.coded.end() || emission == s.emission_for.end()) return;
  const auto& served = emission->second.served;
  auto mine = std::find_if(served.begin(), served.end(),
                           [&](const wire::ServedPacket& p) { return p.client_id == config_.id; });
  if (mine != served.end() && !s.held.contains(mine->udp_seq_no) &&
      mine->udp_seq_no < s.info.total_udp_packets) {
    Bytes out = body->second;
    bool ok = true;
    for (const auto& p : served) {
      if (&p == &*mine) continue;
      auto other = s.held.find(p.udp_seq_no);
      if (other == s.held.end() || other->second.size() > out.size()) {
        ok = false;
        break;
      }
      coding::xor_into(out, other->second);
    }
    const std::size_t len = packet_length(s, mine->udp_seq_no);
    if (ok && out.size() >= len) {
      out.resize(len);
      s.held.emplace(mine->udp_seq_no, std::move(out));
      ++stats_.recovered_packets;
    } else {
      ++stats_.protocol_errors;
    }
  }
  s.coded.erase(seq);
  s.emission_for.erase(seq);
}

void Client::handle_eod(const wire::Eod& eod) {
  auto it = sessions_.find(eod.segment_group_id);
  if (it == sessions_.end() || it->second.state == ReceiveState::done) return;
  auto& s = it->second;
  const auto missing = s.missing();
  ++stats_.ret_reqs;
  send(wire::RetReq{eod.segment_group_id, config_.id, std::vector<std::uint16_t>(missing.begin(), missing.end())});
  if (missing.empty()) {
    decode(eod.segment_group_id);
  } else {
    s.state = ReceiveState::requesting;
  }
}

void Client::decode(std::uint16_t group) {
  auto& s = sessions_.at(group);
  s.state = ReceiveState::done;
  const auto& me = s.info.members[s.my_index];
  const SegmentRef ref{me.file_id, me.segment_index, me.segment_length};

  coding::CodedPayload payload;
  for (const auto& [seq, bytes] : s.held) payload.body.insert(payload.body.end(), bytes.begin(), bytes.end());
  std::vector<Bytes> side;
  std::string error;
  for (std::size_t i = 0; i < s.info.members.size(); ++i) {
    const auto& m = s.info.members[i];
    payload.member_refs.push_back({m.file_id, m.segment_index, m.segment_length});
    payload.segment_lengths.push_back(m.segment_length);
    if (i == s.my_index) continue;
    const Bytes* cached = cache_.find(SegmentRef{m.file_id, m.segment_index, 0});
    if (!cached) {
      error = "side information f" + std::to_string(m.file_id) + "^" + std::to_string(m.segment_index) + " missing";
      break;
    }
    side.push_back(*cached);
  }
  s.held.clear();
  s.coded.clear();
  s.emission_for.clear();

  std::optional<Bytes> body;
  if (error.empty()) {
    try {
      body = coding::xor_decode(payload, s.my_index, side);
      if (!cache_.contains(ref)) cache_.insert(ref, *body);
    } catch (const Error& e) {
      error = e.what();
      body.reset();
    }
  }
  if (!body) {
    ++stats_.protocol_errors;
    std::cerr << "xcast-client " << config_.id << ": decode of " << to_string(ref) << " failed: " << error << '\n';
  }
  complete(ref, Delivery::multicast, std::move(body), error, Failure::decode);
}

void Client::handle_seg_data(const wire::SegData& data) {
  if (data.client_id != config_.id) return;
  const SegmentRef ref{data.segment.file_id, data.segment.segment_index, static_cast<std::uint32_t>(data.body.size())};
  for (auto& [group, s] : sessions_) {
    const auto& me = s.info.members[s.my_index];
    if (s.state != ReceiveState::done && me.file_id == ref.file_id && me.segment_index == ref.segment_index) {
      s.state = ReceiveState::done;
      s.held.clear();
      s.coded.clear();
      s.emission_for.clear();
    }
  }
  try {
    if (!cache_.contains(ref)) cache_.insert(ref, data.body);
  } catch (const Error& e) {
    complete(ref, Delivery::failed, std::nullopt, e.what(), Failure::decode);
    return;
  }
  complete(ref, Delivery::fallback, data.body, {});
}

void Client::handle_seg_error(const wire::SegError& error) {
  if (error.client_id != config_.id) return;
  const SegmentRef ref{error.segment.file_id, error.segment.segment_index, 0};
  std::string what;
  switch (error.code) {
    case wire::ErrorCode::unknown_segment:
      what = "unknown segment";
      break;
    case wire::ErrorCode::origin_failure:
      what = "origin fetch failed";
      break;
    case wire::ErrorCode::not_registered:
      what = "client not registered";
      break;
    case wire::ErrorCode::delivery_failed:
      what = "delivery failed";
      break;
  }
  complete(ref, Delivery::failed, std::nullopt, what + " for " + to_string(ref), Failure::rejected, error.code);
}

}  // namespace xcast::client
