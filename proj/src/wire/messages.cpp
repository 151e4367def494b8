#include "xcast/wire/messages.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace xcast::wire {

namespace {

class Writer {
 public:
  explicit Writer(std::size_t reserve) { out_.reserve(reserve + 4); out_.resize(4); }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  Bytes finish() {
    const std::size_t body = out_.size() - 4;
    if (body > std::numeric_limits<std::uint32_t>::max()) {
      throw WireError(WireError::Kind::field_overflow, 0, "frame body exceeds 32-bit length");
    }
    for (int i = 0; i < 4; ++i) out_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(body >> (24 - 8 * i));
    return std::move(out_);
  }

 private:
  Bytes out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> frame, std::size_t start) : data_(frame), pos_(start) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }
  Bytes rest() {
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_), data_.end());
    pos_ = data_.size();
    return out;
  }
  /// Rejects counts whose records cannot fit before allocating anything.
  void need_records(std::uint64_t count, std::size_t record_size) {
    if (count * record_size > remaining()) {
      throw WireError(WireError::Kind::malformed, pos_, "record count exceeds frame");
    }
  }
  void expect_end() const {
    if (pos_ != data_.size()) throw WireError(WireError::Kind::malformed, pos_, "trailing bytes after message");
  }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t offset() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw WireError(WireError::Kind::malformed, pos_, "truncated message");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_;
};

[[noreturn]] void invariant(std::size_t offset, const std::string& what) {
  throw WireError(WireError::Kind::invariant_violation, offset, what);
}

[[noreturn]] void overflow(const std::string& what) { throw WireError(WireError::Kind::field_overflow, 0, what); }

template <class T>
T checked_count(std::size_t n, const char* field) {
  if (n > std::numeric_limits<T>::max()) overflow(std::string(field) + " does not fit its field");
  return static_cast<T>(n);
}

void check(const SegInfo& m, std::size_t offset) {
  if (m.members.empty()) invariant(offset, "SEG_INFO without members");
  if (m.payload_size == 0) invariant(offset, "SEG_INFO payload_size is zero");
  std::uint32_t longest = 0;
  std::set<ClientId> clients;
  std::set<SegmentKey> segments;
  for (const auto& member : m.members) {
    longest = std::max(longest, member.segment_length);
    if (!clients.insert(member.client_id).second) invariant(offset, "SEG_INFO repeats a client");
    if (!segments.insert({member.file_id, member.segment_index}).second) invariant(offset, "SEG_INFO repeats a segment");
  }
  if (longest == 0) invariant(offset, "SEG_INFO segments are empty");
  if (packets_for(longest, m.payload_size) != m.total_udp_packets) {
    invariant(offset, "SEG_INFO total_udp_packets != ceil(max segment_length / payload_size)");
  }
}

void check(const RetInfo& m, std::size_t offset) {
  for (const auto& e : m.emissions) {
    if (e.served.empty() || e.served.size() > 3) invariant(offset, "RET_INFO coded_degree outside 1..3");
    std::set<ServedPacket> distinct(e.served.begin(), e.served.end());
    if (distinct.size() != e.served.size()) invariant(offset, "RET_INFO emission repeats a served pair");
  }
}

void check(const JoinAdvert& m, std::size_t offset) {
  std::set<SegmentKey> distinct(m.entries.begin(), m.entries.end());
  if (distinct.size() != m.entries.size()) invariant(offset, "JOIN_ADVERT repeats a cache entry");
}

void write_key(Writer& w, const SegmentKey& k) {
  w.u32(k.file_id);
  w.u32(k.segment_index);
}

SegmentKey read_key(Reader& r) {
  SegmentKey k;
  k.file_id = r.u32();
  k.segment_index = r.u32();
  return k;
}

Bytes encode(const SegInfo& m) {
  check(m, 0);
  Writer w(8 + 16 * m.members.size());
  w.u8(static_cast<std::uint8_t>(MessageType::seg_info));
  w.u16(m.segment_group_id);
  w.u8(checked_count<std::uint8_t>(m.members.size(), "SEG_INFO member_count"));
  w.u16(m.total_udp_packets);
  w.u16(m.payload_size);
  for (const auto& member : m.members) {
    w.u32(member.client_id);
    w.u32(member.file_id);
    w.u32(member.segment_index);
    w.u32(member.segment_length);
  }
  return w.finish();
}

Bytes encode(const UdpPkt& m) {
  Writer w(5 + m.payload.size());
  w.u8(static_cast<std::uint8_t>(MessageType::udp_pkt));
  w.u16(m.segment_group_id);
  w.u16(m.udp_seq_no);
  w.bytes(m.payload);
  return w.finish();
}

Bytes encode(const Eod& m) {
  Writer w(3);
  w.u8(static_cast<std::uint8_t>(MessageType::eod));
  w.u16(m.segment_group_id);
  return w.finish();
}

Bytes encode(const RetReq& m) {
  Writer w(9 + 2 * m.seq_nos.size());
  w.u8(static_cast<std::uint8_t>(MessageType::ret_req));
  w.u16(m.segment_group_id);
  w.u32(m.client_id);
  w.u16(checked_count<std::uint16_t>(m.seq_nos.size(), "RET_REQ udp_pkt_count"));
  for (auto seq : m.seq_nos) w.u16(seq);
  return w.finish();
}

Bytes encode(const RetInfo& m) {
  check(m, 0);
  Writer w(5 + 19 * m.emissions.size());
  w.u8(static_cast<std::uint8_t>(MessageType::ret_info));
  w.u16(m.segment_group_id);
  w.u16(checked_count<std::uint16_t>(m.emissions.size(), "RET_INFO emission_count"));
  for (const auto& e : m.emissions) {
    w.u8(static_cast<std::uint8_t>(e.served.size()));
    for (const auto& s : e.served) {
      w.u32(s.client_id);
      w.u16(s.udp_seq_no);
    }
  }
  return w.finish();
}

Bytes encode(const JoinAdvert& m) {
  check(m, 0);
  Writer w(9 + 8 * m.entries.size());
  w.u8(static_cast<std::uint8_t>(MessageType::join_advert));
  w.u32(m.client_id);
  w.u32(checked_count<std::uint32_t>(m.entries.size(), "JOIN_ADVERT cache_entry_count"));
  for (const auto& e : m.entries) write_key(w, e);
  return w.finish();
}

Bytes encode(const SegReq& m) {
  Writer w(13);
  w.u8(static_cast<std::uint8_t>(MessageType::seg_req));
  w.u32(m.client_id);
  write_key(w, m.segment);
  return w.finish();
}

Bytes encode(const SegError& m) {
  Writer w(14);
  w.u8(static_cast<std::uint8_t>(MessageType::seg_error));
  w.u32(m.client_id);
  write_key(w, m.segment);
  w.u8(static_cast<std::uint8_t>(m.code));
  return w.finish();
}

Bytes encode(const SegData& m) {
  Writer w(13 + m.body.size());
  w.u8(static_cast<std::uint8_t>(MessageType::seg_data));
  w.u32(m.client_id);
  write_key(w, m.segment);
  w.bytes(m.body);
  return w.finish();
}

Message decode_body(MessageType type, Reader& r) {
  const std::size_t start = r.offset();
  switch (type) {
    case MessageType::seg_info: {
      SegInfo m;
      m.segment_group_id = r.u16();
      const std::uint8_t count = r.u8();
      m.total_udp_packets = r.u16();
      m.payload_size = r.u16();
      r.need_records(count, 16);
      m.members.resize(count);
      for (auto& member : m.members) {
        member.client_id = r.u32();
        member.file_id = r.u32();
        member.segment_index = r.u32();
        member.segment_length = r.u32();
      }
      r.expect_end();
      check(m, start);
      return m;
    }
    case MessageType::udp_pkt: {
      UdpPkt m;
      m.segment_group_id = r.u16();
      m.udp_seq_no = r.u16();
      m.payload = r.rest();
      return m;
    }
    case MessageType::eod: {
      Eod m;
      m.segment_group_id = r.u16();
      r.expect_end();
      return m;
    }
    case MessageType::ret_req: {
      RetReq m;
      m.segment_group_id = r.u16();
      m.client_id = r.u32();
      const std::uint16_t count = r.u16();
      r.need_records(count, 2);
      m.seq_nos.resize(count);
      for (auto& seq : m.seq_nos) seq = r.u16();
      r.expect_end();
      return m;
    }
    case MessageType::ret_info: {
      RetInfo m;
      m.segment_group_id = r.u16();
      const std::uint16_t count = r.u16();
      r.need_records(count, 7);
      m.emissions.resize(count);
      for (auto& e : m.emissions) {
        const std::uint8_t degree = r.u8();
        if (degree == 0 || degree > 3) invariant(r.offset() - 1, "RET_INFO coded_degree outside 1..3");
        r.need_records(degree, 6);
        e.served.resize(degree);
        for (auto& s : e.served) {
          s.client_id = r.u32();
          s.udp_seq_no = r.u16();
        }
      }
      r.expect_end();
      check(m, start);
      return m;
    }
    case MessageType::join_advert: {
      JoinAdvert m;
      m.client_id = r.u32();
      const std::uint32_t count = r.u32();
      r.need_records(count, 8);
      m.entries.resize(count);
      for (auto& e : m.entries) e = read_key(r);
      r.expect_end();
      check(m, start);
      return m;
    }
    case MessageType::seg_req: {
      SegReq m;
      m.client_id = r.u32();
      m.segment = read_key(r);
      r.expect_end();
      return m;
    }
    case MessageType::seg_error: {
      SegError m;
      m.client_id = r.u32();
      m.segment = read_key(r);
      const std::size_t at = r.offset();
      const std::uint8_t code = r.u8();
      if (code < 1 || code > 4) invariant(at, "SEG_ERROR unknown error code");
      m.code = static_cast<ErrorCode>(code);
      r.expect_end();
      return m;
    }
    case MessageType::seg_data: {
      SegData m;
      m.client_id = r.u32();
      m.segment = read_key(r);
      m.body = r.rest();
      return m;
    }
  }
  throw WireError(WireError::Kind::unknown_type, 4, "unknown message type");
}

}  // namespace

WireError::WireError(Kind kind, std::size_t offset, const std::string& what)
    : Error(what + " (offset " + std::to_string(offset) + ")"), kind_(kind), offset_(offset) {}

MessageType type_of(const Message& message) {
  return std::visit(
      [](const auto& m) -> MessageType {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SegInfo>) return MessageType::seg_info;
        if constexpr (std::is_same_v<T, UdpPkt>) return MessageType::udp_pkt;
        if constexpr (std::is_same_v<T, Eod>) return MessageType::eod;
        if constexpr (std::is_same_v<T, RetReq>) return MessageType::ret_req;
        if constexpr (std::is_same_v<T, RetInfo>) return MessageType::ret_info;
        if constexpr (std::is_same_v<T, JoinAdvert>) return MessageType::join_advert;
        if constexpr (std::is_same_v<T, SegReq>) return MessageType::seg_req;
        if constexpr (std::is_same_v<T, SegError>) return MessageType::seg_error;
        if constexpr (std::is_same_v<T, SegData>) return MessageType::seg_data;
      },
      message);
}

const char* type_name(MessageType type) {
  switch (type) {
    case MessageType::seg_info: return "SEG_INFO";
    case MessageType::udp_pkt: return "UDP_PKT";
    case MessageType::eod: return "EOD";
    case MessageType::ret_req: return "RET_REQ";
    case MessageType::ret_info: return "RET_INFO";
    case MessageType::join_advert: return "JOIN_ADVERT";
    case MessageType::seg_req: return "SEG_REQ";
    case MessageType::seg_error: return "SEG_ERROR";
    case MessageType::seg_data: return "SEG_DATA";
  }
  return "UNKNOWN";
}

Bytes encode_message(const Message& message) {
  return std::visit([](const auto& m) { return encode(m); }, message);
}

Message decode_message(std::span<const std::uint8_t> frame) {
  if (frame.size() < kFrameOverhead) {
    throw WireError(WireError::Kind::malformed, frame.size(), "frame shorter than prefix and type tag");
  }
  Reader r(frame, 0);
  const std::uint32_t length = r.u32();
  if (length != frame.size() - 4) {
    throw WireError(WireError::Kind::malformed, 0,
                    "length prefix " + std::to_string(length) + " != body size " + std::to_string(frame.size() - 4));
  }
  const std::uint8_t tag = r.u8();
  if (tag < 0x01 || tag > 0x09) {
    throw WireError(WireError::Kind::unknown_type, 4, "unknown message type " + std::to_string(tag));
  }
  return decode_body(static_cast<MessageType>(tag), r);
}

std::uint32_t packets_for(std::uint64_t length, std::uint16_t payload_size) {
  if (payload_size == 0) return 0;
  const std::uint64_t packets = (length + payload_size - 1) / payload_size;
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(packets, std::numeric_limits<std::uint32_t>::max()));
}

}  // namespace xcast::wire
