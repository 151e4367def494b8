#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xcast/types.hpp"

namespace xcast::wire {

/// Bumped whenever a byte layout changes; golden fixtures carry it.
inline constexpr int kWireVersion = 1;

/// Length prefix (4) + type tag (1).
inline constexpr std::size_t kFrameOverhead = 5;

enum class MessageType : std::uint8_t {
  seg_info = 0x01,
  udp_pkt = 0x02,
  eod = 0x03,
  ret_req = 0x04,
  ret_info = 0x05,
  join_advert = 0x06,
  seg_req = 0x07,
  seg_error = 0x08,
  seg_data = 0x09,
};

struct SegmentKey {
  std::uint32_t file_id = 0;
  std::uint32_t segment_index = 0;

  friend auto operator<=>(const SegmentKey&, const SegmentKey&) = default;
};

struct SegInfoMember {
  ClientId client_id = 0;
  std::uint32_t file_id = 0;
  std::uint32_t segment_index = 0;
  std::uint32_t segment_length = 0;

  friend bool operator==(const SegInfoMember&, const SegInfoMember&) = default;
};

/// Announces a (possibly coded) segment transmission to its segment group.
struct SegInfo {
  std::uint16_t segment_group_id = 0;
  std::vector<SegInfoMember> members;
  std::uint16_t total_udp_packets = 0;
  std::uint16_t payload_size = 0;

  friend bool operator==(const SegInfo&, const SegInfo&) = default;
};

struct UdpPkt {
  std::uint16_t segment_group_id = 0;
  std::uint16_t udp_seq_no = 0;
  Bytes payload;

  friend bool operator==(const UdpPkt&, const UdpPkt&) = default;
};

struct Eod {
  std::uint16_t segment_group_id = 0;

  friend bool operator==(const Eod&, const Eod&) = default;
};

/// Missing packets after an EOD; an empty list (UDP_PKT_COUNT=0) means done.
struct RetReq {
  std::uint16_t segment_group_id = 0;
  ClientId client_id = 0;
  std::vector<std::uint16_t> seq_nos;

  friend bool operator==(const RetReq&, const RetReq&) = default;
};

struct ServedPacket {
  ClientId client_id = 0;
  std::uint16_t udp_seq_no = 0;

  friend auto operator<=>(const ServedPacket&, const ServedPacket&) = default;
};

/// One coded retransmission: the packets XORed together, each tagged with the
/// client it repairs. Coded degree is served.size().
struct RetEmission {
  std::vector<ServedPacket> served;

  friend bool operator==(const RetEmission&, const RetEmission&) = default;
};

struct RetInfo {
  std::uint16_t segment_group_id = 0;
  std::vector<RetEmission> emissions;

  friend bool operator==(const RetInfo&, const RetInfo&) = default;
};

/// Sent on (re)join: the client's id and its cached segments, H(c).
struct JoinAdvert {
  ClientId client_id = 0;
  std::vector<SegmentKey> entries;

  friend bool operator==(const JoinAdvert&, const JoinAdvert&) = default;
};

struct SegReq {
  ClientId client_id = 0;
  SegmentKey segment;

  friend bool operator==(const SegReq&, const SegReq&) = default;
};

enum class ErrorCode : std::uint8_t {
  unknown_segment = 1,
  origin_failure = 2,
  not_registered = 3,
  delivery_failed = 4,
};

struct SegError {
  ClientId client_id = 0;
  SegmentKey segment;
  ErrorCode code = ErrorCode::unknown_segment;

  friend bool operator==(const SegError&, const SegError&) = default;
};

/// Whole segment over the control channel (fallback delivery).
struct SegData {
  ClientId client_id = 0;
  SegmentKey segment;
  Bytes body;

  friend bool operator==(const SegData&, const SegData&) = default;
};

using Message = std::variant<SegInfo, UdpPkt, Eod, RetReq, RetInfo, JoinAdvert, SegReq, SegError, SegData>;

MessageType type_of(const Message& message);
const char* type_name(MessageType type);

class WireError : public Error {
 public:
  enum class Kind { malformed, unknown_type, invariant_violation, field_overflow };

  WireError(Kind kind, std::size_t offset, const std::string& what);

  Kind kind() const { return kind_; }
  /// Byte offset within the frame (prefix included) where decoding stopped.
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Frame = 32-bit big-endian body length, then the body (type tag + fields).
/// Throws WireError{field_overflow | invariant_violation}.
Bytes encode_message(const Message& message);

/// Inverse of encode_message over one complete frame. Throws WireError.
Message decode_message(std::span<const std::uint8_t> frame);

/// Number of packets needed for a payload of `length` bytes.
std::uint32_t packets_for(std::uint64_t length, std::uint16_t payload_size);

}  // namespace xcast::wire
