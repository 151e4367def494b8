#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xcast/types.hpp"

namespace xcast::coding {

/// XOR of one or more segment bodies. Shorter bodies are zero padded on the
/// right, so the tail of the longest body rides uncoded.
struct CodedPayload {
  std::vector<SegmentRef> member_refs;
  std::vector<std::uint32_t> segment_lengths;
  Bytes body;

  friend bool operator==(const CodedPayload&, const CodedPayload&) = default;
};

/// dst[i] ^= src[i] for i < src.size(); dst must be at least as long as src.
void xor_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src);

/// Throws Error on an empty list or an empty body.
CodedPayload xor_encode(std::span<const Bytes> bodies);

/// Recovers member `my_index` given the bodies of every other member, in
/// member order. Throws DecodeError when side information is missing or its
/// lengths disagree with the payload's recorded lengths.
Bytes xor_decode(const CodedPayload& payload, std::size_t my_index, std::span<const Bytes> side_info);

}  // namespace xcast::coding
