#include "xcast/coding/xor_codec.hpp"

#include <algorithm>
#include <limits>

namespace xcast::coding {

void xor_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src) {
  if (src.size() > dst.size()) throw Error("xor_into: source longer than destination");
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] ^= src[i];
}

CodedPayload xor_encode(std::span<const Bytes> bodies) {
  if (bodies.empty()) throw Error("xor_encode: no segment bodies");
  CodedPayload out;
  std::size_t longest = 0;
  for (const auto& b : bodies) {
    if (b.empty()) throw Error("xor_encode: empty segment body");
    if (b.size() > std::numeric_limits<std::uint32_t>::max()) throw Error("xor_encode: body too large");
    out.segment_lengths.push_back(static_cast<std::uint32_t>(b.size()));
    longest = std::max(longest, b.size());
  }
  out.body.assign(longest, 0);
  for (const auto& b : bodies) xor_into(out.body, b);
  return out;
}

Bytes xor_decode(const CodedPayload& payload, std::size_t my_index, std::span<const Bytes> side_info) {
  const std::size_t members = payload.segment_lengths.size();
  if (my_index >= members) throw DecodeError("xor_decode: member index out of range");
  if (side_info.size() + 1 != members) {
    throw DecodeError("xor_decode: expected " + std::to_string(members - 1) + " side segments, got " +
                      std::to_string(side_info.size()));
  }
  const std::size_t my_length = payload.segment_lengths[my_index];
  if (my_length > payload.body.size()) throw DecodeError("xor_decode: payload shorter than member length");

  Bytes out(payload.body.begin(), payload.body.begin() + static_cast<std::ptrdiff_t>(my_length));
  std::size_t side = 0;
  for (std::size_t member = 0; member < members; ++member) {
    if (member == my_index) continue;
    const Bytes& body = side_info[side++];
    if (body.size() != payload.segment_lengths[member]) {
      throw DecodeError("xor_decode: side segment " + std::to_string(member) + " has " +
                        std::to_string(body.size()) + " bytes, expected " +
                        std::to_string(payload.segment_lengths[member]));
    }
    const std::size_t overlap = std::min(body.size(), my_length);
    xor_into(out, std::span<const std::uint8_t>(body.data(), overlap));
  }
  return out;
}

}  // namespace xcast::coding
