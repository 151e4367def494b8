#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "xcast/types.hpp"

namespace xcast::wire {

/// Splits a byte stream (TCP control channel) into length-prefixed frames.
class FrameAssembler {
 public:
  static constexpr std::uint32_t kDefaultMaxBody = 128U << 20;

  explicit FrameAssembler(std::uint32_t max_body = kDefaultMaxBody) : max_body_(max_body) {}

  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete frame (prefix included). Throws WireError when a prefix
  /// announces a body larger than max_body.
  std::optional<Bytes> next();
  std::size_t buffered() const { return buffer_.size() - consumed_; }

 private:
  std::uint32_t max_body_;
  Bytes buffer_;
  std::size_t consumed_ = 0;
};

}  // namespace xcast::wire
