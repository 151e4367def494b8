#include "xcast/wire/frame.hpp"

#include "xcast/wire/messages.hpp"

namespace xcast::wire {

void FrameAssembler::feed(std::span<const std::uint8_t> bytes) {
  if (consumed_ > 0 && consumed_ == buffer_.size()) {
    buffer_.clear();
    consumed_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Bytes> FrameAssembler::next() {
  if (buffered() < 4) return std::nullopt;
  const std::uint8_t* p = buffer_.data() + consumed_;
  const std::uint32_t length = std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 | std::uint32_t{p[2]} << 8 | p[3];
  if (length > max_body_) {
    throw WireError(WireError::Kind::malformed, 0, "frame length " + std::to_string(length) + " above limit");
  }
  if (buffered() < 4 + static_cast<std::size_t>(length)) return std::nullopt;
  Bytes frame(buffer_.begin() + static_cast<std::ptrdiff_t>(consumed_),
              buffer_.begin() + static_cast<std::ptrdiff_t>(consumed_ + 4 + length));
  consumed_ += 4 + length;
  // compact once the dead prefix dominates
  if (consumed_ > 1 << 16 && consumed_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(consumed_));
    consumed_ = 0;
  }
  return frame;
}

}  // namespace xcast::wire
