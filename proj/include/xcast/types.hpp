#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace xcast {

using Bytes = std::vector<std::uint8_t>;
using ClientId = std::uint32_t;
using Duration = std::chrono::nanoseconds;

/// Time since the start of a run, virtual or wall clock depending on the executor.
using Timestamp = std::chrono::nanoseconds;

/// One segment f_i^(s) of a video file.
///
/// Equality and ordering use the (file_id, segment_index) identity only, so a
/// reference built from a request (size unknown) still finds the catalog entry.
struct SegmentRef {
  std::uint32_t file_id = 0;
  std::uint32_t segment_index = 0;
  std::uint32_t size_bytes = 0;

  friend bool operator==(const SegmentRef& a, const SegmentRef& b) noexcept {
    return a.file_id == b.file_id && a.segment_index == b.segment_index;
  }
  friend std::strong_ordering operator<=>(const SegmentRef& a, const SegmentRef& b) noexcept {
    if (auto c = a.file_id <=> b.file_id; c != 0) return c;
    return a.segment_index <=> b.segment_index;
  }
};

using SegmentSet = std::set<SegmentRef>;

/// "f1^2" style label used in logs and traces.
std::string to_string(const SegmentRef& ref);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An id (client, segment, entry) that the caller expected to exist does not.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// XOR decode could not reconstruct a segment from the supplied side information.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// A peer violated the message exchange (non-member report, bad sequence, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace xcast
