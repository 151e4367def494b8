#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xcast/types.hpp"

namespace xcast::server {

/// Static description of the video files the server can deliver. Segment
/// indices start at 1.
class Catalog {
 public:
  /// Throws ConfigError on a duplicate file, an empty file or a zero size.
  void add_file(std::uint32_t file_id, std::vector<std::uint32_t> segment_sizes);

  std::optional<SegmentRef> lookup(std::uint32_t file_id, std::uint32_t segment_index) const;
  /// The segment after `ref` in the same file.
  std::optional<SegmentRef> next(const SegmentRef& ref) const;
  std::size_t segment_count(std::uint32_t file_id) const;
  std::vector<std::uint32_t> file_ids() const;
  std::uint32_t max_segment_size() const;

 private:
  std::map<std::uint32_t, std::vector<std::uint32_t>> files_;
};

/// Deterministic stand-in content for f_i^(s): a byte pattern seeded by the
/// segment identity, so origin, server and tests agree without shared state.
Bytes synthetic_segment(const SegmentRef& ref);

/// Where segment bodies come from. `done` gets the body, or nullopt plus a
/// reason. It may run before fetch returns or later on the executor thread.
class OriginSource {
 public:
  using Callback = std::function<void(std::optional<Bytes>, std::string)>;

  virtual ~OriginSource() = default;
  virtual void fetch(const SegmentRef& ref, Callback done) = 0;
};

/// Answers every fetch immediately with synthetic_segment.
class SyntheticOrigin : public OriginSource {
 public:
  void fetch(const SegmentRef& ref, Callback done) override;
  std::size_t fetches() const { return fetches_; }

 private:
  std::size_t fetches_ = 0;
};

}  // namespace xcast::server
