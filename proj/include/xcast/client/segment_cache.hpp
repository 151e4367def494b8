#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "xcast/types.hpp"

namespace xcast::client {

/// The client's side information H(c). No eviction: capacity is sized to the run.
class SegmentCache {
 public:
  explicit SegmentCache(std::uint64_t capacity_bytes = std::numeric_limits<std::uint64_t>::max())
      : capacity_(capacity_bytes) {}

  /// Throws Error when the body length differs from ref.size_bytes or the
  /// cache would overflow. Re-inserting an identical entry is a no-op.
  void insert(const SegmentRef& ref, Bytes body);
  const Bytes* find(const SegmentRef& ref) const;
  bool contains(const SegmentRef& ref) const { return entries_.contains(ref); }
  /// The stored reference, which carries the size.
  const SegmentRef* stored_ref(const SegmentRef& ref) const;

  std::vector<SegmentRef> refs() const;
  std::size_t count() const { return entries_.size(); }
  std::uint64_t used_bytes() const { return used_; }
  std::uint64_t capacity() const { return capacity_; }

 private:
  std::uint64_t capacity_;
  std::uint64_t used_ = 0;
  std::map<SegmentRef, Bytes> entries_;
};

}  // namespace xcast::client
