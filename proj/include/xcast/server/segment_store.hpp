#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xcast/server/catalog.hpp"

namespace xcast::server {

/// Server-side cache of segment bodies in front of the origin. Concurrent
/// requests for one segment share a single fetch. Bodies are kept forever.
class SegmentStore {
 public:
  explicit SegmentStore(OriginSource& origin) : origin_(origin) {}

  /// Calls `done` with the body, fetching it first if needed. A body whose
  /// length differs from ref.size_bytes is reported as a failure.
  void get(const SegmentRef& ref, OriginSource::Callback done);
  const Bytes* find(const SegmentRef& ref) const;
  bool contains(const SegmentRef& ref) const { return bodies_.contains(ref); }

  std::size_t origin_fetches() const { return fetches_; }

 private:
  OriginSource& origin_;
  std::map<SegmentRef, Bytes> bodies_;
  std::map<SegmentRef, std::vector<OriginSource::Callback>> waiting_;
  std::size_t fetches_ = 0;
};

}  // namespace xcast::server
