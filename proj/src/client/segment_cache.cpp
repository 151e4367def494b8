#include "xcast/client/segment_cache.hpp"

namespace xcast::client {

void SegmentCache::insert(const SegmentRef& ref, Bytes body) {
  if (body.size() != ref.size_bytes) {
    throw Error("cache insert of " + to_string(ref) + ": body has " + std::to_string(body.size()) +
                " bytes, expected " + std::to_string(ref.size_bytes));
  }
  if (auto it = entries_.find(ref); it != entries_.end()) {
    if (it->second != body) throw Error("cache already holds different bytes for " + to_string(ref));
    return;
  }
  if (capacity_ - used_ < body.size()) throw Error("segment cache full inserting " + to_string(ref));
  used_ += body.size();
  entries_.emplace(ref, std::move(body));
}

const Bytes* SegmentCache::find(const SegmentRef& ref) const {
  auto it = entries_.find(ref);
  return it == entries_.end() ? nullptr : &it->second;
}

const SegmentRef* SegmentCache::stored_ref(const SegmentRef& ref) const {
  auto it = entries_.find(ref);
  return it == entries_.end() ? nullptr : &it->first;
}

std::vector<SegmentRef> SegmentCache::refs() const {
  std::vector<SegmentRef> out;
  out.reserve(entries_.size());
  for (const auto& [ref, body] : entries_) out.push_back(ref);
  return out;
}

}  // namespace xcast::client
