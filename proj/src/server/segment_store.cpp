#include "xcast/server/segment_store.hpp"

namespace xcast::server {

void SegmentStore::get(const SegmentRef& ref, OriginSource::Callback done) {
  if (auto it = bodies_.find(ref); it != bodies_.end()) {
    done(it->second, {});
    return;
  }
  auto [waiters, first] = waiting_.try_emplace(ref);
  waiters->second.push_back(std::move(done));
  if (!first) return;
  ++fetches_;
  origin_.fetch(ref, [this, ref](std::optional<Bytes> body, std::string error) {
    if (body && body->size() != ref.size_bytes) {
      error = "origin returned " + std::to_string(body->size()) + " bytes for " + to_string(ref) + ", expected " +
              std::to_string(ref.size_bytes);
      body.reset();
    }
    if (body) bodies_[ref] = *body;
    auto node = waiting_.extract(ref);
    if (node.empty()) return;
    for (auto& cb : node.mapped()) cb(body, error);
  });
}

const Bytes* SegmentStore::find(const SegmentRef& ref) const {
  auto it = bodies_.find(ref);
  return it == bodies_.end() ? nullptr : &it->second;
}

}  // namespace xcast::server
