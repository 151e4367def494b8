#include "xcast/server/catalog.hpp"

#include <algorithm>

namespace xcast::server {

void Catalog::add_file(std::uint32_t file_id, std::vector<std::uint32_t> segment_sizes) {
  if (files_.contains(file_id)) throw ConfigError("duplicate file " + std::to_string(file_id));
  if (segment_sizes.empty()) throw ConfigError("file " + std::to_string(file_id) + " has no segments");
  if (std::find(segment_sizes.begin(), segment_sizes.end(), 0U) != segment_sizes.end()) {
    throw ConfigError("file " + std::to_string(file_id) + " has an empty segment");
  }
  files_.emplace(file_id, std::move(segment_sizes));
}

std::optional<SegmentRef> Catalog::lookup(std::uint32_t file_id, std::uint32_t segment_index) const {
  auto it = files_.find(file_id);
  if (it == files_.end() || segment_index == 0 || segment_index > it->second.size()) return std::nullopt;
  return SegmentRef{file_id, segment_index, it->second[segment_index - 1]};
}

std::optional<SegmentRef> Catalog::next(const SegmentRef& ref) const {
  return lookup(ref.file_id, ref.segment_index + 1);
}

std::size_t Catalog::segment_count(std::uint32_t file_id) const {
  auto it = files_.find(file_id);
  return it == files_.end() ? 0 : it->second.size();
}

std::vector<std::uint32_t> Catalog::file_ids() const {
  std::vector<std::uint32_t> ids;
  for (const auto& [id, sizes] : files_) ids.push_back(id);
  return ids;
}

std::uint32_t Catalog::max_segment_size() const {
  std::uint32_t m = 0;
  for (const auto& [id, sizes] : files_) m = std::max(m, *std::max_element(sizes.begin(), sizes.end()));
  return m;
}

Bytes synthetic_segment(const SegmentRef& ref) {
  Bytes body(ref.size_bytes);
  // splitmix64 stream keyed by the segment identity
  std::uint64_t state = (std::uint64_t{ref.file_id} << 32) ^ ref.segment_index ^ 0x5851f42d4c957f2dULL;
  for (std::size_t i = 0; i < body.size(); i += 8) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    for (std::size_t k = 0; k < 8 && i + k < body.size(); ++k) body[i + k] = static_cast<std::uint8_t>(z >> (8 * k));
  }
  return body;
}

void SyntheticOrigin::fetch(const SegmentRef& ref, Callback done) {
  ++fetches_;
  done(synthetic_segment(ref), {});
}

}  // namespace xcast::server
