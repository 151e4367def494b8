#include "xcast/coding/codability.hpp"

#include <algorithm>

namespace xcast::coding {

namespace {

bool subset_of(const SegmentSet& small, const SegmentSet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

bool ClientState::well_formed() const {
  if (wanted.size() > 1) return false;
  return std::none_of(wanted.begin(), wanted.end(),
                      [&](const SegmentRef& w) { return cached.contains(w); });
}

bool CodingSet::contains_client(ClientId client) const {
  return std::any_of(members.begin(), members.end(),
                     [&](const CodingMember& m) { return m.client == client; });
}

bool CodingSet::contains_segment(const SegmentRef& segment) const {
  return std::any_of(members.begin(), members.end(),
                     [&](const CodingMember& m) { return m.segment == segment; });
}

Timestamp CodingSet::earliest_arrival() const {
  Timestamp earliest = Timestamp::max();
  for (const auto& m : members) earliest = std::min(earliest, m.arrival);
  return earliest;
}

std::uint64_t CodingSet::coded_length() const {
  std::uint64_t longest = 0;
  for (const auto& m : members) longest = std::max<std::uint64_t>(longest, m.segment.size_bytes);
  return longest;
}

bool is_codable(const ClientState& a, const ClientState& b) {
  if (a.wanted.empty() || b.wanted.empty()) return false;
  return subset_of(a.wanted, b.cached) && subset_of(b.wanted, a.cached);
}

bool extend_codable(const CodingSet& set, const ClientState& candidate, const ClientTable& clients) {
  if (candidate.wanted.empty()) return false;
  bool ok = true;
  for (const auto& member : set.members) {
    auto it = clients.find(member.client);
    if (it == clients.end()) {
      throw LookupError("coding set member " + std::to_string(member.client) + " is not a known client");
    }
    if (!ok) continue;  // keep scanning so unknown members always surface
    const ClientState& holder = it->second;
    if (member.client == candidate.client_id || candidate.wanted.contains(member.segment)) {
      ok = false;
      continue;
    }
    ok = subset_of(candidate.wanted, holder.cached) && candidate.cached.contains(member.segment);
  }
  return ok;
}

bool similar_size(std::uint64_t a, std::uint64_t b, double affinity) {
  if (a == 0 || b == 0) return true;
  const auto lo = static_cast<double>(std::min(a, b));
  const auto hi = static_cast<double>(std::max(a, b));
  return lo / hi >= affinity;
}

std::optional<std::size_t> select_coding_partner(const ClientState& request,
                                                 std::span<const CodingSet* const> queue,
                                                 const ClientTable& clients, double size_affinity) {
  if (request.wanted.empty()) return std::nullopt;
  const std::uint64_t request_size = request.wanted.begin()->size_bytes;

  struct Candidate {
    std::size_t index;
    std::size_t coded_count;
    bool similar;
    Timestamp arrival;
  };
  std::optional<Candidate> best;
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.coded_count != b.coded_count) return a.coded_count > b.coded_count;
    if (a.similar != b.similar) return a.similar;
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    return a.index < b.index;
  };

  for (std::size_t i = 0; i < queue.size(); ++i) {
    const CodingSet& entry = *queue[i];
    if (entry.empty() || !extend_codable(entry, request, clients)) continue;
    Candidate c{i, entry.size(), similar_size(request_size, entry.coded_length(), size_affinity),
                entry.earliest_arrival()};
    if (!best || better(c, *best)) best = c;
  }
  if (!best) return std::nullopt;
  return best->index;
}

std::optional<std::size_t> select_coding_partner(const ClientState& request,
                                                 std::span<const CodingSet> queue,
                                                 const ClientTable& clients, double size_affinity) {
  std::vector<const CodingSet*> view;
  view.reserve(queue.size());
  for (const auto& entry : queue) view.push_back(&entry);
  return select_coding_partner(request, std::span<const CodingSet* const>(view), clients, size_affinity);
}

}  // namespace xcast::coding
