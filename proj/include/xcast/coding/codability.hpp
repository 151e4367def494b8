#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "xcast/types.hpp"

namespace xcast::coding {

/// A client c_i as the coder sees it: wanted set W(c_i) and side information H(c_i).
struct ClientState {
  ClientId client_id = 0;
  SegmentSet wanted;
  SegmentSet cached;

  /// |wanted| <= 1 and wanted and cached are disjoint.
  bool well_formed() const;
};

using ClientTable = std::map<ClientId, ClientState>;

struct CodingMember {
  ClientId client = 0;
  SegmentRef segment;
  Timestamp arrival{};
};

/// Segments XORed into one transmission; members are pairwise codable.
struct CodingSet {
  std::vector<CodingMember> members;

  bool empty() const { return members.empty(); }
  std::size_t size() const { return members.size(); }
  bool contains_client(ClientId client) const;
  bool contains_segment(const SegmentRef& segment) const;
  /// Earliest member arrival; used as the entry's arrival time when merging.
  Timestamp earliest_arrival() const;
  /// Bytes on air for the coded payload: the longest member segment.
  std::uint64_t coded_length() const;
};

/// W(a) subset of H(b) and W(b) subset of H(a), with both wants non-empty.
bool is_codable(const ClientState& a, const ClientState& b);

/// True when `candidate` is pairwise codable with every member of `set`.
/// A member's want is the segment recorded in the set (it may be a proactive
/// guess not yet in the client's W); its side information comes from `clients`.
/// Throws LookupError when a member's client is not in `clients`.
bool extend_codable(const CodingSet& set, const ClientState& candidate, const ClientTable& clients);

/// Greedy partner choice for an incoming request, with the
/// similar-size preference. `request` carries the requester's single want.
///
/// Among queue entries codable with the request, keeps those with the most
/// coded segments, prefers entries whose coded length is within
/// `size_affinity` of the request size, then the earliest arrival, then the
/// lowest queue position. Returns nothing when no entry is codable.
std::optional<std::size_t> select_coding_partner(const ClientState& request,
                                                 std::span<const CodingSet* const> queue,
                                                 const ClientTable& clients, double size_affinity);

std::optional<std::size_t> select_coding_partner(const ClientState& request,
                                                 std::span<const CodingSet> queue,
                                                 const ClientTable& clients, double size_affinity);

/// min(a,b)/max(a,b) >= affinity; zero sizes count as similar.
bool similar_size(std::uint64_t a, std::uint64_t b, double affinity);

}  // namespace xcast::coding
