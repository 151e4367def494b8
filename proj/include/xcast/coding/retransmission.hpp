#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "xcast/types.hpp"

namespace xcast::coding {

/// One vertex of the retransmission graph: a packet a client failed to receive.
struct LostPacket {
  ClientId client = 0;
  std::uint16_t seq = 0;

  friend auto operator<=>(const LostPacket&, const LostPacket&) = default;
};

/// Undirected graph over lost packets. v_i and v_j are adjacent when the
/// client missing v_i holds v_j and the client missing v_j holds v_i, so any
/// clique can be repaired with one XOR emission.
class RetransmissionGraph {
 public:
  RetransmissionGraph() = default;
  explicit RetransmissionGraph(std::vector<LostPacket> vertices);

  /// Throws Error on a self loop or an out-of-range vertex. Idempotent.
  void add_edge(std::size_t a, std::size_t b);
  bool adjacent(std::size_t a, std::size_t b) const;

  std::size_t size() const { return vertices_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<LostPacket>& vertices() const { return vertices_; }
  const LostPacket& vertex(std::size_t i) const { return vertices_.at(i); }
  std::vector<std::size_t> neighbours(std::size_t v) const;

 private:
  std::size_t words_ = 0;
  std::vector<LostPacket> vertices_;
  std::vector<std::uint64_t> bits_;  // row-major adjacency bitset
  std::size_t edge_count_ = 0;
};

/// Missing sequence numbers per reporting client.
using LossReports = std::map<ClientId, std::set<std::uint16_t>>;

/// Vertices in ascending (client, seq) order. Throws ProtocolError when a
/// report comes from a client outside the segment group.
RetransmissionGraph build_retransmission_graph(const LossReports& reports,
                                               const std::set<ClientId>& group_members);

/// Vertex partition for retransmission: 3-cliques first (lexicographic
/// scan), then a maximum matching of the residue, then singletons. Each inner
/// list is a clique in ascending vertex order.
std::vector<std::vector<std::size_t>> plan_retransmission_groups(const RetransmissionGraph& graph);

struct CodedRetransmission {
  std::vector<LostPacket> served;  // ascending; coded degree = served.size()
  Bytes body;                      // XOR of the served packets, zero padded
};

/// The partition above with packet bodies attached. Throws LookupError when a body is missing.
std::vector<CodedRetransmission> plan_retransmissions(const RetransmissionGraph& graph,
                                                      const std::map<std::uint16_t, Bytes>& packet_bodies);

}  // namespace xcast::coding
