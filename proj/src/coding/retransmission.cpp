#include "xcast/coding/retransmission.hpp"

#include <algorithm>

#include "xcast/coding/matching.hpp"
#include "xcast/coding/xor_codec.hpp"

namespace xcast::coding {

RetransmissionGraph::RetransmissionGraph(std::vector<LostPacket> vertices)
    : words_((vertices.size() + 63) / 64), vertices_(std::move(vertices)),
      bits_(vertices_.size() * words_, 0) {}

void RetransmissionGraph::add_edge(std::size_t a, std::size_t b) {
  if (a >= size() || b >= size()) throw Error("retransmission graph: vertex out of range");
  if (a == b) throw Error("retransmission graph: self loop");
  if (adjacent(a, b)) return;
  bits_[a * words_ + b / 64] |= std::uint64_t{1} << (b % 64);
  bits_[b * words_ + a / 64] |= std::uint64_t{1} << (a % 64);
  ++edge_count_;
}

bool RetransmissionGraph::adjacent(std::size_t a, std::size_t b) const {
  if (a >= size() || b >= size()) return false;
  return (bits_[a * words_ + b / 64] >> (b % 64)) & 1U;
}

std::vector<std::size_t> RetransmissionGraph::neighbours(std::size_t v) const {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < size(); ++u) {
    if (adjacent(v, u)) out.push_back(u);
  }
  return out;
}

RetransmissionGraph build_retransmission_graph(const LossReports& reports,
                                               const std::set<ClientId>& group_members) {
  std::vector<LostPacket> vertices;
  for (const auto& [client, lost] : reports) {
    if (!group_members.contains(client)) {
      throw ProtocolError("loss report from client " + std::to_string(client) + " outside the segment group");
    }
    for (std::uint16_t seq : lost) vertices.push_back({client, seq});
  }
  // map + set iteration already yields ascending (client, seq)
  RetransmissionGraph graph(vertices);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto& lost_i = reports.at(vertices[i].client);
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      if (vertices[i].client == vertices[j].client) continue;
      const auto& lost_j = reports.at(vertices[j].client);
      if (!lost_i.contains(vertices[j].seq) && !lost_j.contains(vertices[i].seq)) graph.add_edge(i, j);
    }
  }
  return graph;
}

std::vector<std::vector<std::size_t>> plan_retransmission_groups(const RetransmissionGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<bool> alive(n, true);
  std::vector<std::vector<std::size_t>> groups;

  // Triangle extraction never creates new triangles, so one lexicographic pass
  // finds the same sequence as restarting the scan after every removal.
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    bool taken = false;
    for (std::size_t j = i + 1; j < n && !taken; ++j) {
      if (!alive[j] || !graph.adjacent(i, j)) continue;
      for (std::size_t k = j + 1; k < n; ++k) {
        if (alive[k] && graph.adjacent(i, k) && graph.adjacent(j, k)) {
          groups.push_back({i, j, k});
          alive[i] = alive[j] = alive[k] = false;
          taken = true;
          break;
        }
      }
    }
  }

  std::vector<std::size_t> residual;
  std::vector<std::size_t> local(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (alive[v]) {
      local[v] = residual.size();
      residual.push_back(v);
    }
  }
  std::vector<std::vector<std::size_t>> adjacency(residual.size());
  for (std::size_t a = 0; a < residual.size(); ++a) {
    for (std::size_t b = 0; b < residual.size(); ++b) {
      if (a != b && graph.adjacent(residual[a], residual[b])) adjacency[a].push_back(b);
    }
  }
  for (const auto& [a, b] : maximum_matching(adjacency)) {
    groups.push_back({residual[a], residual[b]});
    alive[residual[a]] = alive[residual[b]] = false;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (alive[v]) groups.push_back({v});
  }
  return groups;
}

std::vector<CodedRetransmission> plan_retransmissions(const RetransmissionGraph& graph,
                                                      const std::map<std::uint16_t, Bytes>& packet_bodies) {
  std::vector<CodedRetransmission> out;
  for (const auto& group : plan_retransmission_groups(graph)) {
    CodedRetransmission emission;
    std::size_t longest = 0;
    for (std::size_t v : group) {
      const LostPacket& packet = graph.vertex(v);
      auto it = packet_bodies.find(packet.seq);
      if (it == packet_bodies.end()) {
        throw LookupError("no body for retransmitted packet " + std::to_string(packet.seq));
      }
      longest = std::max(longest, it->second.size());
      emission.served.push_back(packet);
    }
    emission.body.assign(longest, 0);
    for (const auto& packet : emission.served) xor_into(emission.body, packet_bodies.at(packet.seq));
    out.push_back(std::move(emission));
  }
  return out;
}

}  // namespace xcast::coding
