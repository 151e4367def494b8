#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "xcast/coding/matching.hpp"
#include "xcast/coding/retransmission.hpp"
#include "xcast/coding/xor_codec.hpp"

using namespace xcast;
using namespace xcast::coding;

namespace {

oracle::Adjacency to_matrix(const RetransmissionGraph& g) {
  oracle::Adjacency adj(g.size(), std::vector<bool>(g.size(), false));
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t b = 0; b < g.size(); ++b) adj[a][b] = g.adjacent(a, b);
  }
  return adj;
}

RetransmissionGraph abstract_graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<LostPacket> vertices;
  for (std::size_t i = 0; i < n; ++i) vertices.push_back({static_cast<ClientId>(i + 1), static_cast<std::uint16_t>(i)});
  RetransmissionGraph g(vertices);
  for (auto [a, b] : edges) g.add_edge(a, b);
  return g;
}

std::map<std::uint16_t, Bytes> bodies_for(const RetransmissionGraph& g, std::mt19937_64& rng) {
  std::map<std::uint16_t, Bytes> bodies;
  for (const auto& v : g.vertices()) {
    if (!bodies.contains(v.seq)) bodies[v.seq] = oracle::random_bytes(rng, 1 + rng() % 64);
  }
  return bodies;
}

// Mutual-reception predicate evaluated straight from the reports.
bool oracle_edge(const LossReports& reports, const LostPacket& a, const LostPacket& b) {
  if (a.client == b.client) return false;
  const auto& lost_a = reports.at(a.client);
  const auto& lost_b = reports.at(b.client);
  return lost_a.find(b.seq) == lost_a.end() && lost_b.find(a.seq) == lost_b.end();
}

}  // namespace

TEST_CASE("build_retransmission_graph: examples") {
  SUBCASE("two clients each missing a different packet") {
    const LossReports reports{{1, {1}}, {2, {2}}, {3, {}}};
    const auto g = build_retransmission_graph(reports, {1, 2, 3});
    CHECK(g.size() == 2);
    CHECK(g.edge_count() == 1);
  }
  SUBCASE("a client cannot supply its own losses") {
    const auto g = build_retransmission_graph({{1, {1, 2}}}, {1});
    CHECK(g.size() == 2);
    CHECK(g.edge_count() == 0);
  }
  SUBCASE("same packet lost by two clients") {
    const LossReports reports{{1, {1}}, {2, {1}}};
    const auto g = build_retransmission_graph(reports, {1, 2});
    CHECK(g.size() == 2);
    CHECK(oracle_edge(reports, g.vertex(0), g.vertex(1)) == false);
    CHECK(g.edge_count() == 0);
  }
}

TEST_CASE("build_retransmission_graph: report from a non-member") {
  CHECK_THROWS_AS(build_retransmission_graph({{7, {1}}}, {1, 2}), ProtocolError);
}

TEST_CASE("build_retransmission_graph: vertices ascending and edges match the oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    LossReports reports;
    std::set<ClientId> group;
    for (ClientId c = 1; c <= 5; ++c) {
      group.insert(c);
      for (std::uint16_t p = 0; p < 6; ++p) {
        if (rng() % 4 == 0) reports[c].insert(p);
      }
    }
    const auto g = build_retransmission_graph(reports, group);
    CHECK(std::is_sorted(g.vertices().begin(), g.vertices().end()));
    for (std::size_t a = 0; a < g.size(); ++a) {
      CHECK_FALSE(g.adjacent(a, a));
      for (std::size_t b = 0; b < g.size(); ++b) {
        if (a != b) CHECK(g.adjacent(a, b) == oracle_edge(reports, g.vertex(a), g.vertex(b)));
      }
    }
  }
}

TEST_CASE("RetransmissionGraph rejects self loops") {
  auto g = abstract_graph(2, {});
  CHECK_THROWS_AS(g.add_edge(1, 1), Error);
  CHECK_THROWS_AS(g.add_edge(0, 5), Error);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  CHECK(g.edge_count() == 1);
}

TEST_CASE("plan_retransmissions: examples") {
  std::mt19937_64 rng(1);
  SUBCASE("triangle is one three-way XOR") {
    const auto g = abstract_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    const auto out = plan_retransmissions(g, bodies_for(g, rng));
    REQUIRE(out.size() == 1);
    CHECK(out[0].served.size() == 3);
  }
  SUBCASE("no edges means every packet goes out alone") {
    const auto g = abstract_graph(5, {});
    const auto out = plan_retransmissions(g, bodies_for(g, rng));
    CHECK(out.size() == 5);
    for (const auto& e : out) CHECK(e.served.size() == 1);
  }
  SUBCASE("path v1-v2-v3 is one pair plus one single, which is optimal") {
    const auto g = abstract_graph(3, {{0, 1}, {1, 2}});
    CHECK(oracle::min_clique_cover(to_matrix(g)) == 2);
    const auto out = plan_retransmissions(g, bodies_for(g, rng));
    REQUIRE(out.size() == 2);
    CHECK(out[0].served.size() == 2);
    CHECK(out[1].served.size() == 1);
  }
  SUBCASE("two clients, one lost packet each: exactly one transmission") {
    const LossReports reports{{1, {1}}, {2, {2}}, {3, {}}};
    const auto g = build_retransmission_graph(reports, {1, 2, 3});
    const std::map<std::uint16_t, Bytes> bodies{{1, Bytes{0xAA, 0x01}}, {2, Bytes{0x55}}};
    const auto out = plan_retransmissions(g, bodies);
    REQUIRE(out.size() == 1);
    CHECK(out[0].body == Bytes{0xFF, 0x01});
  }
}

TEST_CASE("plan_retransmissions: lexicographically first triangle is taken first") {
  // K4 on {0,1,2,3}: the first triangle is {0,1,2}; 3 is left alone.
  const auto g = abstract_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  const auto groups = plan_retransmission_groups(g);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(groups[1] == std::vector<std::size_t>{3});
}

TEST_CASE("plan_retransmissions: missing body") {
  const auto g = abstract_graph(2, {{0, 1}});
  CHECK_THROWS_AS(plan_retransmissions(g, {{0, Bytes{1}}}), LookupError);
}

TEST_CASE("maximum_matching agrees with exhaustive search") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = 1 + rng() % 10;
    const int density = 1 + static_cast<int>(rng() % 5);
    std::vector<std::vector<std::size_t>> adjacency(n);
    oracle::Adjacency adj(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (static_cast<int>(rng() % 6) < density) {
          adjacency[a].push_back(b);
          adjacency[b].push_back(a);
          adj[a][b] = adj[b][a] = true;
        }
      }
    }
    for (auto& l : adjacency) std::sort(l.begin(), l.end());
    const auto matching = maximum_matching(adjacency);
    CHECK(static_cast<int>(matching.size()) == oracle::max_matching_size(adj));
    std::set<std::size_t> used;
    for (auto [a, b] : matching) {
      CHECK(a < b);
      CHECK(adj[a][b]);
      CHECK(used.insert(a).second);
      CHECK(used.insert(b).second);
    }
  }
}

TEST_CASE("maximum_matching handles an odd cycle (blossom)") {
  // 5-cycle plus a pendant vertex hanging off vertex 0: perfect matching of size 3.
  std::vector<std::vector<std::size_t>> adjacency{{1, 4, 5}, {0, 2}, {1, 3}, {2, 4}, {0, 3}, {0}};
  CHECK(maximum_matching(adjacency).size() == 3);
}

TEST_CASE("retransmission completeness and decodability on random loss reports") {
  std::mt19937_64 rng(31);
  int checked = 0;
  while (checked < 2000) {
    LossReports reports;
    std::set<ClientId> group;
    std::size_t vertices = 0;
    const ClientId clients = 2 + static_cast<ClientId>(rng() % 4);
    const std::uint16_t packets = static_cast<std::uint16_t>(2 + rng() % 8);
    for (ClientId c = 1; c <= clients; ++c) {
      group.insert(c);
      for (std::uint16_t p = 0; p < packets; ++p) {
        if (rng() % 3 == 0 && vertices < 12) {
          reports[c].insert(p);
          ++vertices;
        }
      }
    }
    const auto g = build_retransmission_graph(reports, group);
    std::map<std::uint16_t, Bytes> bodies;
    for (std::uint16_t p = 0; p < packets; ++p) bodies[p] = oracle::random_bytes(rng, 1 + rng() % 32);
    const auto out = plan_retransmissions(g, bodies);

    std::multiset<LostPacket> served;
    for (const auto& e : out) {
      REQUIRE_FALSE(e.served.empty());
      CHECK(e.served.size() <= 3);
      for (const auto& target : e.served) {
        served.insert(target);
        // the served client must hold every other packet in the emission
        Bytes recovered = e.body;
        for (const auto& other : e.served) {
          if (other == target) continue;
          CHECK(reports.at(target.client).count(other.seq) == 0);
          const auto& body = bodies.at(other.seq);
          for (std::size_t i = 0; i < body.size(); ++i) recovered[i] ^= body[i];
        }
        recovered.resize(bodies.at(target.seq).size());
        CHECK(recovered == bodies.at(target.seq));
      }
    }
    CHECK(served.size() == g.size());
    CHECK(std::multiset<LostPacket>(g.vertices().begin(), g.vertices().end()) == served);
    CHECK(out.size() <= g.size());
    if (g.size() <= 8) CHECK(static_cast<int>(out.size()) >= oracle::min_clique_cover(to_matrix(g)));
    ++checked;
  }
}

TEST_CASE("plan_retransmission_groups is deterministic") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 12;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (rng() % 2) edges.emplace_back(a, b);
      }
    }
    const auto g = abstract_graph(n, edges);
    CHECK(plan_retransmission_groups(g) == plan_retransmission_groups(g));
  }
}
