#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace xcast::coding {

/// Maximum-cardinality matching on a general graph (Edmonds' blossom
/// algorithm). `adjacency[v]` lists the neighbours of v; lists should be
/// sorted for lexicographic tie-breaking. Returns matched pairs (a < b) in
/// ascending order of a.
std::vector<std::pair<std::size_t, std::size_t>> maximum_matching(
    const std::vector<std::vector<std::size_t>>& adjacency);

}  // namespace xcast::coding
