#include "xcast/coding/matching.hpp"

#include <deque>

namespace xcast::coding {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Edmonds' blossom search for augmenting paths, one root at a time.
class Blossom {
 public:
  explicit Blossom(const std::vector<std::vector<std::size_t>>& adjacency)
      : adj_(adjacency), n_(adjacency.size()), match_(n_, kNone), parent_(n_), base_(n_), used_(n_),
        in_blossom_(n_) {}

  std::vector<std::size_t> run() {
    // Greedy seed in vertex order keeps the result lexicographically biased.
    for (std::size_t v = 0; v < n_; ++v) {
      if (match_[v] != kNone) continue;
      for (std::size_t to : adj_[v]) {
        if (to != v && match_[to] == kNone) {
          match_[v] = to;
          match_[to] = v;
          break;
        }
      }
    }
    for (std::size_t root = 0; root < n_; ++root) {
      if (match_[root] != kNone) continue;
      std::size_t v = find_path(root);
      while (v != kNone) {
        const std::size_t pv = parent_[v];
        const std::size_t ppv = match_[pv];
        match_[v] = pv;
        match_[pv] = v;
        v = ppv;
      }
    }
    return match_;
  }

 private:
  std::size_t lca(std::size_t a, std::size_t b) {
    std::vector<bool> seen(n_, false);
    for (;;) {
      a = base_[a];
      seen[a] = true;
      if (match_[a] == kNone) break;
      a = parent_[match_[a]];
    }
    for (;;) {
      b = base_[b];
      if (seen[b]) return b;
      b = parent_[match_[b]];
    }
  }

  void mark_path(std::size_t v, std::size_t b, std::size_t child) {
    while (base_[v] != b) {
      in_blossom_[base_[v]] = true;
      in_blossom_[base_[match_[v]]] = true;
      parent_[v] = child;
      child = match_[v];
      v = parent_[match_[v]];
    }
  }

  std::size_t find_path(std::size_t root) {
    used_.assign(n_, false);
    parent_.assign(n_, kNone);
    for (std::size_t i = 0; i < n_; ++i) base_[i] = i;
    used_[root] = true;
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t to : adj_[v]) {
        if (to == v || base_[v] == base_[to] || match_[v] == to) continue;
        if (to == root || (match_[to] != kNone && parent_[match_[to]] != kNone)) {
          const std::size_t current = lca(v, to);
          in_blossom_.assign(n_, false);
          mark_path(v, current, to);
          mark_path(to, current, v);
          for (std::size_t i = 0; i < n_; ++i) {
            if (!in_blossom_[base_[i]]) continue;
            base_[i] = current;
            if (!used_[i]) {
              used_[i] = true;
              queue.push_back(i);
            }
          }
        } else if (parent_[to] == kNone) {
          parent_[to] = v;
          if (match_[to] == kNone) return to;
          used_[match_[to]] = true;
          queue.push_back(match_[to]);
        }
      }
    }
    return kNone;
  }

  const std::vector<std::vector<std::size_t>>& adj_;
  std::size_t n_;
  std::vector<std::size_t> match_, parent_, base_;
  std::vector<bool> used_, in_blossom_;
};

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> maximum_matching(
    const std::vector<std::vector<std::size_t>>& adjacency) {
  const auto match = Blossom(adjacency).run();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t v = 0; v < match.size(); ++v) {
    if (match[v] != kNone && v < match[v]) pairs.emplace_back(v, match[v]);
  }
  return pairs;
}

}  // namespace xcast::coding
