#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "openxor/fixpoint.hpp"
#include "openxor/rng.hpp"

namespace testing {

using namespace openxor;
using namespace openxor::fixpoint;

// Compositions of n into parts 1 and 2, counted by explicit recursion.
inline std::uint64_t count_climbs(std::size_t n) {
  if (n <= 1) return 1;
  return count_climbs(n - 1) + count_climbs(n - 2);
}

inline Graph random_graph(Xoshiro256& rng, std::size_t max_vertices, bool negative_weights) {
  Graph g;
  g.vertices = 1 + static_cast<std::size_t>(rng.below(max_vertices));
  const std::size_t m = static_cast<std::size_t>(rng.below(3 * g.vertices + 1));
  for (std::size_t e = 0; e < m; ++e) {
    const double w = negative_weights ? static_cast<double>(rng.below(13)) - 2.0 : 1.0 + static_cast<double>(rng.below(9));
    g.edges.push_back({static_cast<std::size_t>(rng.below(g.vertices)), static_cast<std::size_t>(rng.below(g.vertices)), w});
  }
  return g;
}

// Shortest distances as the minimum over all simple paths, plus whether any
// cycle reachable from the source has negative total weight (found by
// extending simple paths with the edge that closes a cycle).
struct PathOracle {
  std::vector<double> dist;
  bool negative_cycle = false;
};

inline PathOracle all_simple_paths(const Graph& g, std::size_t source) {
  PathOracle o;
  o.dist.assign(g.vertices, kUnreachable);
  std::vector<bool> on_path(g.vertices, false);
  std::vector<std::size_t> path;
  std::vector<double> prefix;  // prefix[i] = weight from source to path[i]
  std::function<void(std::size_t, double)> walk = [&](std::size_t v, double d) {
    o.dist[v] = std::min(o.dist[v], d);
    on_path[v] = true;
    path.push_back(v);
    prefix.push_back(d);
    for (const auto& e : g.edges) {
      if (e.from != v) continue;
      if (on_path[e.to]) {
        const auto at = std::find(path.begin(), path.end(), e.to) - path.begin();
        if (d + e.weight - prefix[at] < 0) o.negative_cycle = true;
        continue;
      }
      walk(e.to, d + e.weight);
    }
    on_path[v] = false;
    path.pop_back();
    prefix.pop_back();
  };
  walk(source, 0.0);
  return o;
}

inline std::vector<std::size_t> closure_oracle(const Graph& g, std::size_t source) {
  // Warshall on the adjacency matrix, reflexive.
  std::vector<std::vector<bool>> reach(g.vertices, std::vector<bool>(g.vertices, false));
  for (std::size_t v = 0; v < g.vertices; ++v) reach[v][v] = true;
  for (const auto& e : g.edges) reach[e.from][e.to] = true;
  for (std::size_t k = 0; k < g.vertices; ++k)
    for (std::size_t i = 0; i < g.vertices; ++i)
      for (std::size_t j = 0; j < g.vertices; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < g.vertices; ++v)
    if (reach[source][v]) out.push_back(v);
  return out;
}

}  // namespace testing
