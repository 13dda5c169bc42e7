#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "openxor/fixpoint.hpp"
#include "openxor/rng.hpp"
#include "oracles.hpp"

using namespace openxor;
using namespace openxor::fixpoint;
using namespace testing;

TEST_CASE("stairs fixed point matches path enumeration") {
  CHECK(dp_stairs(10) == 89);
  CHECK(dp_stairs(0) == 1);
  CHECK(dp_stairs(1) == 1);
  for (std::size_t n = 0; n <= 25; ++n) CHECK(dp_stairs(n) == count_climbs(n));
  CHECK(dp_stairs(92) == 12200160415121876738ULL);
  CHECK_THROWS_AS(dp_stairs(93), std::out_of_range);
}

TEST_CASE("stairs iterates settle one entry per application") {
  const std::size_t n = 10;
  std::vector<std::vector<std::uint64_t>> seen;
  const auto res = iterate<std::vector<std::uint64_t>>(stairs_system(n), std::vector<std::uint64_t>(n + 1, 0),
                                                       [&](std::size_t, const auto& x) { seen.push_back(x); });
  CHECK(res.converged);
  CHECK(res.iterations == seen.size());
  // Monotone: each iterate dominates the previous one entrywise.
  for (std::size_t t = 1; t < seen.size(); ++t)
    for (std::size_t i = 0; i <= n; ++i) CHECK(seen[t][i] >= seen[t - 1][i]);
}

TEST_CASE("halving contraction converges within 40 steps at eps 1e-9") {
  const OperatorSystem<double> halve{[](const double& x) { return x / 2; }, within(1e-9), 100};
  const auto res = iterate(halve, 1.0);
  CHECK(res.converged);
  CHECK(res.iterations <= 40);
  CHECK(std::abs(res.fixed_point) < 1e-9);
}

TEST_CASE("affine contraction errors shrink geometrically") {
  for (double lambda : {0.1, 0.5, 0.9, -0.7}) {
    const double offset = 3.0;
    const double star = offset / (1 - lambda);
    const double x0 = -20.0;
    const auto sys = affine_contraction(lambda, offset, 1e-12);
    double previous = std::abs(x0 - star);
    const double initial = previous;
    const auto res = iterate<double>(sys, x0, [&](std::size_t t, double x) {
      const double err = std::abs(x - star);
      if (previous > 1e-6) CHECK(err / previous <= std::abs(lambda) + 1e-6);
      CHECK(err <= std::pow(std::abs(lambda), static_cast<double>(t)) * initial + 1e-9);
      previous = err;
    });
    CHECK(res.converged);
    CHECK(std::abs(res.fixed_point - star) < 1e-9);
  }
  CHECK_THROWS_AS(affine_contraction(1.0, 0.0, 1e-9), std::invalid_argument);
}

TEST_CASE("iterate reports non-convergence within the budget") {
  const OperatorSystem<double> grow{[](const double& x) { return x + 1; }, within(1e-9), 5};
  const auto res = iterate(grow, 0.0);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 5);
  CHECK(res.fixed_point == 5.0);
}

TEST_CASE("Bellman-Ford equals the all-simple-paths oracle on random graphs") {
  Xoshiro256 rng(301);
  int cycles = 0;
  for (int round = 0; round < 200; ++round) {
    const Graph g = random_graph(rng, 8, true);
    const std::size_t source = static_cast<std::size_t>(rng.below(g.vertices));
    const auto oracle = all_simple_paths(g, source);
    if (oracle.negative_cycle) {
      ++cycles;
      CHECK_THROWS_AS(bellman_ford(g, source), NegativeCycle);
      continue;
    }
    const auto dist = bellman_ford(g, source);
    REQUIRE(dist.size() == g.vertices);
    for (std::size_t v = 0; v < g.vertices; ++v) CHECK(dist[v] == oracle.dist[v]);
  }
  CHECK(cycles > 0);
  CHECK(cycles < 200);
}

TEST_CASE("Bellman-Ford on a hand-built graph") {
  // 0 -> 1 (4), 0 -> 2 (1), 2 -> 1 (2), 1 -> 3 (1); vertex 4 unreachable.
  Graph g{5, {{0, 1, 4}, {0, 2, 1}, {2, 1, 2}, {1, 3, 1}, {4, 0, 1}}};
  const auto dist = bellman_ford(g, 0);
  CHECK(dist == std::vector<double>{0, 3, 1, 4, kUnreachable});
  g.edges.push_back({3, 2, -5});  // cycle 2 -> 1 -> 3 -> 2 weighs -2
  CHECK_THROWS_AS(bellman_ford(g, 0), NegativeCycle);
}

TEST_CASE("BFS reachability equals the transitive closure on random graphs") {
  Xoshiro256 rng(302);
  for (int round = 0; round < 200; ++round) {
    const Graph g = random_graph(rng, 10, false);
    const std::size_t source = static_cast<std::size_t>(rng.below(g.vertices));
    const auto r = bfs_reach(g, source);
    CHECK(r.vertices == closure_oracle(g, source));
    CHECK(r.iterations <= g.vertices + 1);
  }
}

TEST_CASE("edge lists parse with comments and default weights") {
  const auto path = std::filesystem::temp_directory_path() / "openxor-edges.txt";
  std::ofstream(path) << "# demo\n0 1 2.5\n1 2   # unit weight\n\n2 0 -1\n";
  const Graph g = read_edge_list(path);
  CHECK(g.vertices == 3);
  REQUIRE(g.edges.size() == 3);
  CHECK(g.edges[0].weight == 2.5);
  CHECK(g.edges[1].weight == 1.0);
  CHECK(g.edges[2].weight == -1.0);
  std::ofstream(path) << "0\n";
  CHECK_THROWS(read_edge_list(path));
}
