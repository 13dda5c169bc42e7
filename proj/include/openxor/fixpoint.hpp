#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace openxor::fixpoint {

// State space X, operator O : X -> X, and a convergence test between
// consecutive iterates (exact equality for discrete systems, a metric bound
// for numeric ones).
template <class State>
struct OperatorSystem {
  std::function<State(const State&)> apply;
  std::function<bool(const State& previous, const State& next)> converged;
  std::size_t max_iterations = 1000;
};

template <class State>
struct FixpointResult {
  State fixed_point;
  std::size_t iterations = 0;  // operator applications performed
  bool converged = false;
};

// x_{t+1} = O(x_t) until converged(x_t, x_{t+1}) or the budget runs out.
// `on_step(t, x_t)` sees every iterate after x_0.
template <class State>
FixpointResult<State> iterate(const OperatorSystem<State>& system, State x0,
                              const std::function<void(std::size_t, const State&)>& on_step = {}) {
  if (system.max_iterations < 1) throw std::invalid_argument("iterate: max_iterations must be >= 1");
  State current = std::move(x0);
  for (std::size_t t = 1; t <= system.max_iterations; ++t) {
    State next = system.apply(current);
    if (on_step) on_step(t, next);
    if (system.converged(current, next)) return {std::move(next), t, true};
    current = std::move(next);
  }
  return {std::move(current), system.max_iterations, false};
}

template <class State>
std::function<bool(const State&, const State&)> exact_equality() {
  return [](const State& a, const State& b) { return a == b; };
}

inline std::function<bool(const double&, const double&)> within(double eps) {
  return [eps](const double& a, const double& b) { return std::abs(a - b) <= eps; };
}

// Sup-norm; +inf entries compare equal to +inf.
std::function<bool(const std::vector<double>&, const std::vector<double>&)> sup_norm_within(double eps);

// --- Contraction on the reals: O(x) = lambda * x + offset, |lambda| < 1,
// fixed point offset / (1 - lambda).
OperatorSystem<double> affine_contraction(double lambda, double offset, double eps);

// --- Dynamic programming: climbing n stairs with 1- or 2-steps.

OperatorSystem<std::vector<std::uint64_t>> stairs_system(std::size_t n);
// Ways to climb n stairs; n <= 92 so the count fits 64 bits.
std::uint64_t dp_stairs(std::size_t n);

// --- Graphs.

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;
};

struct Graph {
  std::size_t vertices = 0;
  std::vector<Edge> edges;
};

// Edge list, one "u v [w]" per line, '#' starts a comment; w defaults to 1.
Graph read_edge_list(const std::filesystem::path& path);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

class NegativeCycle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// O(d)_v = min(d_v, min_{(u,v)} d_u + w(u,v)), exact-equality convergence,
// |V| applications allowed.
OperatorSystem<std::vector<double>> bellman_ford_system(const Graph& graph);
std::vector<double> bellman_ford_initial(const Graph& graph, std::size_t source);

// Distances from source; unreachable vertices hold kUnreachable. Throws
// NegativeCycle when a negative cycle is reachable from source.
std::vector<double> bellman_ford(const Graph& graph, std::size_t source);

// O(S) = S ∪ successors(S); stops when no vertex is added.
OperatorSystem<std::vector<bool>> bfs_system(const Graph& graph);

struct ReachResult {
  std::vector<std::size_t> vertices;  // ascending
  std::size_t iterations = 0;
};

ReachResult bfs_reach(const Graph& graph, std::size_t source);

}  // namespace openxor::fixpoint
