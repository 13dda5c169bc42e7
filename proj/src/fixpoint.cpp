#include "openxor/fixpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace openxor::fixpoint {

std::function<bool(const std::vector<double>&, const std::vector<double>&)> sup_norm_within(double eps) {
  return [eps](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == b[i]) continue;  // covers inf == inf
      if (!(std::abs(a[i] - b[i]) <= eps)) return false;
    }
    return true;
  };
}

OperatorSystem<double> affine_contraction(double lambda, double offset, double eps) {
  if (!(std::abs(lambda) < 1.0)) throw std::invalid_argument("affine_contraction: need |lambda| < 1");
  if (!(eps > 0.0)) throw std::invalid_argument("affine_contraction: eps must be positive");
  OperatorSystem<double> sys;
  sys.apply = [lambda, offset](const double& x) { return lambda * x + offset; };
  sys.converged = within(eps);
  // |x_t - x*| <= |lambda|^t |x_0 - x*|; the budget covers any start within 1e12.
  sys.max_iterations = static_cast<std::size_t>(std::ceil(std::log(eps / 1e12) / std::log(std::abs(lambda) + 1e-300))) + 2;
  return sys;
}

OperatorSystem<std::vector<std::uint64_t>> stairs_system(std::size_t n) {
  OperatorSystem<std::vector<std::uint64_t>> sys;
  sys.apply = [](const std::vector<std::uint64_t>& f) {
    std::vector<std::uint64_t> g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = i <= 1 ? 1 : f[i - 1] + f[i - 2];
    return g;
  };
  sys.converged = exact_equality<std::vector<std::uint64_t>>();
  // The array is |n+1| long; entry i settles after i applications.
  sys.max_iterations = n + 2;
  return sys;
}

std::uint64_t dp_stairs(std::size_t n) {
  if (n > 92) throw std::out_of_range("dp_stairs: n > 92 overflows 64 bits");
  auto result = iterate(stairs_system(n), std::vector<std::uint64_t>(n + 1, 0));
  if (!result.converged) throw std::logic_error("dp_stairs: did not reach a fixed point");
  return result.fixed_point[n];
}

Graph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open graph file {}", path.string()));
  Graph g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long u = 0, v = 0;
    if (!(fields >> u)) continue;
    if (!(fields >> v) || u < 0 || v < 0) {
      throw std::runtime_error(fmt::format("{}:{}: expected 'u v [w]'", path.string(), lineno));
    }
    double w = 1.0;
    if (!(fields >> w)) w = 1.0;
    g.edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v), w});
    g.vertices = std::max({g.vertices, static_cast<std::size_t>(u) + 1, static_cast<std::size_t>(v) + 1});
  }
  return g;
}

OperatorSystem<std::vector<double>> bellman_ford_system(const Graph& graph) {
  OperatorSystem<std::vector<double>> sys;
  sys.apply = [edges = graph.edges](const std::vector<double>& d) {
    std::vector<double> next = d;
    for (const auto& e : edges) {
      if (d[e.from] == kUnreachable) continue;
      next[e.to] = std::min(next[e.to], d[e.from] + e.weight);
    }
    return next;
  };
  sys.converged = exact_equality<std::vector<double>>();
  sys.max_iterations = std::max<std::size_t>(graph.vertices, 1);
  return sys;
}

std::vector<double> bellman_ford_initial(const Graph& graph, std::size_t source) {
  if (source >= graph.vertices) throw std::out_of_range("bellman_ford: source out of range");
  std::vector<double> d(graph.vertices, kUnreachable);
  d[source] = 0.0;
  return d;
}

std::vector<double> bellman_ford(const Graph& graph, std::size_t source) {
  auto result = iterate(bellman_ford_system(graph), bellman_ford_initial(graph, source));
  if (!result.converged) {
    throw NegativeCycle(fmt::format("negative cycle reachable from vertex {}", source));
  }
  return result.fixed_point;
}

OperatorSystem<std::vector<bool>> bfs_system(const Graph& graph) {
  OperatorSystem<std::vector<bool>> sys;
  sys.apply = [edges = graph.edges](const std::vector<bool>& s) {
    std::vector<bool> next = s;
    for (const auto& e : edges) {
      if (s[e.from]) next[e.to] = true;
    }
    return next;
  };
  sys.converged = exact_equality<std::vector<bool>>();
  sys.max_iterations = graph.vertices + 1;
  return sys;
}

ReachResult bfs_reach(const Graph& graph, std::size_t source) {
  if (source >= graph.vertices) throw std::out_of_range("bfs_reach: source out of range");
  std::vector<bool> start(graph.vertices, false);
  start[source] = true;
  auto result = iterate(bfs_system(graph), std::move(start));
  ReachResult out;
  out.iterations = result.iterations;
  for (std::size_t v = 0; v < graph.vertices; ++v) {
    if (result.fixed_point[v]) out.vertices.push_back(v);
  }
  return out;
}

}  // namespace openxor::fixpoint
