#include "polymrf/oracle.hpp"

#include "polymrf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polymrf {

namespace {

void check_grid(const GridSpec& grid)
{
  if (grid.points < 2) { raise(ErrorCode::InvalidArgument, "grid needs at least two points"); }
}

// Vertex order along the path, or NotAChain.
std::vector<int> path_order(const Graph& g)
{
  int const n = g.num_vertices();
  if (n == 0) { return {}; }
  if (g.num_edges() != n - 1) { raise(ErrorCode::NotAChain, "a chain has exactly n - 1 edges"); }
  std::vector<std::vector<int>> adj(n);
  for (auto const& e : g.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  int start = 0;
  for (int u = 0; u < n; ++u) {
    if (adj[u].size() > 2) { raise(ErrorCode::NotAChain, "vertex with more than two neighbours"); }
    if (adj[u].size() <= 1) { start = u; }
  }
  std::vector<int> order{start};
  std::vector<bool> seen(n, false);
  seen[start] = true;
  while (static_cast<int>(order.size()) < n) {
    int next = -1;
    for (int v : adj[order.back()]) {
      if (!seen[v]) { next = v; }
    }
    if (next < 0) { raise(ErrorCode::NotAChain, "graph is not connected"); }
    seen[next] = true;
    order.push_back(next);
  }
  return order;
}

} // namespace

std::vector<double> grid_points(const Interval& iv, const GridSpec& grid)
{
  check_grid(grid);
  std::vector<double> x(grid.points);
  for (int i = 0; i < grid.points; ++i) { x[i] = iv.a + iv.width() * i / (grid.points - 1); }
  x.back() = iv.b;
  return x;
}

GridLabeling dp_chain(const Problem& problem, const GridSpec& grid)
{
  auto const& g = problem.graph;
  std::vector<int> const order = path_order(g);
  std::vector<double> const xs = grid_points(problem.domain(), grid);
  int const G = grid.points;
  int const n = g.num_vertices();

  // weight of the edge between consecutive path vertices
  std::vector<double> weight(n, 0.0);
  for (int e = 0; e < g.num_edges(); ++e) {
    auto const [u, v] = g.edge(e);
    for (int i = 1; i < n; ++i) {
      if ((order[i] == u && order[i - 1] == v) || (order[i] == v && order[i - 1] == u)) {
        weight[i] = problem.edge_weight(e);
      }
    }
  }
  auto pair_cost = [&](int i, int j) {
    double const d = std::abs(xs[i] - xs[j]);
    return problem.metric == Metric::TV ? d : (i == j ? 0.0 : 1.0);
  };

  std::vector<double> cost(G);
  std::vector<std::vector<int>> back(n, std::vector<int>(G, 0));
  auto const& f0 = problem.unaries[order[0]];
  for (int i = 0; i < G; ++i) { cost[i] = f0(xs[i]); }
  std::vector<double> next(G);
  for (int step = 1; step < n; ++step) {
    auto const& f = problem.unaries[order[step]];
    for (int j = 0; j < G; ++j) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int i = 0; i < G; ++i) {
        double const c = cost[i] + weight[step] * pair_cost(i, j);
        if (c < best) {
          best = c;
          arg = i;
        }
      }
      next[j] = best + f(xs[j]);
      back[step][j] = arg;
    }
    cost.swap(next);
  }
  int arg = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  GridLabeling out;
  out.value = cost[arg];
  out.labels.assign(n, 0.0);
  for (int step = n - 1; step >= 0; --step) {
    out.labels[order[step]] = xs[arg];
    arg = back[step][arg];
  }
  return out;
}

Minimum grid_min(const PiecewisePolynomial& f, const GridSpec& grid)
{
  std::vector<double> const xs = grid_points(f.domain(), grid);
  Minimum best{xs[0], f(xs[0])};
  for (double x : xs) {
    double const v = f(x);
    if (v < best.value) { best = {x, v}; }
  }
  return best;
}

double relaxation_value_chain(const Problem& problem, const GridSpec& grid)
{
  if (problem.metric != Metric::TV) {
    raise(ErrorCode::InvalidArgument, "the chain relaxation equivalence holds for TV only");
  }
  return dp_chain(problem, grid).value;
}

} // namespace polymrf
