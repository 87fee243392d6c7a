#include "polymrf/graph.hpp"

#include "polymrf/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

namespace polymrf {

Graph::Graph(int num_vertices, std::vector<Edge> edges)
  : num_vertices_(num_vertices)
  , edges_(std::move(edges))
  , degree_(num_vertices, 0)
{
  if (num_vertices < 0) { raise(ErrorCode::InvalidArgument, "negative vertex count"); }
  std::set<std::pair<int, int>> seen;
  for (auto const& e : edges_) {
    if (e.u < 0 || e.v < 0 || e.u >= num_vertices || e.v >= num_vertices) {
      raise(ErrorCode::InvalidArgument, "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                            ") references a missing vertex");
    }
    if (e.u == e.v) { raise(ErrorCode::InvalidArgument, "self-loop at vertex " + std::to_string(e.u)); }
    if (!seen.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second) {
      raise(ErrorCode::InvalidArgument, "duplicate edge between " + std::to_string(e.u) + " and " +
                                            std::to_string(e.v));
    }
    ++degree_[e.u];
    ++degree_[e.v];
  }
}

Graph grid_graph(int width, int height)
{
  if (width < 1 || height < 1) { raise(ErrorCode::InvalidArgument, "grid dimensions must be >= 1"); }
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(width) * (height - 1) + static_cast<size_t>(height) * (width - 1));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      int const u = r * width + c;
      if (c + 1 < width) { edges.push_back({u, u + 1}); }
      if (r + 1 < height) { edges.push_back({u, u + width}); }
    }
  }
  return Graph(width * height, std::move(edges));
}

Graph chain_graph(int n)
{
  if (n < 1) { raise(ErrorCode::InvalidArgument, "chain needs at least one vertex"); }
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) { edges.push_back({i, i + 1}); }
  return Graph(n, std::move(edges));
}

CoeffField::CoeffField(int b, int r, int c)
  : blocks(b)
  , rows(r)
  , cols(c)
  , data(static_cast<size_t>(b) * r * c, 0.0)
{
}

double inner(const CoeffField& x, const CoeffField& y)
{
  if (x.data.size() != y.data.size()) { raise(ErrorCode::ShapeMismatch, "inner product of different shapes"); }
  double s = 0.0;
  for (size_t i = 0; i < x.data.size(); ++i) { s += x.data[i] * y.data[i]; }
  return s;
}

CoeffField divergence(const Graph& g, const CoeffField& p)
{
  if (p.blocks != g.num_edges()) {
    raise(ErrorCode::ShapeMismatch, "edge field has " + std::to_string(p.blocks) + " blocks for " +
                                        std::to_string(g.num_edges()) + " edges");
  }
  CoeffField out(g.num_vertices(), p.rows, p.cols);
  int const n = p.block_size();
  for (int e = 0; e < g.num_edges(); ++e) {
    auto const src = p.block(e);
    auto du = out.block(g.edge(e).u);
    auto dv = out.block(g.edge(e).v);
    for (int i = 0; i < n; ++i) {
      du[i] -= src[i];
      dv[i] += src[i];
    }
  }
  return out;
}

CoeffField gradient(const Graph& g, const CoeffField& y)
{
  if (y.blocks != g.num_vertices()) {
    raise(ErrorCode::ShapeMismatch, "vertex field has " + std::to_string(y.blocks) + " blocks for " +
                                        std::to_string(g.num_vertices()) + " vertices");
  }
  CoeffField out(g.num_edges(), y.rows, y.cols);
  int const n = y.block_size();
  for (int e = 0; e < g.num_edges(); ++e) {
    auto const yu = y.block(g.edge(e).u);
    auto const yv = y.block(g.edge(e).v);
    auto dst = out.block(e);
    for (int i = 0; i < n; ++i) { dst[i] = yu[i] - yv[i]; }
  }
  return out;
}

double operator_norm_estimate(const Graph& g)
{
  if (g.num_edges() == 0) { return 0.0; }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  CoeffField x(g.num_vertices(), 1, 1);
  for (auto& v : x.data) { v = normal(rng); }
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    double norm = std::sqrt(inner(x, x));
    if (norm == 0.0) { break; }
    for (auto& v : x.data) { v /= norm; }
    CoeffField const gx = gradient(g, x);
    lambda = inner(gx, gx); // Rayleigh quotient of grad^T grad
    // grad^T = -div
    x = divergence(g, gx);
    for (auto& v : x.data) { v = -v; }
  }
  return 1.01 * std::sqrt(lambda);
}

} // namespace polymrf
