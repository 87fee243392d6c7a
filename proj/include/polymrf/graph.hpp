#pragma once

#include <span>
#include <utility>
#include <vector>

namespace polymrf {

struct Edge {
  int u;
  int v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Oriented graph; the orientation of every edge is fixed at construction.
class Graph {
public:
  Graph() = default;
  Graph(int num_vertices, std::vector<Edge> edges);

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  int degree(int u) const { return degree_[u]; }

private:
  int num_vertices_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> degree_;
};

/// 4-neighbourhood grid, vertex index row * width + col. Edges are emitted in
/// row-major vertex order, right neighbour before lower neighbour.
Graph grid_graph(int width, int height);
/// Path 0 -> 1 -> ... -> n-1.
Graph chain_graph(int n);

/// Uniform field of rows x cols coefficient blocks, one block per vertex or edge.
struct CoeffField {
  int blocks = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  CoeffField() = default;
  CoeffField(int blocks, int rows, int cols);

  int block_size() const { return rows * cols; }
  std::span<double> block(int i) { return {data.data() + i * block_size(), static_cast<size_t>(block_size())}; }
  std::span<const double> block(int i) const
  {
    return {data.data() + i * block_size(), static_cast<size_t>(block_size())};
  }
  double& at(int b, int r, int c) { return data[(b * rows + r) * cols + c]; }
  double at(int b, int r, int c) const { return data[(b * rows + r) * cols + c]; }
};

double inner(const CoeffField& x, const CoeffField& y);

/// Per-vertex blocks: (Div p)_u = sum over incoming p_e - sum over outgoing p_e.
CoeffField divergence(const Graph& g, const CoeffField& p);
/// Per-edge blocks: (grad y)_(u,v) = y_u - y_v, the negative adjoint of divergence.
CoeffField gradient(const Graph& g, const CoeffField& y);

/// Upper bound on the norm of the graph gradient: 100 power iterations on
/// grad^T grad, times a safety factor 1.01.
double operator_norm_estimate(const Graph& g);

} // namespace polymrf
