#include "polymrf/rounding.hpp"

#include "polymrf/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace polymrf {

namespace {

constexpr double kMassFloor = 1e-9;
constexpr double kNormalizeEps = 1e-12;
constexpr double kPottsTol = 1e-9;

void check_mass(const std::vector<MomentBlock>& blocks, size_t u)
{
  bool const any = std::any_of(blocks.begin(), blocks.end(),
                               [](const MomentBlock& b) { return !b.moments.empty() && b.moments[0] >= kMassFloor; });
  if (!any) { raise(ErrorCode::DegenerateMass, "vertex " + std::to_string(u) + " carries no mass"); }
}

double first(const MomentBlock& b) { return b.moments.size() > 1 ? b.moments[1] : 0.0; }

} // namespace

Labeling round_mode_mean(const VertexMoments& y)
{
  Labeling x(y.size());
  for (size_t u = 0; u < y.size(); ++u) {
    check_mass(y[u], u);
    size_t best = 0;
    for (size_t k = 1; k < y[u].size(); ++k) {
      if (y[u][k].moments[0] > y[u][best].moments[0]) { best = k; }
    }
    MomentBlock const& b = y[u][best];
    double const s = std::clamp(first(b) / std::max(b.moments[0], kNormalizeEps), -1.0, 1.0);
    x[u] = std::clamp(b.piece.center() + b.piece.half_width() * s, b.piece.a, b.piece.b);
  }
  return x;
}

Labeling round_mean(const VertexMoments& y, MeanVariant variant)
{
  Labeling x(y.size());
  for (size_t u = 0; u < y.size(); ++u) {
    check_mass(y[u], u);
    double v = 0.0;
    for (auto const& b : y[u]) {
      if (variant == MeanVariant::MomentMean) {
        v += b.piece.center() * b.moments[0] + b.piece.half_width() * first(b);
      } else {
        v += b.piece.a * b.moments[0];
      }
    }
    x[u] = std::clamp(v, y[u].front().piece.a, y[u].back().piece.b);
  }
  return x;
}

double rounded_energy(const Labeling& x, const Problem& problem)
{
  auto const& g = problem.graph;
  if (static_cast<int>(x.size()) != g.num_vertices()) {
    raise(ErrorCode::ShapeMismatch, "labeling size differs from the vertex count");
  }
  Interval const dom = problem.domain();
  double total = 0.0;
  for (int u = 0; u < g.num_vertices(); ++u) {
    if (!dom.contains(x[u])) { raise(ErrorCode::InvalidArgument, "label outside the domain"); }
    total += problem.unaries[u](x[u]);
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    double const diff = std::abs(x[g.edge(e).u] - x[g.edge(e).v]);
    double const cost = problem.metric == Metric::TV ? diff : (diff > kPottsTol ? 1.0 : 0.0);
    total += problem.edge_weight(e) * cost;
  }
  return total;
}

} // namespace polymrf
