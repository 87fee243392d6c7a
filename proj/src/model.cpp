#include "polymrf/model.hpp"

#include "polymrf/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace polymrf {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Row and column of every packed lower-triangle index.
std::vector<std::pair<int, int>> packed_positions(int dim)
{
  std::vector<std::pair<int, int>> pos(SymmetricMatrix::packed_size(dim));
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j <= i; ++j) { pos[SymmetricMatrix::index(i, j)] = {i, j}; }
  }
  return pos;
}

int find_piece(std::span<const double> knots, double x)
{
  auto it = std::upper_bound(knots.begin(), knots.end(), x);
  int k = static_cast<int>(it - knots.begin()) - 1;
  return std::clamp(k, 0, static_cast<int>(knots.size()) - 2);
}

// Appends the SOS description of one polynomial q whose coefficients are
// q_j = sum over coeff_terms[j] plus offset[j], renumbering Gram variables.
void append_sos(ConeDescription& desc, int deg, const std::vector<std::vector<LinearTerm>>& coeff_terms,
                const std::vector<double>& offset)
{
  ConeDescription const sub = sos_certificate_description(deg, Interval(-1.0, 1.0));
  int const base = desc.num_vars - (deg + 1);
  auto remap = [&](int v) { return base + v; };
  for (auto const& m : sub.psd_maps) {
    PsdMap out = m;
    for (auto& entry : out.entries) {
      for (auto& t : entry) { t.var = remap(t.var); }
    }
    desc.psd_maps.push_back(std::move(out));
  }
  for (auto const& eq : sub.affine_eqs) {
    AffineEquation out;
    out.rhs = eq.rhs;
    for (auto const& t : eq.terms) {
      if (t.var <= deg) {
        for (auto const& ct : coeff_terms[t.var]) { out.terms.push_back({ct.var, t.coeff * ct.coeff}); }
        out.rhs -= t.coeff * offset[t.var];
      } else {
        out.terms.push_back({remap(t.var), t.coeff});
      }
    }
    desc.affine_eqs.push_back(std::move(out));
  }
  desc.num_vars += sub.num_vars - (deg + 1);
}

void append_continuity(ConeDescription& desc, const DualConfig& config)
{
  int const n = config.deg + 1;
  for (int k = 0; k + 1 < config.pieces(); ++k) {
    AffineEquation eq;
    for (int j = 0; j < n; ++j) {
      eq.terms.push_back({k * n + j, 1.0});
      eq.terms.push_back({(k + 1) * n + j, j % 2 == 0 ? -1.0 : 1.0});
    }
    desc.affine_eqs.push_back(std::move(eq));
  }
}

void check_config(const DualConfig& config)
{
  if (config.knots.size() < 2) { raise(ErrorCode::InvalidArgument, "dual configuration needs at least one piece"); }
  for (size_t i = 1; i < config.knots.size(); ++i) {
    if (!(config.knots[i] > config.knots[i - 1])) {
      raise(ErrorCode::InvalidArgument, "dual knots must be strictly increasing");
    }
  }
  if (config.deg < 1) { raise(ErrorCode::DegreeTooSmall, "dual degree must be at least 1"); }
}

} // namespace

DualConfig DualConfig::uniform(const Interval& iv, int pieces, int deg, Metric metric)
{
  if (pieces < 1) { raise(ErrorCode::InvalidArgument, "need at least one piece"); }
  DualConfig c;
  c.knots.resize(pieces + 1);
  for (int k = 0; k <= pieces; ++k) { c.knots[k] = iv.a + iv.width() * k / pieces; }
  c.knots.back() = iv.b;
  c.deg = deg;
  c.continuity = metric == Metric::TV;
  return c;
}

ConeDescription lipschitz_description_tv(const DualConfig& config, double weight)
{
  check_config(config);
  int const n = config.deg + 1;
  ConeDescription desc;
  desc.num_vars = config.pieces() * n;
  for (int k = 0; k < config.pieces(); ++k) {
    double const bound = weight * config.piece(k).half_width();
    for (double sign : {1.0, -1.0}) {
      // q = bound + sign * dlambda/ds, degree deg - 1
      std::vector<std::vector<LinearTerm>> terms(config.deg);
      std::vector<double> offset(config.deg, 0.0);
      for (int j = 0; j < config.deg; ++j) { terms[j].push_back({k * n + j + 1, sign * (j + 1)}); }
      offset[0] = bound;
      append_sos(desc, config.deg - 1, terms, offset);
    }
  }
  if (config.continuity) { append_continuity(desc, config); }
  AffineEquation gauge;
  for (int j = 0; j < n; ++j) { gauge.terms.push_back({j, j % 2 == 0 ? 1.0 : -1.0}); }
  desc.affine_eqs.push_back(std::move(gauge));
  return desc;
}

ConeDescription lipschitz_description_potts(const DualConfig& config, double weight)
{
  check_config(config);
  int const n = config.deg + 1;
  ConeDescription desc;
  desc.num_vars = config.pieces() * n;
  for (int k = 0; k < config.pieces(); ++k) {
    for (double sign : {1.0, -1.0}) {
      // q = lambda, or q = weight - lambda
      std::vector<std::vector<LinearTerm>> terms(n);
      std::vector<double> offset(n, 0.0);
      for (int j = 0; j < n; ++j) { terms[j].push_back({k * n + j, sign}); }
      if (sign < 0) { offset[0] = weight; }
      append_sos(desc, config.deg, terms, offset);
    }
  }
  if (config.continuity) { append_continuity(desc, config); }
  return desc;
}

ConeDescription lipschitz_description(Metric metric, const DualConfig& config, double weight)
{
  return metric == Metric::TV ? lipschitz_description_tv(config, weight)
                              : lipschitz_description_potts(config, weight);
}

Discretization discretize(const Problem& problem)
{
  auto const& config = problem.config;
  check_config(config);
  auto const& g = problem.graph;
  if (static_cast<int>(problem.unaries.size()) != g.num_vertices()) {
    raise(ErrorCode::ShapeMismatch, std::to_string(problem.unaries.size()) + " unaries for " +
                                        std::to_string(g.num_vertices()) + " vertices");
  }
  if (!problem.edge_weights.empty()) {
    if (static_cast<int>(problem.edge_weights.size()) != g.num_edges()) {
      raise(ErrorCode::ShapeMismatch, "edge weight count differs from edge count");
    }
    for (double w : problem.edge_weights) {
      if (!(w > 0.0)) { raise(ErrorCode::InvalidArgument, "edge weights must be positive"); }
    }
  }
  if (problem.metric == Metric::TV && !config.continuity && config.pieces() > 1) {
    raise(ErrorCode::ConfigMismatch, "TV duals must be continuous across pieces");
  }

  Interval const dom = config.domain();
  double const snap = 1e-12 * dom.width();
  std::vector<double> knots(config.knots);
  int unary_deg = 0;
  for (auto const& f : problem.unaries) {
    Interval const fd = f.domain();
    if (std::abs(fd.a - dom.a) > 1e3 * snap || std::abs(fd.b - dom.b) > 1e3 * snap) {
      raise(ErrorCode::ConfigMismatch, "unary domain differs from the dual domain");
    }
    for (auto const& p : f.pieces()) { unary_deg = std::max(unary_deg, p.effective_degree()); }
    knots.insert(knots.end(), f.knots().begin() + 1, f.knots().end() - 1);
  }
  std::sort(knots.begin(), knots.end());
  std::vector<double> merged;
  for (double t : knots) {
    if (merged.empty() || t - merged.back() > snap) { merged.push_back(t); }
  }
  merged.front() = dom.a;
  merged.back() = dom.b;

  Discretization disc;
  disc.knots = std::move(merged);
  disc.dual_deg = config.deg;
  int const needed = std::max(config.deg, unary_deg);
  if (config.moment_deg > 0) {
    if (config.moment_deg < needed) {
      raise(ErrorCode::ConfigMismatch, "moment degree " + std::to_string(config.moment_deg) +
                                           " cannot represent degree " + std::to_string(needed));
    }
    disc.moment_deg = config.moment_deg;
  } else {
    disc.moment_deg = needed;
  }

  int const md = disc.moment_deg;
  for (int m = 0; m < disc.pieces(); ++m) {
    Interval const mp = disc.piece(m);
    int const k = find_piece(config.knots, mp.center());
    Interval const dp = config.piece(k);
    double const alpha = (mp.center() - dp.center()) / dp.half_width();
    double const beta = mp.half_width() / dp.half_width();
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(md + 1, config.deg + 1);
    for (int j = 0; j <= config.deg; ++j) {
      std::vector<double> e(j + 1, 0.0);
      e[j] = 1.0;
      Polynomial const col = compose_affine(Polynomial(std::move(e)), alpha, beta);
      for (int i = 0; i <= j; ++i) { T(i, j) = col[i]; }
    }
    disc.dual_piece.push_back(k);
    disc.transfer.push_back(std::move(T));
  }

  disc.unary.resize(g.num_vertices());
  for (int u = 0; u < g.num_vertices(); ++u) {
    auto const& f = problem.unaries[u];
    for (int m = 0; m < disc.pieces(); ++m) {
      Interval const mp = disc.piece(m);
      Polynomial const& piece = f.piece(find_piece(f.knots(), mp.center()));
      disc.unary[u].push_back(to_unit_coordinates(piece, mp).resized(md));
    }
  }
  return disc;
}

int TripletSink::add_primal(double cost)
{
  c.push_back(cost);
  return static_cast<int>(c.size()) - 1;
}

int TripletSink::add_dual(double cost)
{
  d.push_back(cost);
  return static_cast<int>(d.size()) - 1;
}

ConicProgram TripletSink::finish() &&
{
  ConicProgram prog;
  prog.K.resize(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(c.size()));
  prog.K.setFromTriplets(triplets.begin(), triplets.end());
  prog.K.makeCompressed();
  prog.c = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  prog.d = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
  prog.primal_cones = std::move(primal_cones);
  prog.dual_cones = std::move(dual_cones);
  return prog;
}

void append_certificate(const ConeDescription& desc, std::span<const int> coeff_index, TripletSink& sink)
{
  int const ncoeff = static_cast<int>(coeff_index.size());
  // dual index and plain-from-scaled factor of every description variable
  std::vector<int> where(desc.num_vars, -1);
  std::vector<double> scale(desc.num_vars, 1.0);
  for (int v = 0; v < ncoeff; ++v) { where[v] = coeff_index[v]; }

  for (auto const& m : desc.psd_maps) {
    auto const pos = packed_positions(m.dim);
    int const offset = static_cast<int>(sink.d.size());
    for (size_t idx = 0; idx < m.entries.size(); ++idx) {
      auto const& entry = m.entries[idx];
      if (entry.size() != 1 || entry[0].coeff != 1.0 || entry[0].var < ncoeff) {
        raise(ErrorCode::InvalidArgument, "certificate PSD maps must select Gram variables directly");
      }
      int const var = entry[0].var;
      where[var] = sink.add_dual(0.0);
      scale[var] = pos[idx].first == pos[idx].second ? 1.0 : 1.0 / kSqrt2;
    }
    sink.dual_cones.psd.push_back({offset, m.dim});
  }

  for (auto const& eq : desc.affine_eqs) {
    int const mult = sink.add_primal(eq.rhs);
    for (auto const& t : eq.terms) {
      if (where[t.var] < 0) { raise(ErrorCode::InvalidArgument, "certificate variable outside any block"); }
      sink.triplets.emplace_back(where[t.var], mult, -t.coeff * scale[t.var]);
    }
  }
}

ConicProgram assemble(const Problem& problem)
{
  auto disc = std::make_shared<Discretization>(discretize(problem));
  auto const& g = problem.graph;
  auto const& config = problem.config;
  int const md = disc->moment_deg;
  int const M = disc->pieces();
  int const n = config.deg + 1;

  TripletSink sink;
  ProgramLayout lay;
  lay.vertex_stride = M * (md + 1);
  lay.edge_stride = config.pieces() * n;

  lay.moments = 0;
  for (int u = 0; u < g.num_vertices(); ++u) {
    Hyperplane h;
    for (int m = 0; m < M; ++m) {
      for (int i = 0; i <= md; ++i) {
        int const idx = sink.add_primal(disc->unary[u][m][i]);
        if (i == 0) { h.indices.push_back(idx); }
      }
    }
    sink.primal_cones.hyperplanes.push_back(std::move(h));
  }
  auto y_index = [&](int u, int m, int i) { return lay.moments + u * lay.vertex_stride + m * (md + 1) + i; };

  lay.duals = 0;
  for (int e = 0; e < g.num_edges(); ++e) {
    for (int j = 0; j < lay.edge_stride; ++j) { sink.add_dual(0.0); }
  }
  auto p_index = [&](int e, int k, int j) { return lay.duals + e * lay.edge_stride + k * n + j; };

  for (int e = 0; e < g.num_edges(); ++e) {
    auto const [u, v] = g.edge(e);
    for (int m = 0; m < M; ++m) {
      int const k = disc->dual_piece[m];
      auto const& T = disc->transfer[m];
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= md; ++i) {
          if (T(i, j) == 0.0) { continue; }
          sink.triplets.emplace_back(p_index(e, k, j), y_index(u, m, i), T(i, j));
          sink.triplets.emplace_back(p_index(e, k, j), y_index(v, m, i), -T(i, j));
        }
      }
    }
  }

  lay.multipliers = static_cast<int>(sink.c.size());
  lay.grams = static_cast<int>(sink.d.size());
  std::vector<int> coeff(lay.edge_stride);
  // Certificates only depend on the weight, so equal weights share one description.
  double cached_weight = -1.0;
  ConeDescription desc;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (problem.edge_weight(e) != cached_weight) {
      cached_weight = problem.edge_weight(e);
      desc = lipschitz_description(problem.metric, config, cached_weight);
    }
    for (int j = 0; j < lay.edge_stride; ++j) { coeff[j] = p_index(e, 0, 0) + j; }
    append_certificate(desc, coeff, sink);
  }
  lay.num_multipliers = static_cast<int>(sink.c.size()) - lay.multipliers;

  lay.hankels = static_cast<int>(sink.d.size());
  ConeDescription const moment_desc = moment_cone_description(md, Interval(-1.0, 1.0));
  for (int u = 0; u < g.num_vertices(); ++u) {
    for (int m = 0; m < M; ++m) {
      for (auto const& map : moment_desc.psd_maps) {
        auto const pos = packed_positions(map.dim);
        int const offset = static_cast<int>(sink.d.size());
        for (size_t idx = 0; idx < map.entries.size(); ++idx) {
          int const z = sink.add_dual(0.0);
          double const s = pos[idx].first == pos[idx].second ? 1.0 : kSqrt2;
          for (auto const& t : map.entries[idx]) { sink.triplets.emplace_back(z, y_index(u, m, t.var), -s * t.coeff); }
        }
        sink.dual_cones.psd.push_back({offset, map.dim});
      }
    }
  }

  ConicProgram prog = std::move(sink).finish();
  prog.problem = std::make_shared<Problem>(problem);
  prog.disc = std::move(disc);
  prog.layout = lay;
  return prog;
}

} // namespace polymrf
