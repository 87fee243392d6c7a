#include "polymrf/solver.hpp"

#include "polymrf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace polymrf {

namespace {

constexpr double kDivergence = 1e8;
constexpr double kFeasibilityTol = 1e-9;

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

double max_abs_on(const Polynomial& q, const Interval& iv)
{
  double const lo = minimize_on_interval(q, iv).value;
  double const hi = -minimize_on_interval(-1.0 * q, iv).value;
  return std::max(std::abs(lo), std::abs(hi));
}

Polynomial row_poly(const CoeffField& f, int block, int row)
{
  std::vector<double> c(f.cols);
  for (int j = 0; j < f.cols; ++j) { c[j] = f.at(block, row, j); }
  return Polynomial(std::move(c));
}

void set_row(CoeffField& f, int block, int row, const Polynomial& p)
{
  for (int j = 0; j < f.cols; ++j) { f.at(block, row, j) = p[j]; }
}

double value_at(const CoeffField& f, int block, int row, double s)
{
  double acc = 0.0;
  for (int j = f.cols - 1; j >= 0; --j) { acc = acc * s + f.at(block, row, j); }
  return acc;
}

void check_dual_shape(const DualCoefficients& p, const Problem& problem)
{
  if (p.blocks != problem.graph.num_edges() || p.rows != problem.config.pieces() ||
      p.cols != problem.config.deg + 1) {
    raise(ErrorCode::ShapeMismatch, "dual coefficients do not match the problem configuration");
  }
}

void project(Eigen::VectorXd& v, const ConeSet& cones, const Eigen::VectorXd& step)
{
  for (auto const& h : cones.hyperplanes) {
    double sum = 0.0;
    double weight = 0.0;
    for (int i : h.indices) {
      sum += v[i];
      weight += step[i];
    }
    double const mu = (sum - h.rhs) / weight;
    for (int i : h.indices) { v[i] -= step[i] * mu; }
  }
  for (auto const& b : cones.psd) {
    project_psd_svec(std::span<double>(v.data() + b.offset, SymmetricMatrix::packed_size(b.dim)), b.dim);
  }
}

// Steps must be constant on every PSD block for the clamp to stay a projection.
void flatten_on_blocks(Eigen::VectorXd& step, const ConeSet& cones)
{
  for (auto const& b : cones.psd) {
    auto seg = step.segment(b.offset, SymmetricMatrix::packed_size(b.dim));
    seg.setConstant(seg.minCoeff());
  }
}

} // namespace

double operator_norm(const ConicProgram& program)
{
  if (program.K.nonZeros() == 0) { return 0.0; }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(program.num_primal());
  for (auto& v : x) { v = normal(rng); }
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    double const norm = x.norm();
    if (norm == 0.0) { break; }
    x /= norm;
    Eigen::VectorXd const kx = program.K * x;
    lambda = kx.squaredNorm();
    x = program.K.transpose() * kx;
  }
  return 1.01 * std::sqrt(lambda);
}

PdhgState run_pdhg(const ConicProgram& program, const SolverOptions& opts,
                   const std::function<bool(const Progress&)>& monitor, const Eigen::VectorXd* x0,
                   const Eigen::VectorXd* y0)
{
  int const nx = program.num_primal();
  int const ny = program.num_dual();
  if (program.K.rows() != ny || program.K.cols() != nx) {
    raise(ErrorCode::ShapeMismatch, "operator shape does not match the cost vectors");
  }
  if (opts.theta < 0.0 || opts.theta > 1.0) { raise(ErrorCode::InvalidArgument, "theta must lie in [0, 1]"); }
  if (opts.check_every < 1) { raise(ErrorCode::InvalidArgument, "check_every must be positive"); }

  RowMatrix const& K = program.K;
  RowMatrix const Kt = K.transpose();

  Eigen::VectorXd tau(nx);
  Eigen::VectorXd sigma(ny);
  bool const explicit_steps = opts.tau > 0.0 || opts.sigma > 0.0;
  if (opts.steps == StepRule::Scalar || explicit_steps) {
    double const L = operator_norm(program);
    double const base = L > 0.0 ? 0.99 / L : 1.0;
    double const t = opts.tau > 0.0 ? opts.tau : base;
    double const s = opts.sigma > 0.0 ? opts.sigma : base;
    if (t * s * L * L > 1.0) {
      raise(ErrorCode::StepSizeViolation, "tau * sigma * L^2 = " + std::to_string(t * s * L * L) + " exceeds 1");
    }
    tau.setConstant(t);
    sigma.setConstant(s);
  } else {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(nx);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(ny);
    for (int r = 0; r < ny; ++r) {
      for (RowMatrix::InnerIterator it(K, r); it; ++it) {
        row[r] += std::abs(it.value());
        col[it.col()] += std::abs(it.value());
      }
    }
    double const w = opts.primal_weight;
    for (int j = 0; j < nx; ++j) { tau[j] = col[j] > 0.0 ? 1.0 / (w * col[j]) : 1.0; }
    for (int i = 0; i < ny; ++i) { sigma[i] = row[i] > 0.0 ? w / row[i] : 1.0; }
    flatten_on_blocks(tau, program.primal_cones);
    flatten_on_blocks(sigma, program.dual_cones);
  }

  PdhgState st;
  st.x = x0 ? *x0 : Eigen::VectorXd::Zero(nx);
  st.y = y0 ? *y0 : Eigen::VectorXd::Zero(ny);
  project(st.x, program.primal_cones, tau);
  project(st.y, program.dual_cones, sigma);
  Eigen::VectorXd xbar = st.x;
  Eigen::VectorXd x_old(nx);
  Eigen::VectorXd y_old(ny);
  double const scale_c = 1.0 + program.c.norm();
  double const scale_d = 1.0 + program.d.norm();

  auto step = [&](Eigen::VectorXd& x, Eigen::VectorXd& y, const Eigen::VectorXd& xb) {
    y.noalias() += sigma.cwiseProduct(program.d + K * xb);
    project(y, program.dual_cones, sigma);
    x.noalias() -= tau.cwiseProduct(program.c + Kt * y);
    project(x, program.primal_cones, tau);
  };
  // Length of one iteration started at (x, y), in the step-weighted norm.
  auto fixed_point_residual = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::VectorXd x1 = x;
    Eigen::VectorXd y1 = y;
    step(x1, y1, x);
    return std::sqrt((x1 - x).array().square().cwiseQuotient(tau.array()).sum() +
                     (y1 - y).array().square().cwiseQuotient(sigma.array()).sum());
  };

  auto report = [&](int iter, double rp, double rd) {
    if (!monitor) { return true; }
    Progress pr;
    pr.iteration = iter;
    pr.primal_residual = rp;
    pr.dual_residual = rd;
    pr.x = std::span<const double>(st.x.data(), nx);
    pr.y = std::span<const double>(st.y.data(), ny);
    return monitor(pr);
  };

  if (!report(0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity())) {
    return st;
  }

  // Adaptive restarts to the running average.
  Eigen::VectorXd x_sum = Eigen::VectorXd::Zero(nx);
  Eigen::VectorXd y_sum = Eigen::VectorXd::Zero(ny);
  int averaged = 0;
  int restart_iter = 0;
  double restart_res = opts.restarts ? fixed_point_residual(st.x, st.y) : 0.0;
  double last_candidate = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= opts.max_iters; ++it) {
    y_old = st.y;
    x_old = st.x;
    step(st.x, st.y, xbar);
    if (opts.restarts) {
      x_sum += st.x;
      y_sum += st.y;
      ++averaged;
    }

    bool const check = it % opts.check_every == 0 || it == opts.max_iters;
    bool restarted = false;
    if (check) {
      Eigen::VectorXd const rx = (x_old - st.x).cwiseQuotient(tau);
      Eigen::VectorXd const ry = (y_old - st.y).cwiseQuotient(sigma) + K * (xbar - st.x);
      double const px = (program.c + Kt * st.y).norm();
      double const py = (program.d + K * st.x).norm();
      st.primal_residual = rx.norm() / (scale_c + px);
      st.dual_residual = ry.norm() / (scale_d + py);
      st.iterations = it;
      if (!std::isfinite(st.primal_residual) || !std::isfinite(st.dual_residual) ||
          rx.norm() > kDivergence || ry.norm() > kDivergence) {
        raise(ErrorCode::Diverged, "residuals exceeded 1e8 at iteration " + std::to_string(it));
      }
      st.converged = st.primal_residual < opts.rel_tol && st.dual_residual < opts.rel_tol;
      if (!report(it, st.primal_residual, st.dual_residual) || st.converged) { return st; }

      if (opts.restarts && averaged > 0) {
        Eigen::VectorXd const xa = x_sum / averaged;
        Eigen::VectorXd const ya = y_sum / averaged;
        double const r_cur = fixed_point_residual(st.x, st.y);
        double const r_avg = fixed_point_residual(xa, ya);
        double const cand = std::min(r_cur, r_avg);
        bool const restart = cand <= 0.2 * restart_res ||
                             (cand <= 0.8 * restart_res && cand > last_candidate) ||
                             it - restart_iter >= 0.36 * it;
        last_candidate = cand;
        if (restart) {
          if (r_avg < r_cur) {
            st.x = xa;
            st.y = ya;
          }
          x_sum.setZero();
          y_sum.setZero();
          averaged = 0;
          restart_iter = it;
          restart_res = cand;
          last_candidate = std::numeric_limits<double>::infinity();
          restarted = true;
        }
      }
    }

    xbar = restarted ? st.x : Eigen::VectorXd(st.x + opts.theta * (st.x - x_old));
  }
  st.iterations = opts.max_iters;
  return st;
}

DualCoefficients extract_dual(const ConicProgram& program, std::span<const double> y)
{
  if (!program.problem) { raise(ErrorCode::InvalidArgument, "program was not built by assemble"); }
  auto const& pb = *program.problem;
  DualCoefficients p(pb.graph.num_edges(), pb.config.pieces(), pb.config.deg + 1);
  std::copy_n(y.begin() + program.layout.duals, p.data.size(), p.data.begin());
  return p;
}

std::vector<std::vector<MomentBlock>> extract_moments(const ConicProgram& program, std::span<const double> x)
{
  if (!program.problem) { raise(ErrorCode::InvalidArgument, "program was not built by assemble"); }
  auto const& disc = *program.disc;
  int const md = disc.moment_deg;
  std::vector<std::vector<MomentBlock>> out(program.problem->graph.num_vertices());
  for (size_t u = 0; u < out.size(); ++u) {
    for (int m = 0; m < disc.pieces(); ++m) {
      auto const first = x.begin() + program.layout.moments + u * program.layout.vertex_stride + m * (md + 1);
      out[u].push_back({std::vector<double>(first, first + md + 1), disc.piece(m)});
    }
  }
  return out;
}

DualCoefficients make_dual_feasible(const DualCoefficients& p, const Problem& problem)
{
  check_dual_shape(p, problem);
  auto const& config = problem.config;
  DualCoefficients out = p;
  Interval const unit(-1.0, 1.0);
  for (int e = 0; e < p.blocks; ++e) {
    double const w = problem.edge_weight(e);
    if (problem.metric == Metric::TV) {
      out.at(e, 0, 0) -= value_at(out, e, 0, -1.0);
      for (int k = 1; k < p.rows; ++k) {
        out.at(e, k, 0) -= value_at(out, e, k, -1.0) - value_at(out, e, k - 1, 1.0);
      }
      double lip = 0.0;
      for (int k = 0; k < p.rows; ++k) {
        Polynomial const d = derivative(row_poly(out, e, k));
        lip = std::max(lip, max_abs_on(d, unit) / config.piece(k).half_width());
      }
      if (lip > w) {
        double const s = w / lip;
        for (double& v : out.block(e)) { v *= s; }
      }
    } else {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (int k = 0; k < p.rows; ++k) {
        Polynomial const q = row_poly(out, e, k);
        lo = std::min(lo, minimize_on_interval(q, unit).value);
        hi = std::max(hi, -minimize_on_interval(-1.0 * q, unit).value);
      }
      double shift = 0.0;
      double scale = 1.0;
      if (hi - lo > w) {
        scale = w / (hi - lo);
        shift = -lo;
      } else if (lo < 0.0) {
        shift = -lo;
      } else if (hi > w) {
        shift = w - hi;
      }
      if (shift != 0.0 || scale != 1.0) {
        for (int k = 0; k < p.rows; ++k) {
          out.at(e, k, 0) += shift;
          for (int j = 0; j < p.cols; ++j) { out.at(e, k, j) *= scale; }
        }
      }
    }
  }
  return out;
}

double dual_energy(const DualCoefficients& p, const Problem& problem)
{
  return dual_energy(p, problem, discretize(problem));
}

double dual_energy(const DualCoefficients& p, const Problem& problem, const Discretization& disc)
{
  check_dual_shape(p, problem);
  auto const& g = problem.graph;
  auto const& config = problem.config;
  Interval const unit(-1.0, 1.0);

  for (int e = 0; e < p.blocks; ++e) {
    double const w = problem.edge_weight(e);
    double const slack = kFeasibilityTol * std::max(1.0, w);
    if (problem.metric == Metric::TV) {
      for (int k = 0; k < p.rows; ++k) {
        double const lip = max_abs_on(derivative(row_poly(p, e, k)), unit) / config.piece(k).half_width();
        if (lip > w + slack) {
          raise(ErrorCode::InfeasibleDual, "edge " + std::to_string(e) + " has Lipschitz constant " +
                                               std::to_string(lip) + " above " + std::to_string(w));
        }
        if (k > 0) {
          double const jump = value_at(p, e, k, -1.0) - value_at(p, e, k - 1, 1.0);
          if (std::abs(jump) > slack * std::max(1.0, config.domain().width())) {
            raise(ErrorCode::InfeasibleDual, "edge " + std::to_string(e) + " is discontinuous at knot " +
                                                 std::to_string(k));
          }
        }
      }
    } else {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (int k = 0; k < p.rows; ++k) {
        Polynomial const q = row_poly(p, e, k);
        lo = std::min(lo, minimize_on_interval(q, unit).value);
        hi = std::max(hi, -minimize_on_interval(-1.0 * q, unit).value);
      }
      if (hi - lo > w + slack) {
        raise(ErrorCode::InfeasibleDual, "edge " + std::to_string(e) + " has range " + std::to_string(hi - lo) +
                                             " above " + std::to_string(w));
      }
    }
  }

  int const md = disc.moment_deg;
  int const M = disc.pieces();
  CoeffField acc(g.num_vertices(), M, md + 1);
  for (int u = 0; u < g.num_vertices(); ++u) {
    for (int m = 0; m < M; ++m) { set_row(acc, u, m, disc.unary[u][m]); }
  }
  std::vector<double> lam(md + 1);
  for (int e = 0; e < g.num_edges(); ++e) {
    auto const [u, v] = g.edge(e);
    for (int m = 0; m < M; ++m) {
      auto const& T = disc.transfer[m];
      int const k = disc.dual_piece[m];
      for (int i = 0; i <= md; ++i) {
        double s = 0.0;
        for (int j = 0; j < p.cols; ++j) { s += T(i, j) * p.at(e, k, j); }
        acc.at(u, m, i) += s;
        acc.at(v, m, i) -= s;
      }
    }
  }
  double total = 0.0;
  for (int u = 0; u < g.num_vertices(); ++u) {
    double best = std::numeric_limits<double>::infinity();
    for (int m = 0; m < M; ++m) { best = std::min(best, minimize_on_interval(row_poly(acc, u, m), unit).value); }
    total += best;
  }
  return total;
}

DualCoefficients embed_dual(const DualCoefficients& p, const DualConfig& from, const DualConfig& to)
{
  if (p.rows != from.pieces() || p.cols != from.deg + 1) {
    raise(ErrorCode::ShapeMismatch, "dual coefficients do not match the source configuration");
  }
  if (to.deg < from.deg) { raise(ErrorCode::ConfigMismatch, "cannot embed into a lower degree"); }
  double const eps = 1e-12 * std::max(1.0, from.domain().width());
  DualCoefficients out(p.blocks, to.pieces(), to.deg + 1);
  for (int k = 0; k < to.pieces(); ++k) {
    Interval const tp = to.piece(k);
    auto const it = std::upper_bound(from.knots.begin(), from.knots.end(), tp.center());
    int const src = std::clamp(static_cast<int>(it - from.knots.begin()) - 1, 0, from.pieces() - 1);
    Interval const fp = from.piece(src);
    if (tp.a < fp.a - eps || tp.b > fp.b + eps) {
      raise(ErrorCode::ConfigMismatch, "target knots do not refine the source knots");
    }
    double const alpha = (tp.center() - fp.center()) / fp.half_width();
    double const beta = tp.half_width() / fp.half_width();
    for (int e = 0; e < p.blocks; ++e) {
      Polynomial const q = compose_affine(row_poly(p, e, src), alpha, beta).resized(to.deg);
      set_row(out, e, k, q);
    }
  }
  return out;
}

Solution pdhg_solve(const ConicProgram& program, const SolverOptions& opts)
{
  if (!program.problem) { raise(ErrorCode::InvalidArgument, "program was not built by assemble"); }
  Problem const& problem = *program.problem;
  Discretization const& disc = *program.disc;
  auto const& lay = program.layout;

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(program.num_primal());
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(program.num_dual());
  // Start from the uniform measure on every piece.
  int const md = disc.moment_deg;
  int const M = disc.pieces();
  for (int u = 0; u < problem.graph.num_vertices(); ++u) {
    for (int m = 0; m < M; ++m) {
      for (int i = 0; i <= md; i += 2) { x0[lay.moments + u * lay.vertex_stride + m * (md + 1) + i] = 1.0 / (M * (i + 1.0)); }
    }
  }
  if (opts.warm_dual) {
    DualCoefficients const warm = make_dual_feasible(*opts.warm_dual, problem);
    std::copy(warm.data.begin(), warm.data.end(), y0.data() + lay.duals);
  }

  Solution sol;
  sol.dual_energy = -std::numeric_limits<double>::infinity();
  sol.relaxed_objective = std::numeric_limits<double>::quiet_NaN();

  auto monitor = [&](const Progress& pr) {
    DualCoefficients const feasible = make_dual_feasible(extract_dual(program, pr.y), problem);
    double const energy = dual_energy(feasible, problem, disc);
    if (energy > sol.dual_energy) {
      sol.dual_energy = energy;
      sol.dual = feasible;
    }
    sol.history.push_back({pr.iteration, energy, sol.dual_energy, pr.primal_residual, pr.dual_residual});
    if (opts.callback) {
      Progress full = pr;
      full.dual_energy = energy;
      full.best_dual_energy = sol.dual_energy;
      opts.callback(full);
    }
    return true;
  };

  PdhgState const st = run_pdhg(program, opts, monitor, &x0, &y0);
  sol.moments = extract_moments(program, std::span<const double>(st.x.data(), st.x.size()));
  sol.iterations = st.iterations;
  sol.converged = st.converged;
  return sol;
}

double support_lipschitz(std::span<const double> delta, const Problem& problem, int edge, const SupportOptions& opts)
{
  Discretization const disc = discretize(problem);
  auto const& config = problem.config;
  int const md = disc.moment_deg;
  int const n = config.deg + 1;
  if (static_cast<int>(delta.size()) != disc.pieces() * (md + 1)) {
    raise(ErrorCode::ShapeMismatch, "delta has " + std::to_string(delta.size()) + " entries, expected " +
                                        std::to_string(disc.pieces() * (md + 1)));
  }
  if (edge < 0 || (problem.graph.num_edges() > 0 && edge >= problem.graph.num_edges())) {
    raise(ErrorCode::InvalidArgument, "edge index out of range");
  }
  double const w = problem.graph.num_edges() > 0 ? problem.edge_weight(edge) : 1.0;

  // Linear functional on the dual coefficients.
  std::vector<double> gain(config.pieces() * n, 0.0);
  for (int m = 0; m < disc.pieces(); ++m) {
    int const k = disc.dual_piece[m];
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= md; ++i) { gain[k * n + j] += disc.transfer[m](i, j) * delta[m * (md + 1) + i]; }
    }
  }
  bool const zero = std::all_of(gain.begin(), gain.end(), [](double g) { return g == 0.0; });
  if (zero) { return 0.0; }

  TripletSink sink;
  std::vector<int> coeff(gain.size());
  for (size_t j = 0; j < gain.size(); ++j) { coeff[j] = sink.add_dual(gain[j]); }
  append_certificate(lipschitz_description(problem.metric, config, w), coeff, sink);
  ConicProgram const prog = std::move(sink).finish();

  Problem single;
  single.graph = Graph(2, {{0, 1}});
  single.metric = problem.metric;
  single.config = config;
  single.edge_weights = {w};

  SolverOptions so;
  so.max_iters = opts.max_iters;
  so.rel_tol = opts.rel_tol;
  so.check_every = 200;
  PdhgState const st = run_pdhg(prog, so);

  DualCoefficients p(1, config.pieces(), n);
  for (size_t j = 0; j < gain.size(); ++j) { p.data[j] = st.y[coeff[j]]; }
  DualCoefficients const feasible = make_dual_feasible(p, single);
  double value = 0.0;
  for (size_t j = 0; j < gain.size(); ++j) { value += gain[j] * feasible.data[j]; }
  return value;
}

double relaxed_objective(Solution& solution, const Problem& problem, const SupportOptions& opts)
{
  Discretization const disc = discretize(problem);
  int const md = disc.moment_deg;
  int const M = disc.pieces();
  auto const& g = problem.graph;
  if (static_cast<int>(solution.moments.size()) != g.num_vertices()) {
    raise(ErrorCode::ShapeMismatch, "solution moments do not match the problem");
  }
  double total = 0.0;
  for (int u = 0; u < g.num_vertices(); ++u) {
    for (int m = 0; m < M; ++m) {
      for (int i = 0; i <= md; ++i) { total += disc.unary[u][m][i] * solution.moments[u][m].moments[i]; }
    }
  }
  std::vector<double> delta(M * (md + 1));
  for (int e = 0; e < g.num_edges(); ++e) {
    auto const [u, v] = g.edge(e);
    for (int m = 0; m < M; ++m) {
      for (int i = 0; i <= md; ++i) {
        delta[m * (md + 1) + i] = solution.moments[u][m].moments[i] - solution.moments[v][m].moments[i];
      }
    }
    total += support_lipschitz(delta, problem, e, opts);
  }
  solution.relaxed_objective = total;
  return total;
}

namespace {

struct SosProgram {
  ConicProgram prog;
  int t_index = 0;
  std::vector<int> mult; // multiplier of coefficient equation j
  std::vector<PsdBlock> grams;
  std::vector<std::vector<std::pair<int, double>>> weights; // Gram weight polynomial per block
};

// Certified bound t + min residual, with the residual bounded coefficientwise.
double certified_bound(const Polynomial& p, const Interval& iv, const SosProgram& sp, const Eigen::VectorXd& y)
{
  int const deg = p.degree();
  std::vector<double> q(deg + 1);
  for (int j = 0; j <= deg; ++j) { q[j] = p[j]; }
  double const t = y[sp.t_index];
  q[0] -= t;
  // subtract the SOS part: weight(x) * z^T G z, G from scaled packed form
  for (size_t b = 0; b < sp.grams.size(); ++b) {
    int const dim = sp.grams[b].dim;
    for (int i = 0; i < dim; ++i) {
      for (int l = 0; l <= i; ++l) {
        double const sv = y[sp.grams[b].offset + SymmetricMatrix::index(i, l)];
        double const entry = i == l ? sv : 2.0 * sv / std::sqrt(2.0);
        for (auto const& [power, coef] : sp.weights[b]) {
          int const k = i + l + power;
          if (k <= deg) { q[k] -= coef * entry; }
        }
      }
    }
  }
  double const r = std::max({1.0, std::abs(iv.a), std::abs(iv.b)});
  double bound = 0.0;
  double rk = 1.0;
  for (int j = 0; j <= deg; ++j) {
    bound += std::abs(q[j]) * rk;
    rk *= r;
  }
  return t - bound;
}

SosProgram build_sos_program(const Polynomial& p, const Interval& iv)
{
  int const deg = std::max(0, p.degree());
  SosLayout lay;
  ConeDescription const sub = sos_certificate_description(deg, iv, &lay);
  ConeDescription desc;
  desc.num_vars = 1 + (sub.num_vars - (deg + 1));
  auto remap = [&](int v) { return 1 + v - (deg + 1); };
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
        out.rhs -= t.coeff * p[t.var];
        if (t.var == 0) { out.terms.push_back({0, -t.coeff}); }
      } else {
        out.terms.push_back({remap(t.var), t.coeff});
      }
    }
    desc.affine_eqs.push_back(std::move(out));
  }

  SosProgram sp;
  TripletSink sink;
  sp.t_index = sink.add_dual(1.0);
  int const first_mult = static_cast<int>(sink.c.size());
  std::vector<int> coeff{sp.t_index};
  append_certificate(desc, coeff, sink);
  for (int j = 0; j <= deg; ++j) { sp.mult.push_back(first_mult + j); }
  sp.grams = sink.dual_cones.psd;
  // weight polynomials in the same order as sos_certificate_description
  double const a = iv.a;
  double const b = iv.b;
  if (deg % 2 == 0) {
    sp.weights.push_back({{0, 1.0}});
    if (deg >= 2) { sp.weights.push_back({{0, -a * b}, {1, a + b}, {2, -1.0}}); }
  } else {
    sp.weights.push_back({{0, -a}, {1, 1.0}});
    sp.weights.push_back({{0, b}, {1, -1.0}});
  }
  sp.prog = std::move(sink).finish();
  return sp;
}

} // namespace

SosBound sos_lower_bound(const Polynomial& p, const Interval& iv, int max_iters, double tol)
{
  SosProgram const sp = build_sos_program(p, iv);
  int const deg = std::max(0, p.degree());
  SosBound out{-std::numeric_limits<double>::infinity(), false, 0};

  SolverOptions so;
  so.max_iters = max_iters;
  so.check_every = 50;
  so.rel_tol = 1e-12;
  auto monitor = [&](const Progress& pr) {
    Eigen::Map<const Eigen::VectorXd> y(pr.y.data(), static_cast<Eigen::Index>(pr.y.size()));
    out.value = std::max(out.value, certified_bound(p, iv, sp, y));
    out.iterations = pr.iteration;
    if (out.value >= -tol) { return false; }
    // moments are the negated multipliers
    std::vector<double> mom(deg + 1);
    for (int j = 0; j <= deg; ++j) { mom[j] = -pr.x[sp.mult[j]]; }
    if (mom[0] > 0.0) {
      double pairing = 0.0;
      for (int j = 0; j <= deg; ++j) {
        mom[j] /= mom[0];
        pairing += p[j] * mom[j];
      }
      if (pairing < -2.0 * tol && moment_cone_check(mom, iv, 1e-10)) {
        out.certified_negative = true;
        return false;
      }
    }
    return true;
  };
  run_pdhg(sp.prog, so, monitor);
  return out;
}

bool sos_feasible(const Polynomial& p, const Interval& iv, double tol)
{
  return sos_lower_bound(p, iv, 100000, tol).value >= -tol;
}

} // namespace polymrf
