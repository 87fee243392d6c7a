#pragma once

#include "polymrf/model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace polymrf {

enum class StepRule {
  Scalar,   // tau = sigma = 0.99 / ||K||
  Diagonal, // per-coordinate steps from row and column sums of |K|
};

/// Snapshot handed to progress callbacks. The spans alias solver state and
/// are only valid for the duration of the call.
struct Progress {
  int iteration = 0;
  double dual_energy = 0.0;
  double best_dual_energy = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::span<const double> x;
  std::span<const double> y;
};

struct SolverOptions {
  int max_iters = 50000;
  double tau = 0.0;   // 0 selects the step rule's automatic value
  double sigma = 0.0; // as tau
  double theta = 1.0;
  int check_every = 100;
  double rel_tol = 1e-6;
  StepRule steps = StepRule::Diagonal;
  /// Ratio between dual and primal steps for the diagonal rule.
  double primal_weight = 1.0;
  /// Restart from the running average when the fixed-point residual stalls.
  bool restarts = true;
  std::optional<CoeffField> warm_dual;
  std::function<void(const Progress&)> callback;
};

struct HistoryEntry {
  int iteration;
  double dual_energy;
  double best_dual_energy;
  double primal_residual;
  double dual_residual;
};

struct Solution {
  std::vector<std::vector<MomentBlock>> moments;
  DualCoefficients dual; // feasible dual attaining dual_energy
  double dual_energy = 0.0;
  double relaxed_objective = 0.0; // NaN until relaxed_objective() fills it
  std::vector<HistoryEntry> history;
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value of K by power iteration, times 1.01.
double operator_norm(const ConicProgram& program);

struct PdhgState {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// Generic projected primal-dual iteration on a conic saddle program. The
/// monitor runs every check_every iterations and after the last one; it may
/// return false to stop early.
PdhgState run_pdhg(const ConicProgram& program, const SolverOptions& opts,
                   const std::function<bool(const Progress&)>& monitor = {},
                   const Eigen::VectorXd* x0 = nullptr, const Eigen::VectorXd* y0 = nullptr);

/// Solves an assembled MRF program, tracking the best feasible dual energy.
Solution pdhg_solve(const ConicProgram& program, const SolverOptions& opts = {});

DualCoefficients extract_dual(const ConicProgram& program, std::span<const double> y);
std::vector<std::vector<MomentBlock>> extract_moments(const ConicProgram& program, std::span<const double> x);

/// Projects a dual onto exactly feasible duals: TV duals are re-chained to be
/// continuous with lambda(a) = 0, then scaled to the Lipschitz bound; Potts
/// duals are shifted, or affinely squeezed, into [0, weight].
DualCoefficients make_dual_feasible(const DualCoefficients& p, const Problem& problem);

/// Exact dual objective; throws InfeasibleDual for duals outside the
/// Lipschitz set beyond a relative tolerance of 1e-9.
double dual_energy(const DualCoefficients& p, const Problem& problem);
double dual_energy(const DualCoefficients& p, const Problem& problem, const Discretization& disc);

/// Re-expresses p on a refined configuration (knots of `to` refine those of
/// `from`, degree not smaller). The represented functions are unchanged.
DualCoefficients embed_dual(const DualCoefficients& p, const DualConfig& from, const DualConfig& to);

struct SupportOptions {
  int max_iters = 20000;
  double rel_tol = 1e-9;
};

/// max <lambda, delta> over one edge's Lipschitz set. delta is a block of
/// moment-piece rows in unit coordinates, shaped like one vertex of the
/// problem's discretization.
double support_lipschitz(std::span<const double> delta, const Problem& problem, int edge = 0,
                         const SupportOptions& opts = {});

/// <y, w> + sum_e support_lipschitz((grad y)_e); stores and returns it.
double relaxed_objective(Solution& solution, const Problem& problem, const SupportOptions& opts = {});

struct SosBound {
  double value;     // certified lower bound on min p over the interval
  bool certified_negative; // a moment vector with <p, y> < 0 was found
  int iterations;
};

/// Lower bound on min_{x in iv} p(x) from the largest t with p - t a
/// weighted SOS on iv, certified against the coefficient residual.
SosBound sos_lower_bound(const Polynomial& p, const Interval& iv, int max_iters = 100000, double tol = 1e-6);

/// SOS-certificate nonnegativity test; agrees with is_nonneg_on_interval up
/// to the tolerance.
bool sos_feasible(const Polynomial& p, const Interval& iv, double tol = 1e-6);

} // namespace polymrf
