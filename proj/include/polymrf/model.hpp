#pragma once

#include "polymrf/cones.hpp"
#include "polymrf/graph.hpp"
#include "polymrf/poly.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <memory>
#include <vector>

namespace polymrf {

enum class Metric { TV, Potts };

/// Piecewise polynomial subspace for the per-edge dual variables.
struct DualConfig {
  std::vector<double> knots;
  int deg = 1;
  bool continuity = true;
  /// Degree of the per-piece moment vectors; 0 picks max(deg, unary degree).
  int moment_deg = 0;

  /// K uniform pieces on iv; continuity defaults to on for TV, off for Potts.
  static DualConfig uniform(const Interval& iv, int pieces, int deg, Metric metric);

  int pieces() const { return static_cast<int>(knots.size()) - 1; }
  Interval domain() const { return {knots.front(), knots.back()}; }
  Interval piece(int k) const { return {knots[k], knots[k + 1]}; }
};

struct Problem {
  Graph graph;
  std::vector<PiecewisePolynomial> unaries;
  Metric metric = Metric::TV;
  DualConfig config;
  /// Per-edge multipliers of the pairwise metric; empty means all ones.
  std::vector<double> edge_weights;

  double edge_weight(int e) const { return edge_weights.empty() ? 1.0 : edge_weights[e]; }
  Interval domain() const { return config.domain(); }
};

/// Per-edge dual variables: one block per edge, rows are dual pieces, columns
/// the coefficients of each piece in its unit coordinates.
using DualCoefficients = CoeffField;

/// Moment pieces are the common refinement of the dual knots and the unary
/// knots; every moment piece lies inside exactly one dual piece.
struct Discretization {
  std::vector<double> knots;
  int moment_deg = 0;
  int dual_deg = 0;
  std::vector<int> dual_piece;
  /// Maps dual-piece coefficients to the same polynomial in moment-piece unit
  /// coordinates; (moment_deg + 1) x (dual_deg + 1).
  std::vector<Eigen::MatrixXd> transfer;
  /// Unary coefficients in moment-piece unit coordinates, [vertex][piece].
  std::vector<std::vector<Polynomial>> unary;

  int pieces() const { return static_cast<int>(knots.size()) - 1; }
  Interval piece(int m) const { return {knots[m], knots[m + 1]}; }
};

/// Validates the problem and builds its discretization. Throws ConfigMismatch
/// when the configuration cannot represent the unaries.
Discretization discretize(const Problem& problem);

/// Variables: the K * (deg + 1) unit-coordinate coefficients of lambda, piece
/// major, followed by the packed Gram matrices of the SOS certificates. The
/// Lipschitz bound is the given weight.
ConeDescription lipschitz_description_tv(const DualConfig& config, double weight = 1.0);
/// Same variable layout; certifies 0 <= lambda <= weight on every piece.
ConeDescription lipschitz_description_potts(const DualConfig& config, double weight = 1.0);
ConeDescription lipschitz_description(Metric metric, const DualConfig& config, double weight = 1.0);

struct PsdBlock {
  int offset;
  int dim;
};

/// Coordinates indices[i] must sum to rhs.
struct Hyperplane {
  std::vector<int> indices;
  double rhs = 1.0;
};

/// Everything not covered by a block is free.
struct ConeSet {
  std::vector<PsdBlock> psd;
  std::vector<Hyperplane> hyperplanes;
};

/// Offsets into the primal (x) and dual (y) vectors of an assembled MRF program.
struct ProgramLayout {
  int moments = 0;       // x: per vertex, per moment piece, moment_deg + 1 entries
  int multipliers = 0;   // x: one per affine equation of the edge certificates
  int num_multipliers = 0;
  int duals = 0;         // y: per edge, per dual piece, deg + 1 entries
  int grams = 0;         // y: scaled packed Gram matrices
  int hankels = 0;       // y: scaled packed Hankel multipliers
  int vertex_stride = 0;
  int edge_stride = 0;
};

/// Saddle problem min_x max_y <c, x> + <d, y> + <y, K x> with x restricted to
/// primal_cones and y to dual_cones. PSD blocks are stored in scaled packed
/// form (off-diagonals times sqrt 2).
struct ConicProgram {
  Eigen::SparseMatrix<double, Eigen::RowMajor> K;
  Eigen::VectorXd c;
  Eigen::VectorXd d;
  ConeSet primal_cones;
  ConeSet dual_cones;

  /// Set for programs built by assemble.
  std::shared_ptr<const Problem> problem;
  std::shared_ptr<const Discretization> disc;
  ProgramLayout layout;

  int num_primal() const { return static_cast<int>(c.size()); }
  int num_dual() const { return static_cast<int>(d.size()); }
};

ConicProgram assemble(const Problem& problem);

struct TripletSink {
  std::vector<Eigen::Triplet<double>> triplets; // (dual row, primal col, value)
  std::vector<double> c;
  std::vector<double> d;
  ConeSet primal_cones;
  ConeSet dual_cones;

  int add_primal(double cost);
  int add_dual(double cost);
  ConicProgram finish() &&;
};

/// Helper used by assemble and by the single-edge support problem: appends
/// the certificate of one edge. coeff_index maps lambda coefficient j to a
/// dual-vector index; Gram blocks and multipliers are allocated at the ends
/// of the dual and primal vectors.
void append_certificate(const ConeDescription& desc, std::span<const int> coeff_index, TripletSink& sink);

} // namespace polymrf
