#pragma once

#include "polymrf/model.hpp"
#include "polymrf/poly.hpp"

#include <vector>

namespace polymrf {

/// Uniform label grid with `points` nodes including both endpoints.
struct GridSpec {
  int points = 2001;
};

struct GridLabeling {
  std::vector<double> labels;
  double value;
};

std::vector<double> grid_points(const Interval& iv, const GridSpec& grid);

/// Exact minimizer of the energy restricted to grid labels on a path graph.
GridLabeling dp_chain(const Problem& problem, const GridSpec& grid);

Minimum grid_min(const PiecewisePolynomial& f, const GridSpec& grid);

/// Local-polytope value on grid labels for TV chains. Trees make the
/// relaxation tight, so this is the dynamic-programming optimum.
double relaxation_value_chain(const Problem& problem, const GridSpec& grid);

} // namespace polymrf
