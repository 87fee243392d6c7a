#pragma once

#include "polymrf/model.hpp"
#include "polymrf/poly.hpp"

#include <random>
#include <vector>

namespace polymrf::test {

inline PiecewisePolynomial single(std::initializer_list<double> c, Interval iv = {-1.0, 1.0})
{
  return PiecewisePolynomial::single(Polynomial(c), iv);
}

inline std::vector<double> random_coeffs(std::mt19937_64& rng, int deg)
{
  std::normal_distribution<double> normal;
  std::vector<double> c(deg + 1);
  for (double& v : c) { v = normal(rng); }
  return c;
}

/// Two-vertex TV chain with f1 = (x - 0.5)^2, f2 = (x + 0.5)^2.
inline Problem two_vertex_quadratic(int pieces = 1, int deg = 2)
{
  Problem pb;
  pb.graph = chain_graph(2);
  pb.metric = Metric::TV;
  pb.unaries = {single({0.25, -1.0, 1.0}), single({0.25, 1.0, 1.0})};
  pb.config = DualConfig::uniform({-1.0, 1.0}, pieces, deg, Metric::TV);
  return pb;
}

/// Random degree-`unary_deg` unaries on a grid.
inline Problem random_grid(int w, int h, int unary_deg, std::uint64_t seed, Metric metric, int pieces, int deg)
{
  std::mt19937_64 rng(seed);
  Problem pb;
  pb.graph = grid_graph(w, h);
  pb.metric = metric;
  for (int u = 0; u < w * h; ++u) {
    pb.unaries.push_back(PiecewisePolynomial::single(Polynomial(random_coeffs(rng, unary_deg)), {-1.0, 1.0}));
  }
  pb.config = DualConfig::uniform({-1.0, 1.0}, pieces, deg, metric);
  return pb;
}

/// Difference of the lifted Dirac vectors at xu and xv, laid out like one
/// vertex of the discretization's moment pieces.
inline std::vector<double> lifted_difference(const Discretization& disc, double xu, double xv)
{
  int const md = disc.moment_deg;
  std::vector<double> delta(disc.pieces() * (md + 1), 0.0);
  for (auto [x, sign] : {std::pair{xu, 1.0}, std::pair{xv, -1.0}}) {
    int m = 0;
    while (m + 1 < disc.pieces() && x > disc.knots[m + 1]) { ++m; }
    Interval const piece = disc.piece(m);
    double s = (x - piece.center()) / piece.half_width();
    double power = 1.0;
    for (int i = 0; i <= md; ++i) {
      delta[m * (md + 1) + i] += sign * power;
      power *= s;
    }
  }
  return delta;
}

} // namespace polymrf::test
