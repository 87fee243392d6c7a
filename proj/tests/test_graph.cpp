#include "polymrf/error.hpp"
#include "polymrf/graph.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace polymrf;
using doctest::Approx;

namespace {

CoeffField random_field(std::mt19937_64& rng, int blocks, int rows, int cols)
{
  std::normal_distribution<double> normal;
  CoeffField f(blocks, rows, cols);
  for (double& v : f.data) { v = normal(rng); }
  return f;
}

} // namespace

TEST_SUITE("graph")
{
  TEST_CASE("grid_graph examples")
  {
    Graph g = grid_graph(1, 1);
    CHECK(g.num_vertices() == 1);
    CHECK(g.num_edges() == 0);

    g = grid_graph(2, 1);
    REQUIRE(g.num_edges() == 1);
    CHECK(g.edge(0) == Edge{0, 1});

    g = grid_graph(16, 16);
    CHECK(g.num_vertices() == 256);
    CHECK(g.num_edges() == 480);
  }

  TEST_CASE("grid edge order is row-major, right before down")
  {
    Graph const g = grid_graph(2, 2);
    REQUIRE(g.num_edges() == 4);
    CHECK(g.edge(0) == Edge{0, 1});
    CHECK(g.edge(1) == Edge{0, 2});
    CHECK(g.edge(2) == Edge{1, 3});
    CHECK(g.edge(3) == Edge{2, 3});
    CHECK(g.degree(0) == 2);
  }

  TEST_CASE("invalid edges are rejected")
  {
    CHECK_THROWS_AS(Graph(2, {{0, 0}}), Error);
    CHECK_THROWS_AS(Graph(2, {{0, 2}}), Error);
    CHECK_THROWS_AS(Graph(2, {{0, 1}, {0, 1}}), Error);
  }

  TEST_CASE("divergence and gradient examples")
  {
    Graph const g = chain_graph(2);
    CoeffField p(1, 1, 1);
    p.data = {2.5};
    CoeffField const d = divergence(g, p);
    CHECK(d.at(0, 0, 0) == -2.5);
    CHECK(d.at(1, 0, 0) == 2.5);

    CoeffField const zero = divergence(g, CoeffField(1, 2, 3));
    for (double v : zero.data) { CHECK(v == 0.0); }

    CoeffField y(2, 1, 1);
    y.data = {0.7, -0.2};
    CHECK(gradient(g, y).at(0, 0, 0) == Approx(0.9));

    CoeffField c(4, 2, 2);
    std::fill(c.data.begin(), c.data.end(), 3.0);
    for (double v : gradient(grid_graph(2, 2), c).data) { CHECK(v == 0.0); }
  }

  TEST_CASE("gradient is the negative adjoint of divergence")
  {
    std::mt19937_64 rng(21);
    Graph const g = grid_graph(3, 3);
    for (int t = 0; t < 10; ++t) {
      CoeffField const p = random_field(rng, g.num_edges(), 2, 3);
      CoeffField const y = random_field(rng, g.num_vertices(), 2, 3);
      CHECK(std::abs(inner(divergence(g, p), y) + inner(p, gradient(g, y))) < 1e-12);
    }
  }

  TEST_CASE("shape mismatches raise")
  {
    Graph const g = chain_graph(3);
    CHECK_THROWS_AS(divergence(g, CoeffField(1, 1, 1)), Error);
    CHECK_THROWS_AS(gradient(g, CoeffField(2, 1, 1)), Error);
  }

  TEST_CASE("operator_norm_estimate examples")
  {
    CHECK(operator_norm_estimate(chain_graph(2)) == Approx(std::sqrt(2.0) * 1.01).epsilon(1e-6));
    CHECK(operator_norm_estimate(chain_graph(10)) <= 2.0 * 1.01);

    double const s = std::sin(15 * std::numbers::pi / 32);
    double const bound = std::sqrt(4 * (s * s + s * s));
    double const est = operator_norm_estimate(grid_graph(16, 16));
    CHECK(est >= bound * (1 - 1e-9));
    CHECK(est <= bound * 1.01 * (1 + 1e-9));
  }
}
