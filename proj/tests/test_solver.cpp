#include "helpers.hpp"

#include "polymrf/error.hpp"
#include "polymrf/oracle.hpp"
#include "polymrf/rounding.hpp"
#include "polymrf/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace polymrf;
using doctest::Approx;

namespace {

Problem single_vertex(const Polynomial& f, int pieces, int deg)
{
  Problem pb;
  pb.graph = Graph(1, {});
  pb.unaries = {PiecewisePolynomial::single(f, {-1.0, 1.0})};
  pb.config = DualConfig::uniform({-1.0, 1.0}, pieces, deg, Metric::TV);
  return pb;
}

Polynomial row(const DualCoefficients& p, int e, int k)
{
  std::vector<double> c(p.cols);
  for (int j = 0; j < p.cols; ++j) { c[j] = p.at(e, k, j); }
  return Polynomial(c);
}

// lambda of edge e at x, through the configuration's unit coordinates
double lambda_at(const DualCoefficients& p, const DualConfig& cfg, int e, double x)
{
  int k = 0;
  while (k + 1 < cfg.pieces() && x > cfg.knots[k + 1]) { ++k; }
  Interval const iv = cfg.piece(k);
  return eval(row(p, e, k), (x - iv.center()) / iv.half_width());
}

} // namespace

TEST_SUITE("solver")
{
  TEST_CASE("single vertex x^4 - x^2")
  {
    Problem const pb = single_vertex(Polynomial{0, 0, -1, 0, 1}, 1, 4);
    SolverOptions opts;
    opts.max_iters = 20000;
    Solution const s = pdhg_solve(assemble(pb), opts);
    CHECK(std::abs(s.dual_energy + 0.25) <= 1e-4);
    CHECK(s.iterations <= 20000);
  }

  TEST_CASE("two-vertex TV quadratic")
  {
    Problem const pb = test::two_vertex_quadratic();
    SolverOptions opts;
    opts.max_iters = 20000;
    Solution const s = pdhg_solve(assemble(pb), opts);
    CHECK(std::abs(s.dual_energy - 0.5) <= 1e-3);
    CHECK(s.dual_energy <= 0.5 + 1e-9);
    CHECK(std::abs(dual_energy(s.dual, pb) - s.dual_energy) < 1e-12);
  }

  TEST_CASE("scalar step rule reaches the same value")
  {
    Problem const pb = test::two_vertex_quadratic();
    SolverOptions opts;
    opts.max_iters = 20000;
    opts.steps = StepRule::Scalar;
    Solution const s = pdhg_solve(assemble(pb), opts);
    CHECK(std::abs(s.dual_energy - 0.5) <= 1e-3);
  }

  TEST_CASE("explicit steps violating the bound are rejected")
  {
    ConicProgram const prog = assemble(test::two_vertex_quadratic());
    SolverOptions opts;
    opts.steps = StepRule::Scalar;
    opts.tau = opts.sigma = 2.0 / operator_norm(prog);
    try {
      (void)pdhg_solve(prog, opts);
      FAIL("expected StepSizeViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::StepSizeViolation);
    }
  }

  TEST_CASE("zero unaries give zero energy and normalized moments")
  {
    Problem pb = test::random_grid(3, 2, 0, 1, Metric::TV, 2, 2);
    for (auto& f : pb.unaries) { f = test::single({0.0}); }
    SolverOptions opts;
    opts.max_iters = 2000;
    Solution const s = pdhg_solve(assemble(pb), opts);
    CHECK(std::abs(s.dual_energy) < 1e-9);
    for (auto const& v : s.moments) {
      double mass = 0.0;
      for (auto const& b : v) { mass += b.moments[0]; }
      CHECK(mass == Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("callback sees nondecreasing best energies")
  {
    Problem const pb = test::random_grid(3, 3, 4, 41, Metric::TV, 2, 2);
    SolverOptions opts;
    opts.max_iters = 1500;
    std::vector<double> best;
    opts.callback = [&](const Progress& p) { best.push_back(p.best_dual_energy); };
    Solution const s = pdhg_solve(assemble(pb), opts);
    REQUIRE(best.size() >= 2);
    for (size_t i = 1; i < best.size(); ++i) { CHECK(best[i] >= best[i - 1]); }
    CHECK(best.back() == s.dual_energy);
    CHECK(s.history.size() == best.size());
  }

  TEST_CASE("make_dual_feasible examples")
  {
    Problem pb = test::two_vertex_quadratic(1, 1);
    DualCoefficients p(1, 1, 2);
    p.data = {1.0, 1.0};
    CHECK(make_dual_feasible(p, pb).data == p.data);

    p.data = {2.0, 2.0}; // 2 + 2x, Lipschitz constant 2
    auto q = make_dual_feasible(p, pb);
    CHECK(q.at(0, 0, 0) == Approx(1.0));
    CHECK(q.at(0, 0, 1) == Approx(1.0));

    p.data = {0.0, 2.0}; // 2x, re-gauged to 2 + 2x then scaled
    q = make_dual_feasible(p, pb);
    CHECK(q.at(0, 0, 0) == Approx(1.0));
    CHECK(q.at(0, 0, 1) == Approx(1.0));
  }

  TEST_CASE("make_dual_feasible keeps TV duals continuous and Lipschitz")
  {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> normal;
    Problem pb = test::random_grid(2, 2, 2, 43, Metric::TV, 3, 3);
    pb.edge_weights = {0.5, 1.0, 2.0, 0.75};
    for (int t = 0; t < 10; ++t) {
      DualCoefficients p(pb.graph.num_edges(), 3, 4);
      for (double& v : p.data) { v = 3.0 * normal(rng); }
      auto const q = make_dual_feasible(p, pb);
      CHECK_NOTHROW((void)dual_energy(q, pb));
      for (int e = 0; e < pb.graph.num_edges(); ++e) {
        CHECK(std::abs(lambda_at(q, pb.config, e, -1.0)) < 1e-12);
        double prev = lambda_at(q, pb.config, e, -1.0);
        for (int i = 1; i <= 1000; ++i) {
          double const x = -1.0 + 2.0 * i / 1000;
          double const cur = lambda_at(q, pb.config, e, x);
          CHECK(std::abs(cur - prev) <= pb.edge_weights[e] * 0.002 * (1 + 1e-9));
          prev = cur;
        }
      }
    }
  }

  TEST_CASE("make_dual_feasible maps Potts duals into [0, w]")
  {
    std::mt19937_64 rng(44);
    std::normal_distribution<double> normal;
    Problem pb = test::random_grid(2, 1, 2, 45, Metric::Potts, 2, 3);
    for (int t = 0; t < 10; ++t) {
      DualCoefficients p(1, 2, 4);
      for (double& v : p.data) { v = 2.0 * normal(rng); }
      auto const q = make_dual_feasible(p, pb);
      for (int i = 0; i <= 10000; ++i) {
        double const v = lambda_at(q, pb.config, 0, -1.0 + 2.0 * i / 10000);
        CHECK(v >= -1e-9);
        CHECK(v <= 1.0 + 1e-9);
      }
    }
  }

  TEST_CASE("dual_energy examples")
  {
    Problem const pb = test::random_grid(3, 1, 4, 46, Metric::TV, 2, 2);
    DualCoefficients const zero(pb.graph.num_edges(), 2, 3);
    double expected = 0.0;
    for (auto const& f : pb.unaries) { expected += piecewise_min(f).value; }
    CHECK(dual_energy(zero, pb) == Approx(expected).epsilon(1e-12));

    // Zero unaries: every feasible dual is a lower bound on 0.
    Problem flat = test::two_vertex_quadratic(2, 2);
    for (auto& f : flat.unaries) { f = test::single({0.0}); }
    std::mt19937_64 rng(47);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 20; ++t) {
      DualCoefficients p(1, 2, 3);
      for (double& v : p.data) { v = normal(rng); }
      CHECK(dual_energy(make_dual_feasible(p, flat), flat) <= 1e-12);
    }
  }

  TEST_CASE("dual_energy rejects infeasible duals")
  {
    Problem const pb = test::two_vertex_quadratic(1, 1);
    DualCoefficients p(1, 1, 2);
    p.data = {0.0, 1.5};
    try {
      (void)dual_energy(p, pb);
      FAIL("expected InfeasibleDual");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InfeasibleDual);
    }
  }

  TEST_CASE("weak duality against random labelings")
  {
    std::mt19937_64 rng(48);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (Metric metric : {Metric::TV, Metric::Potts}) {
      Problem const pb = test::random_grid(3, 3, 4, 49, metric, 2, 2);
      for (int t = 0; t < 10; ++t) {
        DualCoefficients p(pb.graph.num_edges(), 2, 3);
        for (double& v : p.data) { v = normal(rng); }
        double const d = dual_energy(make_dual_feasible(p, pb), pb);
        Labeling x(9);
        for (double& v : x) { v = U(rng); }
        CHECK(d <= rounded_energy(x, pb) + 1e-9);
      }
    }
  }

  TEST_CASE("embed_dual preserves functions and energies")
  {
    std::mt19937_64 rng(50);
    std::normal_distribution<double> normal;
    Problem pb = test::random_grid(3, 1, 3, 51, Metric::TV, 2, 2);
    DualCoefficients p(2, 2, 3);
    for (double& v : p.data) { v = normal(rng); }
    p = make_dual_feasible(p, pb);
    double const before = dual_energy(p, pb);

    DualConfig const from = pb.config;
    DualConfig const to = DualConfig::uniform({-1.0, 1.0}, 4, 3, Metric::TV);
    DualCoefficients const q = embed_dual(p, from, to);
    for (int e = 0; e < 2; ++e) {
      for (double x : {-1.0, -0.7, -0.1, 0.0, 0.3, 0.99}) {
        CHECK(lambda_at(q, to, e, x) == Approx(lambda_at(p, from, e, x)).scale(1).epsilon(1e-12));
      }
    }
    pb.config = to;
    CHECK(dual_energy(q, pb) == Approx(before).epsilon(1e-10));

    CHECK_THROWS_AS(embed_dual(p, from, DualConfig::uniform({-1.0, 1.0}, 3, 3, Metric::TV)), Error);
    CHECK_THROWS_AS(embed_dual(p, from, DualConfig::uniform({-1.0, 1.0}, 4, 1, Metric::TV)), Error);
  }

  TEST_CASE("warm starts never lose energy")
  {
    Problem pb = test::random_grid(4, 4, 4, 52, Metric::TV, 1, 2);
    SolverOptions opts;
    opts.max_iters = 1000;
    Solution const coarse = pdhg_solve(assemble(pb), opts);
    DualConfig const from = pb.config;
    pb.config = DualConfig::uniform({-1.0, 1.0}, 2, 3, Metric::TV);
    opts.warm_dual = embed_dual(coarse.dual, from, pb.config);
    opts.max_iters = 200;
    Solution const fine = pdhg_solve(assemble(pb), opts);
    CHECK(fine.dual_energy >= coarse.dual_energy - 1e-12);
  }

  TEST_CASE("support_lipschitz examples")
  {
    Problem pb = test::two_vertex_quadratic(3, 2);
    Discretization const d = discretize(pb);
    std::vector<double> const zero(d.pieces() * (d.moment_deg + 1), 0.0);
    CHECK(std::abs(support_lipschitz(zero, pb)) < 1e-6);

    auto delta = test::lifted_difference(d, -0.8, 0.35);
    double const v = support_lipschitz(delta, pb);
    CHECK(std::abs(v - 1.15) <= 1e-3);
    for (double& x : delta) { x *= 2.5; }
    CHECK(support_lipschitz(delta, pb) == Approx(2.5 * v).epsilon(1e-4));

    pb.edge_weights = {0.5};
    CHECK(std::abs(support_lipschitz(test::lifted_difference(d, -0.8, 0.35), pb) - 0.575) <= 1e-3);
  }

  TEST_CASE("relaxed objective sandwiches the dual energy")
  {
    Problem const pb = test::two_vertex_quadratic();
    SolverOptions opts;
    opts.max_iters = 20000;
    Solution s = pdhg_solve(assemble(pb), opts);
    CHECK(std::isnan(s.relaxed_objective));
    double const r = relaxed_objective(s, pb);
    CHECK(r == s.relaxed_objective);
    CHECK(r >= s.dual_energy - 1e-3);
    CHECK(std::abs(r - 0.5) <= 5e-3);
  }

  TEST_CASE("sos_lower_bound brackets the minimum")
  {
    Interval const iv(-1.0, 1.0);
    auto const b = sos_lower_bound(Polynomial{0, 0, -1, 0, 1}, iv);
    CHECK(b.value <= -0.25 + 1e-9);
    CHECK(b.certified_negative);

    auto const c = sos_lower_bound(Polynomial{2, 0, 1}, iv, 100000, 1e-6);
    CHECK(c.value >= -1e-6);
    CHECK(c.value <= 2.0 + 1e-9);
    CHECK_FALSE(c.certified_negative);
  }
}
