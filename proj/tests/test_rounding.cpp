#include "helpers.hpp"

#include "polymrf/error.hpp"
#include "polymrf/rounding.hpp"
#include "polymrf/solver.hpp"

#include <doctest.h>

#include <random>

using namespace polymrf;
using doctest::Approx;

namespace {

MomentBlock dirac_block(double x, Interval piece, double mass, int deg = 2)
{
  double const s = (x - piece.center()) / piece.half_width();
  auto m = dirac_moments(s, deg);
  for (double& v : m) { v *= mass; }
  return {m, piece};
}

} // namespace

TEST_SUITE("rounding")
{
  TEST_CASE("round_mode_mean examples")
  {
    VertexMoments y{{dirac_block(0.3, {-1.0, 1.0}, 1.0)}};
    CHECK(round_mode_mean(y)[0] == Approx(0.3));

    y = {{dirac_block(-0.4, {-1.0, 0.0}, 0.9), dirac_block(0.7, {0.0, 1.0}, 0.1)}};
    CHECK(round_mode_mean(y)[0] == Approx(-0.4));
  }

  TEST_CASE("round_mean examples")
  {
    VertexMoments y{{dirac_block(0.3, {-1.0, 1.0}, 1.0)}};
    CHECK(round_mean(y, MeanVariant::MomentMean)[0] == Approx(0.3));
    CHECK(round_mean(y, MeanVariant::KnotWeighted)[0] == Approx(-1.0));

    y = {{dirac_block(-0.5, {-1.0, 0.0}, 0.5), dirac_block(0.5, {0.0, 1.0}, 0.5)}};
    CHECK(round_mean(y)[0] == Approx(0.0).scale(1));
    CHECK(round_mean(y, MeanVariant::KnotWeighted)[0] == Approx(-0.5));
  }

  TEST_CASE("rounding is exact on Dirac measures")
  {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Interval> const pieces{{-1.0, -0.2}, {-0.2, 0.5}, {0.5, 1.0}};
    for (int t = 0; t < 50; ++t) {
      double const x = U(rng);
      std::vector<MomentBlock> v;
      for (auto const& p : pieces) {
        v.push_back(p.contains(x) && (v.empty() || v.back().moments[0] == 0.0) ? dirac_block(x, p, 1.0)
                                                                                : MomentBlock{{0, 0, 0}, p});
      }
      VertexMoments const y{v};
      CHECK(round_mode_mean(y)[0] == Approx(x));
      CHECK(round_mean(y)[0] == Approx(x));
    }
  }

  TEST_CASE("degenerate mass raises")
  {
    VertexMoments const y{{MomentBlock{{0, 0, 0}, {-1.0, 1.0}}}};
    try {
      (void)round_mode_mean(y);
      FAIL("expected DegenerateMass");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateMass);
    }
    CHECK_THROWS_AS(round_mean(y), Error);
  }

  TEST_CASE("rounded_energy examples")
  {
    Problem pb = test::two_vertex_quadratic();
    CHECK(rounded_energy({0.0, 0.0}, pb) == Approx(0.5));
    CHECK(rounded_energy({0.5, -0.5}, pb) == Approx(1.0));
    CHECK_THROWS_AS(rounded_energy({2.0, 0.0}, pb), Error);

    for (auto& f : pb.unaries) { f = test::single({0.0}); }
    CHECK(rounded_energy({0.3, 0.3}, pb) == 0.0);

    pb.metric = Metric::Potts;
    pb.edge_weights = {2.0};
    CHECK(rounded_energy({0.3, 0.4}, pb) == 2.0);
  }

  TEST_CASE("converged two-vertex instance rounds to the midpoint")
  {
    Problem const pb = test::two_vertex_quadratic();
    SolverOptions opts;
    opts.max_iters = 20000;
    Solution const s = pdhg_solve(assemble(pb), opts);
    Labeling const x = round_mode_mean(s.moments);
    CHECK(std::abs(x[0]) <= 1e-2);
    CHECK(std::abs(x[1]) <= 1e-2);
    CHECK(rounded_energy(x, pb) >= s.dual_energy - 1e-6);
  }
}
