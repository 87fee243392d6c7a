#include "helpers.hpp"

#include "polymrf/error.hpp"
#include "polymrf/model.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace polymrf;
using doctest::Approx;

namespace {

// For descriptions whose Gram variables are fixed by the affine equations
// once lambda is fixed (all SOS multipliers of degree <= 1), solve for them
// and test membership of the completed vector.
bool member_with_unique_grams(const ConeDescription& desc, std::span<const double> lambda)
{
  int const nl = static_cast<int>(lambda.size());
  int const ng = desc.num_vars - nl;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<int>(desc.affine_eqs.size()), ng);
  Eigen::VectorXd b(static_cast<int>(desc.affine_eqs.size()));
  for (int r = 0; r < A.rows(); ++r) {
    auto const& eq = desc.affine_eqs[r];
    b[r] = eq.rhs;
    for (auto const& t : eq.terms) {
      if (t.var < nl) {
        b[r] -= t.coeff * lambda[t.var];
      } else {
        A(r, t.var - nl) += t.coeff;
      }
    }
  }
  REQUIRE(Eigen::FullPivLU<Eigen::MatrixXd>(A).rank() == ng);
  Eigen::VectorXd const g = A.colPivHouseholderQr().solve(b);
  std::vector<double> v(lambda.begin(), lambda.end());
  v.insert(v.end(), g.data(), g.data() + ng);
  return desc.contains(v, 1e-9);
}

} // namespace

TEST_SUITE("model")
{
  TEST_CASE("DualConfig::uniform")
  {
    auto c = DualConfig::uniform({-1.0, 1.0}, 4, 3, Metric::TV);
    CHECK(c.pieces() == 4);
    CHECK(c.knots[2] == 0.0);
    CHECK(c.continuity);
    CHECK_FALSE(DualConfig::uniform({-1.0, 1.0}, 2, 1, Metric::Potts).continuity);
    CHECK_THROWS_AS(DualConfig::uniform({-1.0, 1.0}, 0, 1, Metric::TV), Error);
  }

  TEST_CASE("TV description, deg 1, K 1")
  {
    auto const cfg = DualConfig::uniform({-1.0, 1.0}, 1, 1, Metric::TV);
    auto const desc = lipschitz_description_tv(cfg);
    std::vector<double> lambda{1.0, 1.0}; // 1 + x: slope 1 and lambda(-1) = 0
    CHECK(member_with_unique_grams(desc, lambda));
    lambda = {-1.0, -1.0};
    CHECK(member_with_unique_grams(desc, lambda));
    lambda = {1.2, 1.2};
    CHECK_FALSE(member_with_unique_grams(desc, lambda));
    lambda = {0.0, 1.0}; // x itself violates the gauge
    CHECK_FALSE(member_with_unique_grams(desc, lambda));
  }

  TEST_CASE("TV description rejects x^2 - 1 at deg 2")
  {
    auto const cfg = DualConfig::uniform({-1.0, 1.0}, 1, 2, Metric::TV);
    std::vector<double> const lambda{-1.0, 0.0, 1.0};
    CHECK_FALSE(member_with_unique_grams(lipschitz_description_tv(cfg), lambda));
    CHECK_FALSE(is_nonneg_on_interval(Polynomial{1.0} - derivative(Polynomial(lambda)), {-1.0, 1.0}, 1e-9));
  }

  TEST_CASE("TV description agrees with the root oracle")
  {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(-1.2, 1.2);
    Interval const dom(-1.0, 3.0);
    for (int pieces : {1, 2, 3}) {
      for (int deg : {1, 2}) {
        auto const cfg = DualConfig::uniform(dom, pieces, deg, Metric::TV);
        double const weight = 0.7;
        auto const desc = lipschitz_description_tv(cfg, weight);
        for (int t = 0; t < 40; ++t) {
          // Random slopes, then chain the constants for continuity and gauge.
          std::vector<double> lambda(pieces * (deg + 1));
          double left = 0.0;
          bool lipschitz = true;
          for (int k = 0; k < pieces; ++k) {
            double const h = cfg.piece(k).half_width();
            std::vector<double> q(deg + 1);
            for (int j = 1; j <= deg; ++j) { q[j] = U(rng) * weight * h / deg; }
            Polynomial p(q);
            p[0] = left - eval(p, -1.0);
            left = eval(p, 1.0);
            for (int j = 0; j <= deg; ++j) { lambda[k * (deg + 1) + j] = p[j]; }
            Polynomial const dp = derivative(p);
            lipschitz = lipschitz && is_nonneg_on_interval(Polynomial{weight * h} - dp, {-1.0, 1.0}, 1e-12) &&
                        is_nonneg_on_interval(Polynomial{weight * h} + dp, {-1.0, 1.0}, 1e-12);
          }
          CHECK(member_with_unique_grams(desc, lambda) == lipschitz);
        }
      }
    }
  }

  TEST_CASE("Potts description examples")
  {
    auto const cfg = DualConfig::uniform({-1.0, 1.0}, 1, 1, Metric::Potts);
    auto const desc = lipschitz_description_potts(cfg);
    std::vector<double> lambda{0.5, 0.0};
    CHECK(member_with_unique_grams(desc, lambda));
    lambda = {1.5, 0.0};
    CHECK_FALSE(member_with_unique_grams(desc, lambda));
    lambda = {0.5, 0.5};
    CHECK(member_with_unique_grams(desc, lambda));
    lambda = {0.5, 0.6};
    CHECK_FALSE(member_with_unique_grams(desc, lambda));
  }

  TEST_CASE("discretize merges unary knots and picks the moment degree")
  {
    Problem pb;
    pb.graph = chain_graph(2);
    pb.unaries = {PiecewisePolynomial({-1.0, 0.25, 1.0}, {Polynomial{0, 1}, Polynomial{0, 0, 0, 1}}),
                  test::single({1.0, 2.0})};
    pb.config = DualConfig::uniform({-1.0, 1.0}, 2, 2, Metric::TV);
    Discretization const d = discretize(pb);
    REQUIRE(d.pieces() == 3);
    CHECK(d.knots[1] == 0.0);
    CHECK(d.knots[2] == 0.25);
    CHECK(d.moment_deg == 3);
    CHECK(d.dual_piece == std::vector<int>{0, 1, 1});

    pb.config.moment_deg = 5;
    CHECK(discretize(pb).moment_deg == 5);
    pb.config.moment_deg = 2;
    CHECK_THROWS_AS(discretize(pb), Error);
  }

  TEST_CASE("unaries in moment-piece coordinates reproduce the originals")
  {
    std::mt19937_64 rng(32);
    Problem pb = test::random_grid(2, 1, 4, 33, Metric::TV, 3, 2);
    Discretization const d = discretize(pb);
    for (int u = 0; u < 2; ++u) {
      for (int m = 0; m < d.pieces(); ++m) {
        Interval const iv = d.piece(m);
        for (double s : {-1.0, 0.0, 0.4, 1.0}) {
          CHECK(eval(d.unary[u][m], s) == Approx(eval(pb.unaries[u].piece(0), iv.center() + iv.half_width() * s)));
        }
      }
    }
  }

  TEST_CASE("transfer matrices re-express dual pieces")
  {
    std::mt19937_64 rng(34);
    Problem pb = test::random_grid(2, 1, 2, 35, Metric::TV, 2, 3);
    pb.unaries[0] = PiecewisePolynomial({-1.0, -0.3, 0.6, 1.0}, {Polynomial{0}, Polynomial{1}, Polynomial{0}});
    Discretization const d = discretize(pb);
    for (int m = 0; m < d.pieces(); ++m) {
      int const k = d.dual_piece[m];
      Interval const dual = pb.config.piece(k), mom = d.piece(m);
      Eigen::VectorXd q(4);
      for (int j = 0; j < 4; ++j) { q[j] = std::normal_distribution<double>()(rng); }
      Eigen::VectorXd const r = d.transfer[m] * q;
      for (double s : {-1.0, -0.2, 0.5, 1.0}) {
        double const x = mom.center() + mom.half_width() * s;
        double const t = (x - dual.center()) / dual.half_width();
        CHECK(eval(Polynomial(std::vector<double>(r.data(), r.data() + r.size())), s) ==
              Approx(eval(Polynomial(std::vector<double>(q.data(), q.data() + 4)), t)));
      }
    }
  }

  TEST_CASE("discretize validation")
  {
    Problem pb = test::two_vertex_quadratic();
    pb.unaries.pop_back();
    CHECK_THROWS_AS(discretize(pb), Error);

    pb = test::two_vertex_quadratic(2, 1);
    pb.config.continuity = false;
    try {
      (void)discretize(pb);
      FAIL("expected ConfigMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigMismatch);
    }

    pb = test::two_vertex_quadratic();
    pb.unaries[0] = test::single({0.0}, {0.0, 1.0});
    CHECK_THROWS_AS(discretize(pb), Error);

    pb = test::two_vertex_quadratic();
    pb.edge_weights = {-1.0};
    CHECK_THROWS_AS(discretize(pb), Error);
  }

  TEST_CASE("assemble on a 16x16 grid")
  {
    Problem const pb = test::random_grid(16, 16, 4, 36, Metric::TV, 2, 2);
    ConicProgram const prog = assemble(pb);
    auto const& lay = prog.layout;
    int const md = prog.disc->moment_deg;
    CHECK(md == 4);
    CHECK(lay.vertex_stride == 2 * (md + 1));
    CHECK(lay.edge_stride == 2 * 3);
    CHECK(prog.primal_cones.hyperplanes.size() == 256);
    CHECK(lay.grams - lay.duals == 480 * lay.edge_stride);
    CHECK(prog.K.rows() == prog.num_dual());
    CHECK(prog.K.cols() == prog.num_primal());
    // Every moment piece carries its Hankel blocks.
    int hankel_blocks = 0;
    for (auto const& b : prog.dual_cones.psd) { hankel_blocks += b.offset >= lay.hankels; }
    CHECK(hankel_blocks == 256 * 2 * 2);
  }

  TEST_CASE("dual rows of K are the lifted negative divergence")
  {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> normal;
    Problem const pb = test::random_grid(3, 3, 3, 38, Metric::TV, 2, 2);
    ConicProgram const prog = assemble(pb);
    auto const& d = *prog.disc;
    auto const& lay = prog.layout;
    int const md = d.moment_deg;
    int const n = pb.config.deg + 1;
    Graph const& g = pb.graph;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(prog.num_primal());
    for (int i = 0; i < g.num_vertices() * lay.vertex_stride; ++i) { x[lay.moments + i] = normal(rng); }
    CoeffField p(g.num_edges(), pb.config.pieces(), n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(prog.num_dual());
    for (size_t i = 0; i < p.data.size(); ++i) { y[lay.duals + i] = p.data[i] = normal(rng); }
    double const lhs = y.dot(prog.K * x);

    CoeffField const div = divergence(g, p);
    double rhs = 0.0;
    for (int u = 0; u < g.num_vertices(); ++u) {
      for (int m = 0; m < d.pieces(); ++m) {
        Eigen::VectorXd q(n);
        for (int j = 0; j < n; ++j) { q[j] = div.at(u, d.dual_piece[m], j); }
        Eigen::VectorXd const lifted = d.transfer[m] * q;
        for (int i = 0; i <= md; ++i) { rhs -= lifted[i] * x[lay.moments + u * lay.vertex_stride + m * (md + 1) + i]; }
      }
    }
    CHECK(lhs == Approx(rhs).epsilon(1e-10));
  }
}
