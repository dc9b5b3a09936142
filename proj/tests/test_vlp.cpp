#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pong/vlp.hpp"
#include "grasp_fixtures.hpp"

using namespace pong;
using namespace pong::testsupport;

namespace {

/// Independent oracle: one joint program over all edges with a shared theta,
/// block-diagonal convex weights, and the same cap row the edge-wise solver
/// carries. Equals the edge-wise minimum by LP duality of the decoupled
/// structure; the cap commutes with the minimum.
double joint_theta(const WrenchModel& m, int finger, const Vec2& dir, double cap) {
  const auto& c = m.contacts[finger];
  const Vec3 d3 = dir.x() * c.tangent1 + dir.y() * c.tangent2;
  const int n_w = m.n_wrenches();
  const int n_s = m.n_sides;

  LinearProgram lp;
  lp.eq_matrix = MatX::Zero(7 * n_s + 1, 2 + n_s * n_w);
  lp.eq_rhs = VecX::Zero(7 * n_s + 1);
  lp.objective = VecX::Zero(2 + n_s * n_w);
  lp.objective(0) = 1.0;
  for (int j = 0; j < n_s; ++j) {
    lp.eq_matrix.block(7 * j, 0, 6, 1) = m.t_maps[m.column(finger, j)] * d3;
    lp.eq_matrix.block(7 * j, 1 + j * n_w, 6, n_w) = m.w_bar;
    lp.eq_matrix.row(7 * j + 6).segment(1 + j * n_w, n_w).setOnes();
    lp.eq_rhs(7 * j + 6) = 1.0;
  }
  lp.eq_matrix(7 * n_s, 0) = 1.0;
  lp.eq_matrix(7 * n_s, 1 + n_s * n_w) = 1.0;
  lp.eq_rhs(7 * n_s) = cap;
  const LpSolution sol = solve(lp);
  INFO("joint solve: ", sol.diagnostics);
  REQUIRE(sol.status == LpStatus::optimal);
  return sol.objective_value;
}

Vec2 random_unit2(SeqRng& rng) {
  const double ang = 2.0 * M_PI * rng.uniform();
  return Vec2(std::cos(ang), std::sin(ang));
}

}  // namespace

TEST_CASE("uniform directions validate and reject bad sets") {
  const auto d8 = SearchDirections::uniform(8);
  CHECK(d8.size() == 8);
  d8.validate();
  CHECK((d8.dirs[0] - Vec2(1.0, 0.0)).norm() == 0.0);
  for (int k = 0; k < 8; ++k) {
    CHECK(std::abs(d8.dirs[k].norm() - 1.0) <= 1e-12);
  }

  CHECK_THROWS_AS(SearchDirections::uniform(2), InputError);

  SearchDirections cw = d8;
  std::reverse(cw.dirs.begin(), cw.dirs.end());
  CHECK_THROWS_AS(cw.validate(), InputError);

  SearchDirections scaled = d8;
  scaled.dirs[3] *= 1.1;
  CHECK_THROWS_AS(scaled.validate(), InputError);

  // Two full turns.
  SearchDirections doubled;
  for (int k = 0; k < 6; ++k) {
    const double ang = 4.0 * M_PI * k / 6;
    doubled.dirs.push_back(Vec2(std::cos(ang), std::sin(ang)));
  }
  CHECK_THROWS_AS(doubled.validate(), InputError);
}

TEST_CASE("polygon vertices follow the construction") {
  SeqRng rng(314, 1);
  const WrenchModel m = random_fc_model(rng);

  SearchDirections axes;
  axes.dirs = {Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0), Vec2(0, -1)};
  const PolygonBuild pb = build_polygons(m, axes, 10.0);
  REQUIRE(pb.all_feasible);
  REQUIRE(pb.polygons.size() == static_cast<std::size_t>(m.n_fingers()));
  for (int i = 0; i < m.n_fingers(); ++i) {
    const auto& poly = pb.polygons[i];
    REQUIRE(poly.vertices.size() == 4);
    for (int k = 0; k < 4; ++k) {
      const double theta = pb.solves[i][k].theta;
      CHECK(theta > 0.0);
      CHECK(poly.vertices[k] == theta * axes.dirs[k]);
    }
    // Axis directions give an axis-aligned quadrilateral.
    CHECK(poly.vertices[0].y() == 0.0);
    CHECK(poly.vertices[1].x() == 0.0);
    CHECK(poly.vertices[2].y() == 0.0);
    CHECK(poly.vertices[3].x() == 0.0);
    CHECK(poly.sigma1 == m.contacts[i].sigma1);
    CHECK(poly.sigma2 == m.contacts[i].sigma2);
    CHECK(poly.mean == Vec2(0.0, 0.0));
  }
}

TEST_CASE("joint program equals the edge-wise minimum") {
  SeqRng rng(314, 2);
  int tested = 0;
  while (tested < 200) {
    const WrenchModel m = random_fc_model(rng);
    const int finger = static_cast<int>(rng.below(m.n_fingers()));
    const Vec2 dir = random_unit2(rng);
    // Alternate a cap that almost never binds with one that often does; the
    // equivalence has to hold in both regimes.
    const double cap = (tested % 2 == 0) ? 1e3 : 0.5;
    const VertexSolve vs = solve_vertex(m, finger, dir, cap);
    REQUIRE(vs.feasible);
    const double joint = joint_theta(m, finger, dir, cap);
    CHECK(std::abs(vs.theta - joint) <= 1e-7 * std::max(1.0, vs.theta));
    ++tested;
  }
}

TEST_CASE("perturbations inside the polygons keep force closure") {
  SeqRng rng(314, 3);
  const auto dirs = SearchDirections::uniform(8);
  int checked = 0;
  for (int g = 0; g < 20; ++g) {
    const WrenchModel m = random_fc_model(rng);
    const PolygonBuild pb = build_polygons(m, dirs);
    REQUIRE(pb.all_feasible);
    const int n_f = m.n_fingers();
    for (int s = 0; s < 50; ++s) {
      // Every 5th sample shrinks the polygons first; conservativeness is
      // preserved under scaling toward the origin.
      const double scale = (s % 5 == 4) ? 0.5 : 1.0;
      std::vector<double> e1(n_f);
      std::vector<double> e2(n_f);
      for (int i = 0; i < n_f; ++i) {
        const Vec2 p = scale * sample_in_polygon(rng, pb.polygons[i].vertices);
        e1[i] = p.x();
        e2[i] = p.y();
      }
      const MatX w = perturbed_wrenches(m, e1, e2);
      REQUIRE(origin_in_hull(w));
      ++checked;
    }
  }
  CHECK(checked >= 1000);
}

TEST_CASE("infeasible mean grasp yields no polygons") {
  ContactDistribution c;
  c.position = Vec3(1, 0, 0);
  c.mean_normal = Vec3(-1, 0, 0);
  c.tangent1 = Vec3(0, 1, 0);
  c.tangent2 = Vec3(0, 0, 1);
  c.sigma1 = c.sigma2 = 0.1;
  const auto m = build_wrench_model(std::vector{c}, 0.5, 4);

  const VertexSolve vs = solve_vertex(m, 0, Vec2(1, 0), 1.0);
  CHECK(!vs.feasible);
  CHECK(vs.theta == 0.0);

  const PolygonBuild pb = build_polygons(m, SearchDirections::uniform(8));
  CHECK(!pb.all_feasible);
  CHECK(pb.polygons.empty());
}

TEST_CASE("caps engage and are reported") {
  SeqRng rng(314, 4);
  RandomGraspOptions opt;
  opt.explicit_sigma = true;
  opt.sigma_lo = 1e-3;
  opt.sigma_hi = 2e-3;
  const WrenchModel m = random_fc_model(rng, opt);
  const auto dirs = SearchDirections::uniform(8);

  // Default cap: 8 max(sigma1, sigma2), far below the uncapped step.
  const PolygonBuild capped = build_polygons(m, dirs);
  REQUIRE(capped.all_feasible);
  for (int i = 0; i < m.n_fingers(); ++i) {
    const double cap = 8.0 * std::max(m.contacts[i].sigma1, m.contacts[i].sigma2);
    CHECK(capped.theta_cap(i) == cap);
    for (int k = 0; k < dirs.size(); ++k) {
      const auto& vs = capped.solves[i][k];
      CHECK(vs.capped);
      CHECK(vs.theta == cap);
      CHECK(vs.binding_edge == -1);
      CHECK(!vs.sensitivity_safe);
      CHECK(capped.polygons[i].capped[k]);
    }
  }

  // A generous explicit cap leaves the solve untouched.
  const PolygonBuild open = build_polygons(m, dirs, 1e6);
  for (int i = 0; i < m.n_fingers(); ++i) {
    CHECK(open.theta_cap(i) == 1e6);
    for (int k = 0; k < dirs.size(); ++k) {
      CHECK(!open.solves[i][k].capped);
      CHECK(open.solves[i][k].theta > capped.solves[i][k].theta);
    }
  }

  // An explicit cap below the uncapped value truncates exactly.
  const PolygonBuild tight = build_polygons(m, dirs, 1e-4);
  for (int i = 0; i < m.n_fingers(); ++i) {
    for (int k = 0; k < dirs.size(); ++k) {
      CHECK(tight.solves[i][k].theta == 1e-4);
      CHECK(tight.solves[i][k].capped);
    }
  }
}

TEST_CASE("thread count does not change the build") {
  SeqRng rng(314, 5);
  const WrenchModel m = random_fc_model(rng);
  const auto dirs = SearchDirections::uniform(8);
  const PolygonBuild a = build_polygons(m, dirs, 0.0, 1);
  const PolygonBuild b = build_polygons(m, dirs, 0.0, 4);
  REQUIRE(a.all_feasible == b.all_feasible);
  REQUIRE(a.polygons.size() == b.polygons.size());
  for (std::size_t i = 0; i < a.polygons.size(); ++i) {
    for (std::size_t k = 0; k < a.polygons[i].vertices.size(); ++k) {
      CHECK(a.polygons[i].vertices[k].x() == b.polygons[i].vertices[k].x());
      CHECK(a.polygons[i].vertices[k].y() == b.polygons[i].vertices[k].y());
    }
  }
}

TEST_CASE("vertex solve reports a coherent certificate") {
  SeqRng rng(314, 6);
  const WrenchModel m = random_fc_model(rng);
  const Vec2 dir = random_unit2(rng);
  const VertexSolve vs = solve_vertex(m, 0, dir, 1e3);
  REQUIRE(vs.feasible);
  CHECK(vs.theta > 0.0);
  CHECK(vs.binding_edge >= 0);
  CHECK(vs.binding_edge < m.n_sides);
  CHECK(vs.lp.status == LpStatus::optimal);
  CHECK(vs.lp.objective_value == vs.theta);
  CHECK(vs.second_gap >= 0.0);
  if (vs.sensitivity_safe) {
    CHECK(!vs.capped);
    CHECK(!vs.lp.rows_dropped);
    CHECK(vs.second_gap > 0.0);
  }

  CHECK_THROWS_AS(solve_vertex(m, -1, dir, 1.0), InputError);
  CHECK_THROWS_AS(solve_vertex(m, m.n_fingers(), dir, 1.0), InputError);
  CHECK_THROWS_AS(solve_vertex(m, 0, Vec2(0.5, 0.5), 1.0), InputError);
  CHECK_THROWS_AS(solve_vertex(m, 0, dir, 0.0), InputError);
}
