#include <doctest.h>

#include <cmath>
#include <random>

#include "fwav/cases.hpp"
#include "fwav/constraints.hpp"
#include "fwav/errors.hpp"
#include "fwav/planner.hpp"
#include "fwav/qp.hpp"

using namespace fwav;
using namespace fwav::planner;

namespace {

ConstraintSet free_space() {
  ConstraintSet c;
  c.end.position = Vec3(1.0, 0.5, 0.2);
  return c;
}

PlanOptions quick(int restarts = 2) {
  PlanOptions o;
  o.restarts = restarts;
  return o;
}

}  // namespace

TEST_CASE("sphere and cylinder clearance") {
  const Sphere s{Vec3(0.5, 0.5, 0.5), 0.5};
  CHECK(clearance(s, Vec3(0.5, 0.5, 1.5)) == doctest::Approx(0.5));
  CHECK(clearance(s, Vec3(0.5, 0.5, 0.5)) == doctest::Approx(-0.5));
  CHECK(clearance(s, Vec3(0.5, 0.5, 1.5), 0.05) == doctest::Approx(0.45));
  // Origin form measures from the inertial origin.
  CHECK(clearance(s, Vec3(0.0, 0.0, 2.0), 0.0, true) == doctest::Approx(1.5));
  const CylinderX c{Eigen::Vector2d(0.5, -0.2), 0.3};
  CHECK(clearance(c, Vec3(100.0, 0.5, 0.3)) == doctest::Approx(0.5 - 0.3));
  const Vec3 g = clearance_gradient(c, Vec3(3.0, 1.0, -0.2));
  CHECK((g - Vec3(0, 1, 0)).norm() < 1e-12);
  CHECK(clearance_gradient(s, s.center).norm() == doctest::Approx(1.0));
}

TEST_CASE("sample grid and heading rate") {
  const auto t = sample_times(3.0, 0.15);
  REQUIRE(t.size() == 19);
  CHECK(t.front() == doctest::Approx(0.15));
  CHECK(t.back() == doctest::Approx(2.85));
  // Circle of radius r at rate w: heading rate w.
  const double r = 0.7, w = 1.3;
  CHECK(heading_rate(Vec3(0, r * w, 0), Vec3(-r * w * w, 0, 0)) == doctest::Approx(w));
  CHECK(rec(-1.0) == 0.0);
  CHECK(rec(2.0) == 2.0);
}

TEST_CASE("constraint set validation") {
  ConstraintSet c = free_space();
  c.v_h_max = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = free_space();
  c.obstacles.push_back(Sphere{Vec3::Zero(), -0.1});
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  PlanOptions o;
  o.restarts = 0;
  CHECK_THROWS_AS(o.validate(), InvalidInput);
  for (const auto& name : case_names()) CHECK_NOTHROW(case_library(name).constraints.validate());
  CHECK_THROWS_AS(case_library("zz"), InvalidInput);
}

TEST_CASE("equality system rows and rank") {
  ConstraintSet c = free_space();
  const Layout L{2, 6, 1.5};
  const EqualitySystem sys = build_equality_system(c, L);
  CHECK(sys.A.rows() == 18 + 12);
  CHECK(sys.A.cols() == L.size());
  CHECK(sys.rows.front() == "boundary.start.position.x");
  CHECK(dependent_rows(sys.A).empty());
  Eigen::MatrixXd dup(3, 4);
  dup << 1, 0, 0, 0, 0, 1, 0, 0, 2, 0, 0, 0;
  const auto d = dependent_rows(dup);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == 2);
}

TEST_CASE("waypoint duplicating a boundary row is reported") {
  ConstraintSet c = free_space();
  c.waypoints.push_back({0, 0.0, Vec3::Zero()});
  const Layout L{1, 6, 3.0};
  try {
    solve_qp_equality(c, ObjectiveWeights{1.0, 0.0}, L);
    FAIL("expected RankDeficient");
  } catch (const RankDeficient& e) {
    CHECK(std::string(e.what()).find("waypoint[0]") != std::string::npos);
  }
}

TEST_CASE("equality optimum agrees with a one-dimensional search") {
  // Order 6, one segment: 18 boundary rows leave one free coefficient per
  // axis. Minimize the snap integral over it by golden-section search.
  ConstraintSet c = free_space();
  c.start.velocity = Vec3(0.2, 0.0, 0.0);
  const Layout L{1, 6, 3.0};
  const QpSolution qp = solve_qp_equality(c, ObjectiveWeights{1.0, 0.0}, L);
  CHECK(qp.kkt_residual < 1e-8);
  const EqualitySystem sys = build_equality_system(c, L);
  CHECK((sys.A * trajectory_to_vector(qp.traj) - sys.b).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.A);
  const Eigen::MatrixXd Z = lu.kernel();
  REQUIRE(Z.cols() == 3);
  const Eigen::VectorXd x0 = sys.A.completeOrthogonalDecomposition().solve(sys.b);
  auto f = [&](int axis, double y) {
    const Eigen::VectorXd x = x0 + Z.col(axis) * y;
    return snap_integral(trajectory_from_vector(x, L));
  };
  Eigen::VectorXd best = x0;
  for (int a = 0; a < 3; ++a) {
    double lo = -1e3, hi = 1e3;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
      const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
      (f(a, m1) < f(a, m2) ? hi : lo) = (f(a, m1) < f(a, m2) ? m2 : m1);
    }
    best += Z.col(a) * 0.5 * (lo + hi);
  }
  const double ref = snap_integral(trajectory_from_vector(best, L));
  CHECK(qp.objective == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("path-length weight is rejected by the closed form") {
  CHECK_THROWS_AS(solve_qp_equality(free_space(), ObjectiveWeights{1.0, 0.1}, Layout{1, 6, 3.0}),
                  InvalidInput);
}

TEST_CASE("unconstrained planning returns the closed form") {
  const ConstraintSet c = free_space();
  const ObjectiveWeights w{1.0, 0.0};
  const PlanResult r = plan(c, w, quick());
  const QpSolution qp = solve_qp_equality(c, w, quick().layout());
  CHECK(r.report.feasible);
  CHECK(r.report.objective == doctest::Approx(qp.objective).epsilon(1e-9));
  CHECK(r.report.residuals.max_equality() < 1e-9);
}

TEST_CASE("obstacle planning is feasible and respects equalities") {
  ConstraintSet c = free_space();
  c.end.position = Vec3(1, 1, 1);
  c.obstacles.push_back(Sphere{Vec3(0.5, 0.5, 0.5), 0.3});
  const PlanResult r = plan(c, ObjectiveWeights{}, quick(4));
  CHECK(r.report.feasible);
  CHECK(r.report.residuals.max_equality() < 1e-8);
  CHECK(r.report.residuals.max_inequality() <= 1e-6);
  for (double t : sample_times(3.0, c.sample_interval)) {
    CHECK(clearance(c.obstacles[0], r.traj.eval(t)) >= -1e-6);
  }
  CHECK(r.report.kkt_residual < 1e-3);
}

TEST_CASE("planning is deterministic and independent of threading") {
  const PlanningCase pc = case_library("b");
  PlanOptions o = pc.options;
  o.restarts = 4;
  const PlanResult a = plan(pc.constraints, pc.weights, o);
  const PlanResult b = plan(pc.constraints, pc.weights, o);
  o.parallel = false;
  const PlanResult c = plan(pc.constraints, pc.weights, o);
  CHECK((trajectory_to_vector(a.traj) - trajectory_to_vector(b.traj)).norm() == 0.0);
  CHECK((trajectory_to_vector(a.traj) - trajectory_to_vector(c.traj)).norm() == 0.0);
  CHECK(a.report.best_restart == c.report.best_restart);
}

TEST_CASE("best restart has the lowest objective among feasible restarts") {
  const PlanningCase pc = case_library("a");
  PlanOptions o = pc.options;
  o.restarts = 6;
  const PlanResult r = plan(pc.constraints, pc.weights, o);
  REQUIRE(r.report.restarts.size() == 6);
  for (const auto& s : r.report.restarts) {
    if (s.feasible) CHECK(r.report.objective <= s.objective + 1e-12);
  }
}

TEST_CASE("impossible limits raise InfeasiblePlan with the worst residual") {
  ConstraintSet c = free_space();
  c.end.position = Vec3(3.0, 0.0, 0.0);
  c.v_h_max = 0.2;
  PlanOptions o = quick(2);
  o.max_outer = 8;
  try {
    plan(c, ObjectiveWeights{}, o);
    FAIL("expected InfeasiblePlan");
  } catch (const InfeasiblePlan& e) {
    CHECK(e.residual() == "speed.horizontal");
    CHECK(e.value() > 0.0);
    CHECK(e.time() > 0.0);
    CHECK(e.time() < 3.0);
  }
}
