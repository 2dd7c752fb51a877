#include <doctest.h>

#include <cmath>

#include "fwav/dynamics.hpp"
#include "fwav/errors.hpp"
#include "fwav/se3.hpp"

using namespace fwav;
using namespace fwav::dynamics;

namespace {

FullSchedule constant(double f, double rud = 0.0, double ele = 0.0) {
  return [=](double) { return FullCommand{f, rud, ele}; };
}

}  // namespace

TEST_CASE("hover is an equilibrium of the full model") {
  const FwavParams p;
  FwavState s;
  s.f_flap = p.hover_frequency();
  const Vec16 d = full_rhs(s, FullCommand{s.f_flap, 0, 0}, p);
  CHECK(d.norm() < 1e-12);
}

TEST_CASE("free fall without drag is exact under RK4") {
  FwavParams p;
  p.k_d.setZero();
  const auto log = integrate_full(FwavState{}, constant(0.0), p, 0.01, 1.0);
  const FwavState& end = log.back().x;
  CHECK(end.p.z() == doctest::Approx(-0.5 * p.g).epsilon(1e-12));
  CHECK(end.v.z() == doctest::Approx(-p.g).epsilon(1e-12));
  CHECK(log.size() == 101);
}

TEST_CASE("falling with quadratic drag follows the tanh law") {
  FwavParams p;
  p.k_d = Vec3(0.0, 0.0, 0.02);
  const double vt = std::sqrt(p.m * p.g / p.k_d.z());
  const auto log = integrate_full(FwavState{}, constant(0.0), p, 1e-3, 2.0);
  for (const auto& s : log) {
    CHECK(s.x.v.z() == doctest::Approx(-vt * std::tanh(p.g * s.t / vt)).epsilon(1e-9));
  }
}

TEST_CASE("RK4 error falls with the fourth power of the step") {
  FwavParams p;
  p.k_d = Vec3(0.0, 0.0, 0.02);
  const double vt = std::sqrt(p.m * p.g / p.k_d.z());
  const double exact = -vt * std::tanh(p.g * 1.0 / vt);
  const double e1 = std::abs(integrate_full(FwavState{}, constant(0.0), p, 0.1, 1.0).back().x.v.z() - exact);
  const double e2 = std::abs(integrate_full(FwavState{}, constant(0.0), p, 0.05, 1.0).back().x.v.z() - exact);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("actuator lags are first order") {
  const FwavParams p;
  FwavState s;
  s.f_flap = 10.0;
  const auto log = integrate_full(s, constant(14.0, 0.2, -0.1), p, 1e-3, 0.2);
  for (const auto& r : log) {
    CHECK(r.x.f_flap == doctest::Approx(14.0 - 4.0 * std::exp(-r.t / p.k_flap_c)).epsilon(1e-9));
    CHECK(r.x.theta_rud == doctest::Approx(0.2 - 0.2 * std::exp(-r.t / p.k_rud_c)).epsilon(1e-9));
  }
}

TEST_CASE("torque-free rotation conserves inertial angular momentum") {
  FwavParams p;
  p.g = 0.0;
  FwavState s;
  s.omega = Vec3(1.0, -2.0, 3.0);
  const auto log = integrate_full(s, constant(0.0), p, 1e-4, 1.0);
  const Vec3 L0 = p.J * s.omega;
  for (std::size_t k = 0; k < log.size(); k += 1000) {
    const auto& x = log[k].x;
    const Vec3 L = se3::quat_to_rot(x.q) * (p.J * x.omega);
    CHECK((L - L0).norm() < 1e-9);
    CHECK(std::abs(x.q.eta * x.q.eta + x.q.epsilon.squaredNorm() - 1.0) < 1e-12);
  }
}

TEST_CASE("drag opposes body velocity") {
  const Vec3 k(0.1, 0.2, 0.3);
  const Vec3 v(1.0, -2.0, 0.5);
  const Vec3 d = body_drag(v, k);
  CHECK(d.x() == doctest::Approx(-0.1));
  CHECK(d.y() == doctest::Approx(0.8));
  CHECK(d.z() == doctest::Approx(-0.075));
  CHECK(d.dot(v) < 0.0);
  CHECK_THROWS_AS(thrust_magnitude(-1.0, 1e-3), InvalidInput);
}

TEST_CASE("forward cruise is an equilibrium of the vertical model") {
  const VerticalParams p;
  const double V = 1.2, psi = 0.7;
  const double vcx = p.vk_d.x() * V * V / p.m, vcz = p.g;
  const double n = std::hypot(vcx, vcz);
  VerticalInputs in;
  in.gamma.gamma = Vec3(-vcx / n, 0.0, vcz / n);
  in.f_flap = std::sqrt(p.m * n / p.k_tf);
  VerticalState s;
  s.vv = Vec3(V, 0.0, 0.0);
  s.psi = psi;
  const Vec8 d = vertical_rhs(s, in, p);
  CHECK(d[0] == doctest::Approx(V * std::cos(psi)));
  CHECK(d[1] == doctest::Approx(V * std::sin(psi)));
  CHECK(std::abs(d[3]) < 1e-12);
  CHECK(std::abs(d[5]) < 1e-12);
  CHECK(std::abs(d[7]) < 1e-12);
  CHECK((s.velocity() - Vec3(d[0], d[1], d[2])).norm() < 1e-15);
}

TEST_CASE("lumped yaw law turns against gamma_y") {
  const VerticalParams p;
  VerticalState s;
  VerticalInputs in;
  in.rudder_mode = RudderMode::GammaProxy;
  in.f_flap = p.hover_frequency();
  in.gamma.gamma = Vec3(0.0, 0.2, std::sqrt(1 - 0.04));
  const double a = yaw_acceleration(s, in, p);
  CHECK(a == doctest::Approx(-p.kbar_flap_x * in.f_flap * in.f_flap * in.gamma.gamma.z() * 0.2));
  s.omega_psi = 2.0;
  in.gamma.gamma = Vec3::UnitZ();
  CHECK(yaw_acceleration(s, in, p) == doctest::Approx(-p.vk_damp * 4.0));
}

TEST_CASE("constrained lateral mode keeps vv_y at zero") {
  const VerticalParams p;
  VerticalInputs in;
  in.gamma.gamma = Vec3(0.0, 0.3, std::sqrt(1 - 0.09));
  in.f_flap = p.hover_frequency();
  VerticalState s;
  s.vv = Vec3(1.0, 0.0, 0.0);
  s.omega_psi = 1.0;
  in.lateral_mode = LateralMode::Constrained;
  CHECK(vertical_rhs(s, in, p)[4] == 0.0);
  in.lateral_mode = LateralMode::Relaxed;
  CHECK(vertical_rhs(s, in, p)[4] != 0.0);
}

TEST_CASE("vertical state from inertial velocity") {
  const VerticalState s = vertical_from_inertial(Vec3(1, 2, 3), Vec3(0.0, 1.0, 0.5), M_PI / 2, 0.3);
  CHECK(s.vv.x() == doctest::Approx(1.0));
  CHECK(std::abs(s.vv.y()) < 1e-12);
  CHECK(s.vv.z() == doctest::Approx(0.5));
  CHECK(s.omega_psi == 0.3);
}

TEST_CASE("integrators reject bad steps") {
  const VerticalParams p;
  auto hover = [&](double) {
    VerticalInputs in;
    in.f_flap = p.hover_frequency();
    return in;
  };
  CHECK_THROWS_AS(integrate_vertical(VerticalState{}, hover, p, 0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(integrate_vertical(VerticalState{}, hover, p, 0.1, 0.01), InvalidInput);
  const auto log = integrate_vertical(VerticalState{}, hover, p, 0.01, 1.0);
  CHECK(log.back().x.p.norm() < 1e-12);
}

TEST_CASE("non-finite state raises a propagation error") {
  const FwavParams p;
  FwavState s;
  s.v.x() = std::nan("");
  CHECK_THROWS_AS(integrate_full(s, constant(0.0), p, 0.01, 0.1), PropagationError);
}

TEST_CASE("state logs carry the full schema") {
  const FwavParams p;
  const auto log = integrate_full(FwavState{}, constant(p.hover_frequency()), p, 0.01, 0.02);
  const std::string csv = full_log_csv(log);
  CHECK(csv.rfind("t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,fflap,thrud,thele\n", 0) == 0);
}
