#include "fwav/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "fwav/errors.hpp"
#include "fwav/io.hpp"
#include "fwav/numeric.hpp"
#include "fwav/rk4.hpp"

namespace fwav::dynamics {

Vec16 FwavState::to_vector() const {
  Vec16 x;
  x << p, v, q.eta, q.epsilon, omega, f_flap, theta_rud, theta_ele;
  return x;
}

FwavState FwavState::from_vector(const Vec16& x) {
  FwavState s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.q.eta = x[6];
  s.q.epsilon = x.segment<3>(7);
  s.omega = x.segment<3>(10);
  s.f_flap = x[13];
  s.theta_rud = x[14];
  s.theta_ele = x[15];
  return s;
}

Vec8 VerticalState::to_vector() const {
  Vec8 x;
  x << p, vv, psi, omega_psi;
  return x;
}

VerticalState VerticalState::from_vector(const Vec8& x) {
  VerticalState s;
  s.p = x.segment<3>(0);
  s.vv = x.segment<3>(3);
  s.psi = x[6];
  s.omega_psi = x[7];
  return s;
}

VerticalState vertical_from_inertial(const Vec3& p, const Vec3& v, double psi, double omega_psi) {
  VerticalState s;
  s.p = p;
  s.vv = se3::yaw_rotation(psi).transpose() * v;
  s.vv.y() = 0.0;
  s.psi = psi;
  s.omega_psi = omega_psi;
  return s;
}

double thrust_magnitude(double f_flap, double k_tf) {
  if (f_flap < 0.0) throw InvalidInput("thrust_magnitude: negative flapping frequency");
  return k_tf * f_flap * f_flap;
}

double thrust_magnitude(double f_flap, const FwavParams& params) {
  return thrust_magnitude(f_flap, params.k_tf);
}

Vec3 body_drag(const Vec3& v_body, const Vec3& k_d) {
  return {-k_d.x() * signed_square(v_body.x()), -k_d.y() * signed_square(v_body.y()),
          -k_d.z() * signed_square(v_body.z())};
}

Vec3 deflection_torque(const FwavState& s, const FwavParams& prm) {
  const Vec3 vb = se3::quat_to_rot(s.q).transpose() * s.v;
  const double vel = sgn(vb.z()) * vb.x() * vb.x();
  const double f2 = s.f_flap * s.f_flap;
  return {-(prm.k_tau.x() * vel + prm.k_flap.x() * f2) * s.theta_rud,
          -(prm.k_tau.y() * vel + prm.k_flap.y() * f2) * s.theta_ele,
          -(prm.k_tau.z() * vel + prm.k_flap.z() * f2) * s.theta_rud};
}

Vec16 full_rhs(const FwavState& s, const FullCommand& cmd, const FwavParams& prm) {
  if (!s.to_vector().allFinite()) throw PropagationError("full_rhs: non-finite state", -1);
  const Mat3 R = se3::quat_to_rot(s.q);
  const Vec3 vb = R.transpose() * s.v;
  const Vec3 force = body_drag(vb, prm.k_d) + Vec3(0.0, 0.0, thrust_magnitude(s.f_flap, prm));

  const se3::UnitQuaternion qdot = s.q * se3::UnitQuaternion{0.0, s.omega};
  const Vec3 torque = deflection_torque(s, prm);
  const Vec3 omega_dot = prm.J.ldlt().solve(torque - s.omega.cross(prm.J * s.omega));

  Vec16 d;
  d.segment<3>(0) = s.v;
  d.segment<3>(3) = Vec3(0.0, 0.0, -prm.g) + R * force / prm.m;
  d[6] = 0.5 * qdot.eta;
  d.segment<3>(7) = 0.5 * qdot.epsilon;
  d.segment<3>(10) = omega_dot;
  d[13] = (cmd.f_flap_c - s.f_flap) / prm.k_flap_c;
  d[14] = (cmd.theta_rud_c - s.theta_rud) / prm.k_rud_c;
  d[15] = (cmd.theta_ele_c - s.theta_ele) / prm.k_ele_c;
  return d;
}

namespace {

void check_inputs(const VerticalInputs& in) {
  if (!in.gamma.is_unit(1e-6)) throw InvalidInput("vertical_rhs: reduced attitude is not unit norm");
  if (in.f_flap < 0.0) throw InvalidInput("vertical_rhs: negative flapping frequency");
}

}  // namespace

double yaw_acceleration(const VerticalState& s, const VerticalInputs& in,
                        const VerticalParams& prm) {
  const Vec3& g = in.gamma.gamma;
  const double f2 = in.f_flap * in.f_flap;
  const double damping = prm.vk_damp * signed_square(s.omega_psi);
  if (in.rudder_mode == RudderMode::GammaProxy) {
    const double gain = prm.kbar_gamma * signed_square(s.vv.z()) + prm.kbar_flap_x * f2 * g.z();
    return -gain * g.y() - damping;
  }
  const double rudder =
      -(prm.vk_tau_x * signed_square(s.vv.z()) + prm.vk_flap_x * f2 * g.z()) * in.theta_rud;
  const double vane = prm.vk_gamma * g.y() * signed_square(s.vv.x());
  return rudder + vane - damping;
}

Vec8 vertical_rhs(const VerticalState& s, const VerticalInputs& in, const VerticalParams& prm) {
  check_inputs(in);
  const Vec3& g = in.gamma.gamma;
  const double thrust = prm.k_tf * in.f_flap * in.f_flap;
  const Vec3& vv = s.vv;

  Vec8 d;
  d.segment<3>(0) = se3::yaw_rotation(s.psi) * vv;
  d[3] = -thrust * g.x() / prm.m - prm.vk_d.x() * signed_square(vv.x()) / prm.m -
         s.omega_psi * vv.y();
  if (in.lateral_mode == LateralMode::Constrained) {
    d[4] = 0.0;
  } else {
    d[4] = -thrust * g.y() / prm.m - prm.vk_drag_y() * signed_square(vv.y()) / prm.m +
           s.omega_psi * vv.x();
  }
  d[5] = thrust * g.z() / prm.m - prm.vk_d.z() * signed_square(vv.z()) / prm.m - prm.g;
  d[6] = s.omega_psi;
  d[7] = yaw_acceleration(s, in, prm);
  return d;
}

namespace {

long step_count(double dt, double duration) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("integrate: dt must be positive");
  if (!(duration >= dt)) throw InvalidInput("integrate: duration must be at least dt");
  return std::lround(duration / dt);
}

}  // namespace

FwavState step_full(const FwavState& x, double t, double dt, const FullSchedule& u,
                    const FwavParams& prm) {
  auto f = [&](double tau, const Vec16& y) {
    FwavState s = FwavState::from_vector(y);
    // Stage states drift off the unit sphere by O(dt); R(q) needs a unit quaternion.
    s.q = s.q.normalized();
    return full_rhs(s, u(tau), prm);
  };
  FwavState next = FwavState::from_vector(rk4_step(f, t, x.to_vector(), dt));
  next.q = next.q.normalized();
  return next;
}

VerticalState step_vertical(const VerticalState& x, double t, double dt,
                            const VerticalSchedule& u, const VerticalParams& prm) {
  auto f = [&](double tau, const Vec8& y) {
    return vertical_rhs(VerticalState::from_vector(y), u(tau), prm);
  };
  return VerticalState::from_vector(rk4_step(f, t, x.to_vector(), dt));
}

std::vector<FullSample> integrate_full(const FwavState& x0, const FullSchedule& u,
                                       const FwavParams& prm, double dt, double duration) {
  const long n = step_count(dt, duration);
  std::vector<FullSample> log;
  log.reserve(static_cast<std::size_t>(n) + 1);
  FwavState x = x0;
  x.q = x.q.normalized();
  log.push_back({0.0, x, u(0.0)});
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    try {
      x = step_full(x, t, dt, u, prm);
    } catch (const PropagationError&) {
      throw PropagationError("integrate_full: non-finite state", k);
    } catch (const InvalidInput& e) {
      throw PropagationError(std::string("integrate_full: ") + e.what(), k);
    }
    if (!x.to_vector().allFinite()) throw PropagationError("integrate_full: non-finite state", k);
    const double tn = static_cast<double>(k + 1) * dt;
    log.push_back({tn, x, u(tn)});
  }
  return log;
}

std::vector<VerticalSample> integrate_vertical(const VerticalState& x0,
                                               const VerticalSchedule& u,
                                               const VerticalParams& prm, double dt,
                                               double duration) {
  const long n = step_count(dt, duration);
  std::vector<VerticalSample> log;
  log.reserve(static_cast<std::size_t>(n) + 1);
  VerticalState x = x0;
  log.push_back({0.0, x, u(0.0)});
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    x = step_vertical(x, t, dt, u, prm);
    if (!x.to_vector().allFinite()) {
      throw PropagationError("integrate_vertical: non-finite state", k);
    }
    const double tn = static_cast<double>(k + 1) * dt;
    log.push_back({tn, x, u(tn)});
  }
  return log;
}

namespace {

void append_row(std::ostringstream& out, double t, const Vec3& p, const Vec3& v,
                const UnitQuaternion& q, const Vec3& w, double f, double rud, double ele) {
  const double vals[] = {t,         p.x(),          p.y(),          p.z(),          v.x(),
                         v.y(),     v.z(),          q.eta,          q.epsilon.x(),  q.epsilon.y(),
                         q.epsilon.z(), w.x(),      w.y(),          w.z(),          f,
                         rud,       ele};
  bool first = true;
  for (double x : vals) {
    if (!first) out << ',';
    out << io::format_number(x);
    first = false;
  }
  out << '\n';
}

}  // namespace

std::string full_log_csv(const std::vector<FullSample>& log) {
  std::ostringstream out;
  out << kStateLogHeader << '\n';
  for (const auto& s : log) {
    append_row(out, s.t, s.x.p, s.x.v, s.x.q, s.x.omega, s.x.f_flap, s.x.theta_rud,
               s.x.theta_ele);
  }
  return out.str();
}

std::string vertical_log_csv(const std::vector<VerticalSample>& log) {
  std::ostringstream out;
  out << kStateLogHeader << '\n';
  for (const auto& s : log) {
    const UnitQuaternion q = se3::recover_attitude_quaternion(s.u.gamma, s.x.psi);
    append_row(out, s.t, s.x.p, s.x.velocity(), q, Vec3(0.0, 0.0, s.x.omega_psi), s.u.f_flap,
               s.u.theta_rud, 0.0);
  }
  return out.str();
}

}  // namespace fwav::dynamics
