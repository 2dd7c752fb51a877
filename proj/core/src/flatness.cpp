#include "fwav/flatness.hpp"

#include <cmath>
#include <numbers>

#include "fwav/errors.hpp"
#include "fwav/jet.hpp"
#include "fwav/numeric.hpp"

namespace fwav::flatness {
namespace {

using J = Jet<kMaxDerivative>;
using JMat = std::array<std::array<J, 3>, 3>;

constexpr double kTiny = 1e-12;

J axis_jet(const FlatSample& s, int axis) {
  std::array<double, kMaxDerivative + 1> d{};
  d[0] = s.sigma[axis];
  for (int k = 0; k < kMaxDerivative; ++k) d[k + 1] = s.d[k][axis];
  return J::from_derivatives(d);
}

J shifted(const J& a, std::size_t m) {
  J r;
  for (std::size_t k = 0; k + m <= kMaxDerivative; ++k) r.c[k] = a.c[k + m];
  return r;
}

std::optional<J> azimuth_jet(const J& vx, const J& vy, const FlatOptions& opt);

// Heading series, or nullopt when the heading is undefined at this sample.
std::optional<J> heading_jet(const FlatSample& s, const J& vx, const J& vy,
                             const FlatOptions& opt) {
  if (s.psi) return J::from_derivatives(*s.psi);
  std::optional<J> psi = azimuth_jet(vx, vy, opt);
  if (psi && opt.heading_branch && std::cos(psi->c[0] - *opt.heading_branch) < 0.0) {
    psi->c[0] = se3::wrap_angle(psi->c[0] + std::numbers::pi);
  }
  return psi;
}

std::optional<J> azimuth_jet(const J& vx, const J& vy, const FlatOptions& opt) {
  const double vh = std::hypot(vx.c[0], vy.c[0]);
  if (vh >= opt.v_eps) return atan2(vy, vx);
  if (opt.low_speed != LowSpeedHeading::Extend) return std::nullopt;
  if (vh > 1e-9) return atan2(vy, vx);
  // Velocity vanishes at t0: factor out the common power of (t - t0).
  for (std::size_t m = 1; m <= kMaxDerivative; ++m) {
    if (std::hypot(vx.c[m], vy.c[m]) > 1e-12) return atan2(shifted(vy, m), shifted(vx, m));
  }
  return std::nullopt;
}

J hold_heading(const FlatSample& s) {
  for (const Vec3& d : s.d) {
    if (std::hypot(d.x(), d.y()) > 1e-9) return J(std::atan2(d.y(), d.x()));
  }
  return J(0.0);
}

struct Core {
  std::array<J, 3> p, v, vv, vv_dot;
  J psi, c_psi, s_psi, omega_psi, omega_psi_dot;
  J gx, gy, gz, f2, theta_v;
  double amplification = 1.0;
};

Core vertical_core(const FlatSample& s, const FlatOptions& opt,
                   bool allow_hold) {
  Core c;
  for (int i = 0; i < 3; ++i) {
    c.p[i] = axis_jet(s, i);
    c.v[i] = c.p[i].dt();
  }
  std::optional<J> psi = heading_jet(s, c.v[0], c.v[1], opt);
  if (!psi) {
    if (!allow_hold) {
      throw DegenerateHeading("flat_to_vertical: horizontal speed below v_eps, heading undefined");
    }
    psi = hold_heading(s);
  }
  c.psi = *psi;
  sincos(c.psi, c.s_psi, c.c_psi);
  c.vv[0] = c.c_psi * c.v[0] + c.s_psi * c.v[1];
  c.vv[1] = c.c_psi * c.v[1] - c.s_psi * c.v[0];
  c.vv[2] = c.v[2];
  for (int i = 0; i < 3; ++i) c.vv_dot[i] = c.vv[i].dt();
  c.omega_psi = c.psi.dt();
  c.omega_psi_dot = c.omega_psi.dt();
  return c;
}

void attitude_core(Core& c, const VerticalParams& prm, const FlatOptions& opt) {
  const J a = -(prm.m * c.vv_dot[0] + prm.vk_d.x() * signed_square(c.vv[0])) / prm.k_tf;
  const J b =
      (prm.m * c.vv_dot[2] + prm.vk_d.z() * signed_square(c.vv[2]) + prm.m * prm.g) / prm.k_tf;

  const J num = c.omega_psi_dot + prm.vk_damp * signed_square(c.omega_psi);
  const J den = prm.vk_gamma * signed_square(c.vv[0]);
  J gy(0.0);
  if (std::abs(den.c[0]) > kTiny) {
    gy = num / den;
  } else if (std::abs(num.c[0]) > kTiny && !opt.rudder_assist) {
    throw InfeasibleHeadingAcceleration(
        "flat_to_attitude_and_thrust: heading acceleration required without wind-vane authority");
  }
  if (opt.rudder_assist) {
    if (std::abs(gy.c[0]) > opt.gamma_y_limit) gy = J(std::copysign(opt.gamma_y_limit, gy.c[0]));
  } else if (std::abs(gy.c[0]) > 1.0) {
    throw InfeasibleHeadingAcceleration(
        "flat_to_attitude_and_thrust: |Gamma_y| > 1 required by the heading acceleration");
  }

  const J one_minus = 1.0 - gy * gy;
  c.amplification = 1.0 / std::sqrt(one_minus.c[0]);
  c.f2 = sqrt(a * a + b * b) / sqrt(one_minus);
  if (!(c.f2.c[0] > opt.f_eps * opt.f_eps)) {
    throw NegligibleThrust("flat_to_attitude_and_thrust: recovered f_flap^2 below f_eps^2");
  }
  c.gx = a / c.f2;
  c.gy = gy;
  c.gz = b / c.f2;

  c.theta_v = J(0.0);
  if (opt.rudder_assist) {
    const J residual = num - prm.vk_gamma * c.gy * signed_square(c.vv[0]);
    const J gain = prm.vk_tau_x * signed_square(c.vv[2]) + prm.vk_flap_x * c.f2 * c.gz;
    if (std::abs(gain.c[0]) > kTiny) {
      c.theta_v = -residual / gain;
    } else if (std::abs(residual.c[0]) > kTiny) {
      throw UnrecoverableDeflection("flat_to_attitude_and_thrust: rudder yaw gain vanishes");
    }
  }
}

JMat matmul(const JMat& a, const JMat& b) {
  JMat r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      J s(0.0);
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      r[i][j] = s;
    }
  return r;
}

JMat transpose(const JMat& a) {
  JMat r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
  return r;
}

JMat dt(const JMat& a) {
  JMat r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i][j].dt();
  return r;
}

std::array<J, 3> matvec(const JMat& a, const std::array<J, 3>& v) {
  std::array<J, 3> r;
  for (int i = 0; i < 3; ++i) r[i] = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
  return r;
}

Vec3 values(const std::array<J, 3>& v) { return {v[0].c[0], v[1].c[0], v[2].c[0]}; }

// R(q) of a unit quaternion whose entries are series.
JMat rotation_of(const J& eta, const std::array<J, 3>& e) {
  JMat r;
  const J xx = e[0] * e[0], yy = e[1] * e[1], zz = e[2] * e[2];
  const J xy = e[0] * e[1], xz = e[0] * e[2], yz = e[1] * e[2];
  const J wx = eta * e[0], wy = eta * e[1], wz = eta * e[2];
  r[0][0] = 1.0 - 2.0 * (yy + zz);
  r[0][1] = 2.0 * (xy - wz);
  r[0][2] = 2.0 * (xz + wy);
  r[1][0] = 2.0 * (xy + wz);
  r[1][1] = 1.0 - 2.0 * (xx + zz);
  r[1][2] = 2.0 * (yz - wx);
  r[2][0] = 2.0 * (xz - wy);
  r[2][1] = 2.0 * (yz + wx);
  r[2][2] = 1.0 - 2.0 * (xx + yy);
  return r;
}

AttitudeThrust attitude_result(const Core& c, const FlatOptions& opt) {
  AttitudeThrust r;
  r.gamma.gamma = Vec3(c.gx.c[0], c.gy.c[0], c.gz.c[0]);
  r.gamma.gamma.normalize();
  r.gamma_dot = Vec3(c.gx.derivative(1), c.gy.derivative(1), c.gz.derivative(1));
  const J f = sqrt(c.f2);
  r.f_flap = f.c[0];
  r.f_flap_dot = f.derivative(1);
  r.theta_rud_vertical = c.theta_v.c[0];
  r.thrust_margin = c.f2.c[0] / (opt.f_eps * opt.f_eps);
  r.gamma_y_amplification = c.amplification;
  return r;
}

VerticalFlat vertical_result(const Core& c) {
  VerticalFlat r;
  r.vv = values(c.vv);
  r.vv_dot = values(c.vv_dot);
  r.psi = se3::wrap_angle(c.psi.c[0]);
  r.omega_psi = c.omega_psi.c[0];
  r.omega_psi_dot = c.omega_psi_dot.c[0];
  return r;
}

// Solves tau_row = -gain * theta for theta as a series.
J invert_deflection(const J& tau, const J& gain, const char* what) {
  if (std::abs(gain.c[0]) > kTiny) return -tau / gain;
  if (std::abs(tau.c[0]) > 1e-10) throw UnrecoverableDeflection(what);
  return J(0.0);
}

}  // namespace

FlatSample FlatSample::make(const Vec3& sigma, const Vec3& d1, const Vec3& d2, const Vec3& d3,
                            const Vec3& d4) {
  FlatSample s;
  s.sigma = sigma;
  s.d[0] = d1;
  s.d[1] = d2;
  s.d[2] = d3;
  s.d[3] = d4;
  return s;
}

void FlatSample::set_heading(double psi0, double psi_rate, double psi_acc) {
  std::array<double, kMaxDerivative + 1> h{};
  h[0] = psi0;
  h[1] = psi_rate;
  h[2] = psi_acc;
  psi = h;
}

dynamics::FwavState FlatStateResult::to_state() const {
  dynamics::FwavState s;
  s.p = p;
  s.v = v;
  s.q = q;
  s.omega = omega;
  s.f_flap = inputs.f_flap;
  s.theta_rud = inputs.theta_rud;
  s.theta_ele = inputs.theta_ele;
  return s;
}

dynamics::FullCommand FlatStateResult::lag_compensated_command(const FwavParams& prm) const {
  return {inputs.f_flap + prm.k_flap_c * input_rates.f_flap,
          inputs.theta_rud + prm.k_rud_c * input_rates.theta_rud,
          inputs.theta_ele + prm.k_ele_c * input_rates.theta_ele};
}

VerticalFlat flat_to_vertical(const FlatSample& sample, const VerticalParams& params,
                              const FlatOptions& options) {
  params.validate();
  return vertical_result(vertical_core(sample, options, false));
}

AttitudeThrust flat_to_attitude_and_thrust(const FlatSample& sample, const VerticalParams& params,
                                           const FlatOptions& options) {
  Core c = vertical_core(sample, options, true);
  attitude_core(c, params, options);
  return attitude_result(c, options);
}

FlatStateResult flat_to_full(const FlatSample& sample, const VerticalParams& vp,
                             const FwavParams& fp, const FlatOptions& options) {
  Core c = vertical_core(sample, options, true);
  attitude_core(c, vp, options);

  FlatStateResult out;
  out.p = values(c.p);
  out.v = values(c.v);
  out.vertical = vertical_result(c);
  out.attitude = attitude_result(c, options);

  // Tilt quaternion q_e = [1 + Gz, (Gy, -Gx, 0)] / sqrt(2 + 2 Gz), then R = R(psi) R(q_e).
  const J n = sqrt(2.0 + 2.0 * c.gz);
  if (!(n.c[0] > std::sqrt(se3::kAntipodalGuard))) {
    throw DegenerateAttitude("flat_to_full: reduced attitude is antipodal to e3");
  }
  const J eta = (1.0 + c.gz) / n;
  const std::array<J, 3> eps{c.gy / n, -c.gx / n, J(0.0)};
  const JMat re = rotation_of(eta, eps);
  JMat rpsi;
  rpsi[0] = {c.c_psi, -c.s_psi, J(0.0)};
  rpsi[1] = {c.s_psi, c.c_psi, J(0.0)};
  rpsi[2] = {J(0.0), J(0.0), J(1.0)};
  const JMat R = matmul(rpsi, re);
  const JMat Rt = transpose(R);
  const JMat W = matmul(Rt, dt(R));  // [omega_body]x

  std::array<J, 3> w{0.5 * (W[2][1] - W[1][2]), 0.5 * (W[0][2] - W[2][0]),
                     0.5 * (W[1][0] - W[0][1])};
  std::array<J, 3> wd{w[0].dt(), w[1].dt(), w[2].dt()};

  // tau = J omega_dot + omega x J omega
  std::array<J, 3> Jw, Jwd;
  for (int i = 0; i < 3; ++i) {
    Jw[i] = fp.J(i, 0) * w[0] + fp.J(i, 1) * w[1] + fp.J(i, 2) * w[2];
    Jwd[i] = fp.J(i, 0) * wd[0] + fp.J(i, 1) * wd[1] + fp.J(i, 2) * wd[2];
  }
  std::array<J, 3> tau{Jwd[0] + w[1] * Jw[2] - w[2] * Jw[1], Jwd[1] + w[2] * Jw[0] - w[0] * Jw[2],
                       Jwd[2] + w[0] * Jw[1] - w[1] * Jw[0]};

  const std::array<J, 3> vb = matvec(Rt, c.v);
  const J vel = sgn(vb[2].c[0]) * (vb[0] * vb[0]);
  const J gain_x = fp.k_tau.x() * vel + fp.k_flap.x() * c.f2;
  const J gain_y = fp.k_tau.y() * vel + fp.k_flap.y() * c.f2;
  const J th_rud = invert_deflection(tau[0], gain_x, "flat_to_full: roll torque gain vanishes");
  const J th_ele = invert_deflection(tau[1], gain_y, "flat_to_full: pitch torque gain vanishes");

  out.omega = values(w);
  out.omega_dot = values(wd);
  Mat3 Rv, Rdv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Rv(i, j) = R[i][j].c[0];
      Rdv(i, j) = R[i][j].derivative(1);
    }
  out.omega_inertial = se3::angular_velocity_from_rotation(Rv, Rdv).omega;

  UnitQuaternion q = se3::recover_attitude_quaternion(out.attitude.gamma, out.vertical.psi, 1);
  out.s_e = 1;
  if (options.previous_attitude && q.coeffs().dot(options.previous_attitude->coeffs()) < 0.0) {
    q = se3::recover_attitude_quaternion(out.attitude.gamma, out.vertical.psi, -1);
    out.s_e = -1;
  }
  out.q = q;

  out.inputs = {out.attitude.f_flap, th_rud.c[0], th_ele.c[0]};
  out.input_rates = {out.attitude.f_flap_dot, th_rud.derivative(1), th_ele.derivative(1)};
  return out;
}

}  // namespace fwav::flatness
