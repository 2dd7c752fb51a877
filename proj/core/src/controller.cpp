#include "fwav/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fwav/errors.hpp"
#include "fwav/numeric.hpp"

namespace fwav::control {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

bool positive_diagonal(const Mat3& K) {
  const Mat3 off = K - Mat3(K.diagonal().asDiagonal());
  return off.cwiseAbs().maxCoeff() == 0.0 && (K.diagonal().array() > 0.0).all();
}

}  // namespace

ControllerGains ControllerGains::nominal() { return ControllerGains{}; }

ControllerGains ControllerGains::certified() {
  ControllerGains g;
  g.k_psi = 0.1;
  g.k_omega = 2.0;
  return g;
}

void ControllerGains::validate() const {
  require(positive_diagonal(Kp) && positive_diagonal(Kv),
          "ControllerGains: Kp and Kv must be positive diagonal");
  require(k_psi > 0.0 && k_omega > 0.0, "ControllerGains: k_psi and k_omega must be positive");
  require(delta > 0.0 && delta < 1.0, "ControllerGains: delta must lie in (0, 1)");
  require(l_gamma_min > 0.0 && l_gamma_min <= l_gamma_max,
          "ControllerGains: need 0 < l_gamma_min <= l_gamma_max");
  require(k_rud > 0.0 && k_ele > 0.0 && k_omega_x > 0.0 && k_omega_y > 0.0,
          "ControllerGains: inner-loop gains must be positive");
  require(filter_wn > 0.0 && filter_zeta > 0.0 && filter_zeta <= 2.0,
          "ControllerGains: need filter_wn > 0 and 0 < filter_zeta <= 2");
  require(psi_rate_ff_cap > 0.0, "ControllerGains: psi_rate_ff_cap must be positive");
}

ControllerGains gains_from_document(const io::KeyValueDocument& doc) {
  ControllerGains g;
  const char* axes[3] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    g.Kp(i, i) = doc.number_or(std::string("Kp_") + axes[i], g.Kp(i, i));
    g.Kv(i, i) = doc.number_or(std::string("Kv_") + axes[i], g.Kv(i, i));
  }
  g.k_psi = doc.number_or("k_psi", g.k_psi);
  g.k_omega = doc.number_or("k_omega", g.k_omega);
  g.delta = doc.number_or("delta", g.delta);
  g.l_gamma_min = doc.number_or("l_gamma_min", g.l_gamma_min);
  g.l_gamma_max = doc.number_or("l_gamma_max", g.l_gamma_max);
  g.k_rud = doc.number_or("k_rud", g.k_rud);
  g.k_ele = doc.number_or("k_ele", g.k_ele);
  g.k_omega_x = doc.number_or("k_omega_x", g.k_omega_x);
  g.k_omega_y = doc.number_or("k_omega_y", g.k_omega_y);
  g.filter_wn = doc.number_or("filter_wn", g.filter_wn);
  g.filter_zeta = doc.number_or("filter_zeta", g.filter_zeta);
  g.psi_rate_ff_cap = doc.number_or("psi_rate_ff_cap", g.psi_rate_ff_cap);
  g.validate();
  return g;
}

io::KeyValueDocument gains_to_document(const ControllerGains& g) {
  io::KeyValueDocument doc;
  const char* axes[3] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) doc.set(std::string("Kp_") + axes[i], g.Kp(i, i));
  for (int i = 0; i < 3; ++i) doc.set(std::string("Kv_") + axes[i], g.Kv(i, i));
  doc.set("k_psi", g.k_psi);
  doc.set("k_omega", g.k_omega);
  doc.set("delta", g.delta);
  doc.set("l_gamma_min", g.l_gamma_min);
  doc.set("l_gamma_max", g.l_gamma_max);
  doc.set("k_rud", g.k_rud);
  doc.set("k_ele", g.k_ele);
  doc.set("k_omega_x", g.k_omega_x);
  doc.set("k_omega_y", g.k_omega_y);
  doc.set("filter_wn", g.filter_wn);
  doc.set("filter_zeta", g.filter_zeta);
  doc.set("psi_rate_ff_cap", g.psi_rate_ff_cap);
  return doc;
}

ControllerGains load_gains(const std::string& path) {
  return gains_from_document(io::KeyValueDocument::load(path));
}

TrackingErrors position_errors(const Vec3& p, const Vec3& v, const Vec3& sigma_r,
                               const Vec3& v_d) {
  TrackingErrors e;
  e.e_p = sigma_r - p;
  e.e_v = v_d - v;
  return e;
}

double azimuth_error(double delta_psi) {
  return kSqrt2 - std::sqrt(std::max(0.0, 1.0 + std::cos(delta_psi)));
}

Vec3 tanh(const Vec3& x) { return x.array().tanh().matrix(); }

Vec3 desired_velocity(const Vec3& sigma_r_dot, const Vec3& e_p, const Mat3& Kp) {
  return sigma_r_dot + Kp * tanh(e_p);
}

Vec3 desired_acceleration(const Vec3& v_d_dot, const Vec3& e_p, const Vec3& e_v, const Mat3& Kp,
                          const Mat3& Kv) {
  const Vec3 kp_inv_tanh = tanh(e_p).cwiseQuotient(Kp.diagonal());
  return v_d_dot + Kv * kp_inv_tanh + Kv * tanh(e_v);
}

Vec3 desired_velocity_rate(const Vec3& sigma_r_ddot, const Vec3& sigma_r_dot, const Vec3& v,
                           const Vec3& e_p, const Mat3& Kp) {
  const Vec3 sech2 = (1.0 - e_p.array().tanh().square()).matrix();
  return sigma_r_ddot + Kp * sech2.cwiseProduct(sigma_r_dot - v);
}

Decomposition decompose(const Vec3& a_d, const Vec3& vv, const VerticalParams& params,
                        const DecomposeContext& ctx) {
  Decomposition out;
  Eigen::Vector2d horizontal = a_d.head<2>();
  double drag_along = 0.0;
  if (ctx.mode == DecomposeMode::DragAugmented) {
    const Eigen::Vector2d vh = (se3::yaw_rotation(ctx.psi) * Vec3(vv.x(), vv.y(), 0.0)).head<2>();
    horizontal += (params.vk_d.x() / params.m) * vh.norm() * vh;
  } else {
    drag_along = params.vk_d.x() * signed_square(vv.x()) / params.m;
  }
  const double n = horizontal.norm();
  if (n <= ctx.heading_accel_eps || n == 0.0) {
    out.psi_d = ctx.previous_psi_d;
    out.heading_held = true;
  } else {
    out.psi_d = std::atan2(horizontal.y(), horizontal.x());
  }
  out.vdot_cx = n + drag_along;
  out.vdot_cz = a_d.z() + params.g;
  const double norm = std::hypot(out.vdot_cx, out.vdot_cz);
  if (norm <= ctx.a_eps) {
    throw DegenerateDecomposition("decompose: combined acceleration below a_eps");
  }
  out.f_flap = std::sqrt(params.m * norm / params.k_tf);
  out.gamma_xd = -out.vdot_cx / norm;
  out.gamma_zd = out.vdot_cz / norm;
  return out;
}

double heading_rate_command(double delta_psi, double psi_d_dot, int h_psi, double k_psi,
                            double cap) {
  const double ff = std::clamp(psi_d_dot, -cap, cap);
  return ff + k_psi * h_psi * std::sqrt(std::max(0.0, 1.0 - std::cos(delta_psi)));
}

int hysteresis_update(int h_psi, double delta_psi, double delta) {
  const double s = std::sin(delta_psi);
  const double c = std::cos(delta_psi);
  if ((h_psi * s <= -delta && c <= 0.0) || c > 0.0) {
    if (s > 0.0) return 1;
    if (s < 0.0) return -1;
  }
  return h_psi;
}

double gamma_y_command(double e_omega_psi, double delta_psi, int h_psi,
                       double omega_psi_d_dot, const ControllerGains& g) {
  const double F =
      0.5 / g.k_psi * h_psi * std::sqrt(std::max(0.0, 1.0 - std::cos(delta_psi))) +
      omega_psi_d_dot;
  const double robust =
      -(g.k_omega / g.l_gamma_min - g.k_omega / g.l_gamma_max) * sgn(e_omega_psi) * std::abs(F);
  const double feedforward = -(g.k_omega / g.l_gamma_max) * F;
  const double linear = -g.k_omega * e_omega_psi;
  return robust + feedforward + linear;
}

ReducedAttitude compose_reduced_attitude(double gamma_xd, double gamma_yd, double gamma_zd) {
  const Vec3 v(gamma_xd, gamma_yd, gamma_zd);
  const double n = v.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw InvalidInput("compose_reduced_attitude: zero or non-finite vector");
  }
  return ReducedAttitude{v / n};
}

TailCommand inner_attitude(const ReducedAttitude& gp, const ReducedAttitude& g, const Vec3& omega,
                           const ControllerGains& gains) {
  TailCommand t;
  t.theta_rud = gains.k_rud * (gp.y() * g.z() - gp.z() * g.y()) - gains.k_omega_x * omega.x();
  t.theta_ele = gains.k_ele * (gp.z() * g.x() - gp.x() * g.z()) - gains.k_omega_y * omega.y();
  return t;
}

CommandFilter::CommandFilter(double wn, double zeta) : wn_(wn), zeta_(zeta) {
  if (!(wn > 0.0) || !(zeta > 0.0) || zeta > 2.0) {
    throw InvalidInput("CommandFilter: need wn > 0 and 0 < zeta <= 2");
  }
}

void CommandFilter::reset(double u) {
  y_ = u;
  ydot_ = 0.0;
  initialized_ = true;
}

void CommandFilter::update(double u, double dt) {
  if (!initialized_) {
    reset(u);
    return;
  }
  if (!(dt > 0.0)) throw InvalidInput("CommandFilter: dt must be positive");
  const int n = std::max(1, static_cast<int>(std::ceil(dt * wn_ / 0.05)));
  const double h = dt / n;
  auto f = [&](double y, double yd) { return wn_ * wn_ * (u - y) - 2.0 * zeta_ * wn_ * yd; };
  for (int i = 0; i < n; ++i) {
    const double k1y = ydot_, k1v = f(y_, ydot_);
    const double k2y = ydot_ + 0.5 * h * k1v, k2v = f(y_ + 0.5 * h * k1y, k2y);
    const double k3y = ydot_ + 0.5 * h * k2v, k3v = f(y_ + 0.5 * h * k2y, k3y);
    const double k4y = ydot_ + h * k3v, k4v = f(y_ + h * k3y, k4y);
    y_ += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    ydot_ += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
}

StabilityMargin heading_stability_margin(const ControllerGains& g, double cap) {
  StabilityMargin m;
  const double root = std::sqrt(1.0 - g.delta * g.delta);
  const double r1 = std::sqrt(1.0 - root);
  const double r2 = std::sqrt(1.0 + root);
  m.omega_bar_psi = g.k_omega / (g.k_psi * g.k_psi) * r1 / (cap * r2);
  const double rad =
      m.omega_bar_psi * m.omega_bar_psi - cap * cap - 2.0 * kSqrt2 * g.k_omega / g.k_psi;
  m.margin_ok = rad > 0.0;
  m.omega_psi_max = m.margin_ok ? std::sqrt(rad) : 0.0;
  return m;
}

double lyapunov_v1(const Vec3& e_p, const Vec3& e_v, const ControllerGains& g) {
  return 0.5 * e_p.cwiseQuotient(g.Kp.diagonal()).dot(e_p) +
         0.5 * e_v.cwiseQuotient(g.Kv.diagonal()).dot(e_v);
}

double lyapunov_v2(double delta_psi, double e_omega_psi, int h_psi, const ControllerGains& g) {
  const double s = std::sin(delta_psi);
  const double sg = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : static_cast<double>(h_psi));
  const double root = std::sqrt(std::max(0.0, 1.0 + std::cos(delta_psi)));
  return (kSqrt2 - h_psi * sg * root) / g.k_psi + 0.5 * e_omega_psi * e_omega_psi / g.k_omega;
}

LyapunovReport lyapunov_monitors(const TrackingErrors& e, int h_psi, double psi_d_dot,
                                 double omega_psi, const ControllerGains& g) {
  LyapunovReport r;
  r.V1 = lyapunov_v1(e.e_p, e.e_v, g);
  r.V1_dot_expected = -e.e_p.dot(tanh(e.e_p)) - e.e_v.dot(tanh(e.e_v));
  r.V2 = lyapunov_v2(e.delta_psi, e.e_omega_psi, h_psi, g);
  const double one_minus_c = 1.0 - std::cos(e.delta_psi);
  r.flow_bound = -0.5 * one_minus_c * one_minus_c - e.e_omega_psi * e.e_omega_psi;
  const double root = std::sqrt(1.0 - g.delta * g.delta);
  r.jump_delta = 2.0 / g.k_omega * g.k_psi * std::sqrt(1.0 + root) * std::abs(psi_d_dot) *
                     std::abs(omega_psi) -
                 2.0 / g.k_psi * std::sqrt(1.0 - root);
  return r;
}

std::string controller_log_row_csv(const ControllerLogRow& r) {
  std::ostringstream os;
  os << io::format_number(r.t);
  for (int i = 0; i < 3; ++i) os << ',' << io::format_number(r.e_p[i]);
  for (int i = 0; i < 3; ++i) os << ',' << io::format_number(r.e_v[i]);
  os << ',' << io::format_number(r.delta_psi) << ',' << r.h_psi << ','
     << io::format_number(r.omega_psi_d) << ',' << io::format_number(r.gamma_yd) << ','
     << io::format_number(r.f_flap_cmd) << ',' << io::format_number(r.theta_rud_cmd) << ','
     << io::format_number(r.theta_ele_cmd) << ',' << io::format_number(r.V1) << ','
     << io::format_number(r.V2);
  return os.str();
}

TrackingController::TrackingController(const ControllerGains& gains, const VerticalParams& params,
                                       const ControllerOptions& options)
    : gains_(gains), params_(params), options_(options) {
  gains_.validate();
  params_.validate();
  if (!(options_.gamma_y_max > 0.0 && options_.gamma_y_max < 1.0)) {
    throw InvalidInput("TrackingController: gamma_y_max must lie in (0, 1)");
  }
  if (!(options_.a_eps > 0.0) || !(options_.heading_accel_eps >= 0.0)) {
    throw InvalidInput("TrackingController: a_eps must be positive and heading_accel_eps non-negative");
  }
  state_.psi_filter = CommandFilter(gains_.filter_wn, gains_.filter_zeta);
  state_.omega_filter = CommandFilter(gains_.filter_wn, gains_.filter_zeta);
  for (CommandFilter& f : state_.vd_filter) f = CommandFilter(gains_.filter_wn, gains_.filter_zeta);
}

void TrackingController::reset(double psi0, int h0) {
  const ControllerState fresh;
  state_ = fresh;
  state_.psi_filter = CommandFilter(gains_.filter_wn, gains_.filter_zeta);
  state_.omega_filter = CommandFilter(gains_.filter_wn, gains_.filter_zeta);
  for (CommandFilter& f : state_.vd_filter) f = CommandFilter(gains_.filter_wn, gains_.filter_zeta);
  state_.h_psi = h0 >= 0 ? 1 : -1;
  state_.psi_d_unwrapped = psi0;
  state_.psi_filter.reset(psi0);
  state_.last_f_flap = params_.hover_frequency();
  state_.initialized = true;
}

ControlOutput TrackingController::update(double t, const Reference& ref, const Measurement& meas,
                                         double dt) {
  if (!(dt > 0.0)) throw InvalidInput("TrackingController::update: dt must be positive");
  if (!state_.initialized) reset(meas.psi, state_.h_psi);
  ControlOutput out;

  const Vec3 e_p = ref.sigma - meas.p;
  const Vec3 v_d = desired_velocity(ref.sigma_dot, e_p, gains_.Kp);
  Vec3 v_d_dot;
  if (options_.analytic_vd_dot) {
    v_d_dot = desired_velocity_rate(ref.sigma_ddot, ref.sigma_dot, meas.v, e_p, gains_.Kp);
  } else {
    for (int i = 0; i < 3; ++i) {
      state_.vd_filter[i].update(v_d[i], dt);
      v_d_dot[i] = state_.vd_filter[i].rate();
    }
  }
  TrackingErrors err = position_errors(meas.p, meas.v, ref.sigma, v_d);
  const Vec3 a_d = desired_acceleration(v_d_dot, err.e_p, err.e_v, gains_.Kp, gains_.Kv);

  const Vec3 vv = se3::yaw_rotation(meas.psi).transpose() * meas.v;
  DecomposeContext ctx;
  ctx.mode = options_.decompose;
  ctx.psi = meas.psi;
  ctx.previous_psi_d = se3::wrap_angle(state_.psi_d_unwrapped);
  ctx.a_eps = options_.a_eps;
  ctx.heading_accel_eps = options_.heading_accel_eps;
  double psi_d = ctx.previous_psi_d;
  double gamma_xd = state_.last_gamma_xd;
  double gamma_zd = state_.last_gamma_zd;
  double f_flap = state_.last_f_flap;
  try {
    const Decomposition d = decompose(a_d, vv, params_, ctx);
    psi_d = d.psi_d;
    gamma_xd = d.gamma_xd;
    gamma_zd = d.gamma_zd;
    f_flap = d.f_flap;
  } catch (const DegenerateDecomposition&) {
    // Hold the previous demand.
  }
  if (ref.psi_override) psi_d = ref.psi_d;
  state_.last_gamma_xd = gamma_xd;
  state_.last_gamma_zd = gamma_zd;
  state_.last_f_flap = f_flap;

  const double step = se3::wrap_angle(psi_d - state_.psi_d_unwrapped);
  state_.psi_d_unwrapped += step;
  if (std::abs(step) > options_.psi_jump_reset) {
    state_.psi_filter.reset(state_.psi_d_unwrapped);
  } else {
    state_.psi_filter.update(state_.psi_d_unwrapped, dt);
  }
  const double psi_d_dot_raw = state_.psi_filter.rate();
  out.psi_rate_saturated = std::abs(psi_d_dot_raw) > gains_.psi_rate_ff_cap;
  if (out.psi_rate_saturated) ++state_.saturation_count;
  const double psi_d_dot =
      std::clamp(psi_d_dot_raw, -gains_.psi_rate_ff_cap, gains_.psi_rate_ff_cap);

  const double delta_psi = se3::wrap_angle(psi_d - meas.psi);
  const int h_old = state_.h_psi;
  const int h_new = hysteresis_update(h_old, delta_psi, gains_.delta);
  const double omega_old =
      heading_rate_command(delta_psi, psi_d_dot, h_old, gains_.k_psi, gains_.psi_rate_ff_cap);
  const double omega_psi_d =
      heading_rate_command(delta_psi, psi_d_dot, h_new, gains_.k_psi, gains_.psi_rate_ff_cap);
  out.V2_before = lyapunov_v2(delta_psi, omega_old - meas.omega_psi, h_old, gains_);
  out.V2_after = lyapunov_v2(delta_psi, omega_psi_d - meas.omega_psi, h_new, gains_);
  // Logic changes with cos > 0 leave omega_psi_d continuous and are not jumps.
  out.flipped = h_new != h_old && std::cos(delta_psi) <= 0.0;
  state_.h_psi = h_new;
  if (out.flipped) {
    ++state_.flip_count;
    state_.omega_filter.reset(omega_psi_d);
  } else {
    state_.omega_filter.update(omega_psi_d, dt);
  }
  state_.last_omega_psi_d = omega_psi_d;
  const double omega_psi_d_dot = state_.omega_filter.rate();

  err.delta_psi = delta_psi;
  err.e_psi = azimuth_error(delta_psi);
  err.e_omega_psi = omega_psi_d - meas.omega_psi;
  const double gamma_yd =
      std::clamp(gamma_y_command(err.e_omega_psi, delta_psi, h_new, omega_psi_d_dot, gains_),
                 -options_.gamma_y_max, options_.gamma_y_max);

  if (options_.tilt_compensation) {
    const double c = std::sqrt(1.0 - gamma_yd * gamma_yd);
    out.gamma_p = compose_reduced_attitude(c * gamma_xd, gamma_yd, c * gamma_zd);
    f_flap /= std::sqrt(c);
  } else {
    out.gamma_p = compose_reduced_attitude(gamma_xd, gamma_yd, gamma_zd);
  }
  out.f_flap = f_flap;
  out.tail = inner_attitude(out.gamma_p, meas.gamma, meas.omega_body, gains_);
  out.psi_d = psi_d;
  out.psi_d_dot = psi_d_dot;
  out.errors = err;
  const LyapunovReport lr = lyapunov_monitors(err, h_new, psi_d_dot, meas.omega_psi, gains_);
  out.jump_delta_formula = lr.jump_delta;

  ControllerLogRow& row = out.log;
  row.t = t;
  row.e_p = err.e_p;
  row.e_v = err.e_v;
  row.delta_psi = delta_psi;
  row.h_psi = h_new;
  row.omega_psi_d = omega_psi_d;
  row.gamma_yd = gamma_yd;
  row.f_flap_cmd = f_flap;
  row.theta_rud_cmd = out.tail.theta_rud;
  row.theta_ele_cmd = out.tail.theta_ele;
  row.V1 = lr.V1;
  row.V2 = lr.V2;
  return out;
}

}  // namespace fwav::control
