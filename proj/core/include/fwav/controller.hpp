#pragma once

#include <Eigen/Dense>
#include <string>

#include "fwav/io.hpp"
#include "fwav/params.hpp"
#include "fwav/se3.hpp"

namespace fwav::control {

using se3::ReducedAttitude;

struct ControllerGains {
  Mat3 Kp = Vec3(0.8, 0.8, 3.0).asDiagonal();
  Mat3 Kv = Vec3(1.2, 1.2, 6.0).asDiagonal();
  double k_psi = 8.0;
  double k_omega = 0.5;
  double delta = 0.2;
  double l_gamma_min = 10.0;
  double l_gamma_max = 40.0;
  double k_rud = 0.5;
  double k_ele = 0.5;
  double k_omega_x = 0.02;
  double k_omega_y = 0.02;
  double filter_wn = 20.0;   // rad/s
  double filter_zeta = 1.0;
  double psi_rate_ff_cap = 1.5;  // rad/s

  /// Gains used for closed-loop tracking runs.
  static ControllerGains nominal();
  /// Slow heading gains for which the jump-decrease margin is real.
  static ControllerGains certified();
  void validate() const;
};

ControllerGains gains_from_document(const io::KeyValueDocument& doc);
io::KeyValueDocument gains_to_document(const ControllerGains& gains);
ControllerGains load_gains(const std::string& path);

enum class DecomposeMode {
  Verbatim,       // heading from the azimuth of a_d, drag added along the body
  DragAugmented,  // heading from the azimuth of a_d plus horizontal drag compensation
};

struct ControllerOptions {
  DecomposeMode decompose = DecomposeMode::DragAugmented;
  /// Differentiate v_d analytically (needs the reference acceleration)
  /// instead of through the command filter.
  bool analytic_vd_dot = false;
  double a_eps = 0.1;              // m/s^2
  double heading_accel_eps = 0.05; // m/s^2, below this psi_d is held
  double gamma_y_max = 0.8;        // clamp on the Gamma_y demand
  /// Keep the vertical-plane thrust of the decomposition when Gamma_y tilts
  /// the body: scale Gamma_x, Gamma_z by sqrt(1 - Gamma_y^2) and raise f^2 to match.
  /// Off gives plain normalization of (Gamma_xd, Gamma_yd, Gamma_zd).
  bool tilt_compensation = true;
  /// A psi_d change larger than this within one tick resets its filter.
  double psi_jump_reset = 1.5707963267948966;
};

struct TrackingErrors {
  Vec3 e_p = Vec3::Zero();
  Vec3 e_v = Vec3::Zero();
  double e_psi = 0.0;
  double e_omega_psi = 0.0;
  double delta_psi = 0.0;
};

/// e_p = sigma_r - p, e_v = v_d - v (heading fields left zero).
TrackingErrors position_errors(const Vec3& p, const Vec3& v, const Vec3& sigma_r,
                               const Vec3& v_d);
/// sqrt(2) - sqrt(1 + cos(delta_psi)).
double azimuth_error(double delta_psi);

Vec3 tanh(const Vec3& x);
/// sigma_r_dot + Kp tanh(e_p).
Vec3 desired_velocity(const Vec3& sigma_r_dot, const Vec3& e_p, const Mat3& Kp);
/// v_d_dot + Kv Kp^-1 tanh(e_p) + Kv tanh(e_v).
Vec3 desired_acceleration(const Vec3& v_d_dot, const Vec3& e_p, const Vec3& e_v, const Mat3& Kp,
                          const Mat3& Kv);
/// Exact time derivative of v_d given the reference acceleration and velocity.
Vec3 desired_velocity_rate(const Vec3& sigma_r_ddot, const Vec3& sigma_r_dot, const Vec3& v,
                           const Vec3& e_p, const Mat3& Kp);

struct Decomposition {
  double psi_d = 0.0;
  double f_flap = 0.0;
  double gamma_xd = 0.0;
  double gamma_zd = 1.0;
  double vdot_cx = 0.0;
  double vdot_cz = 0.0;
  bool heading_held = false;
};

struct DecomposeContext {
  DecomposeMode mode = DecomposeMode::Verbatim;
  double psi = 0.0;             // current heading (DragAugmented)
  double previous_psi_d = 0.0;  // held when the horizontal demand vanishes
  double a_eps = 0.1;
  double heading_accel_eps = 0.0;
};

/// Thrust and tilt demand for a desired inertial acceleration. Throws
/// DegenerateDecomposition when |(vdot_cx, vdot_cz)| <= a_eps.
Decomposition decompose(const Vec3& a_d, const Vec3& vv, const VerticalParams& params,
                        const DecomposeContext& ctx = {});

/// psi_d_dot (clamped to +-cap) + k_psi h sqrt(1 - cos delta_psi).
double heading_rate_command(double delta_psi, double psi_d_dot, int h_psi, double k_psi,
                            double cap);
/// Hysteretic logic variable update; sin(delta_psi) = 0 keeps h.
int hysteresis_update(int h_psi, double delta_psi, double delta);
/// Robust, feedforward and linear terms of the Gamma_y demand.
double gamma_y_command(double e_omega_psi, double delta_psi, int h_psi,
                       double omega_psi_d_dot, const ControllerGains& gains);
/// Normalized (Gamma_xd, Gamma_yd, Gamma_zd). Throws InvalidInput for zero.
ReducedAttitude compose_reduced_attitude(double gamma_xd, double gamma_yd, double gamma_zd);

struct TailCommand {
  double theta_rud = 0.0;
  double theta_ele = 0.0;
};
TailCommand inner_attitude(const ReducedAttitude& gamma_p, const ReducedAttitude& gamma,
                           const Vec3& omega, const ControllerGains& gains);

/// Second-order low-pass y'' = wn^2 (u - y) - 2 zeta wn y' with the input
/// held over each update.
class CommandFilter {
 public:
  CommandFilter() = default;
  CommandFilter(double wn, double zeta);

  /// Advances by dt with input u; the first call initializes to u at rest.
  void update(double u, double dt);
  /// Snap to u with zero rate.
  void reset(double u);
  double value() const { return y_; }
  double rate() const { return ydot_; }
  bool initialized() const { return initialized_; }

 private:
  double wn_ = 20.0;
  double zeta_ = 1.0;
  double y_ = 0.0;
  double ydot_ = 0.0;
  bool initialized_ = false;
};

struct StabilityMargin {
  double omega_bar_psi = 0.0;
  double omega_psi_max = 0.0;  // 0 when the margin is violated
  bool margin_ok = false;
};
StabilityMargin heading_stability_margin(const ControllerGains& gains, double psi_rate_ff_cap);

double lyapunov_v1(const Vec3& e_p, const Vec3& e_v, const ControllerGains& gains);
/// V2 with the hysteretic term; sgn(sin) = 0 selects h.
double lyapunov_v2(double delta_psi, double e_omega_psi, int h_psi, const ControllerGains& gains);

struct LyapunovReport {
  double V1 = 0.0;
  double V1_dot_expected = 0.0;
  double V2 = 0.0;
  double flow_bound = 0.0;
  /// Closed-form change of V2 across a jump at |sin delta_psi| = delta.
  double jump_delta = 0.0;
};
LyapunovReport lyapunov_monitors(const TrackingErrors& errors, int h_psi, double psi_d_dot,
                                 double omega_psi, const ControllerGains& gains);

struct Reference {
  Vec3 sigma = Vec3::Zero();
  Vec3 sigma_dot = Vec3::Zero();
  Vec3 sigma_ddot = Vec3::Zero();
  /// Overrides the decomposed heading when set (forced heading scenarios).
  bool psi_override = false;
  double psi_d = 0.0;
};

struct Measurement {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double psi = 0.0;
  double omega_psi = 0.0;
  ReducedAttitude gamma;
  Vec3 omega_body = Vec3::Zero();
};

struct ControllerLogRow {
  double t = 0.0;
  Vec3 e_p = Vec3::Zero();
  Vec3 e_v = Vec3::Zero();
  double delta_psi = 0.0;
  int h_psi = 1;
  double omega_psi_d = 0.0;
  double gamma_yd = 0.0;
  double f_flap_cmd = 0.0;
  double theta_rud_cmd = 0.0;
  double theta_ele_cmd = 0.0;
  double V1 = 0.0;
  double V2 = 0.0;
};

inline constexpr const char* kControllerLogHeader =
    "t,epx,epy,epz,evx,evy,evz,dpsi,hpsi,omegapsid,gammayd,fflapcmd,thrudcmd,thelecmd,V1,V2";
std::string controller_log_row_csv(const ControllerLogRow& row);

struct ControlOutput {
  ReducedAttitude gamma_p;
  double f_flap = 0.0;
  TailCommand tail;
  double psi_d = 0.0;
  double psi_d_dot = 0.0;
  bool psi_rate_saturated = false;
  bool flipped = false;
  /// V2 at this state before and after the logic update (equal without a flip).
  double V2_before = 0.0;
  double V2_after = 0.0;
  double jump_delta_formula = 0.0;
  TrackingErrors errors;
  ControllerLogRow log;
};

struct ControllerState {
  int h_psi = 1;
  CommandFilter psi_filter;
  CommandFilter omega_filter;
  CommandFilter vd_filter[3];
  double psi_d_unwrapped = 0.0;
  double last_omega_psi_d = 0.0;
  double last_f_flap = 0.0;
  double last_gamma_xd = 0.0;
  double last_gamma_zd = 1.0;
  bool initialized = false;
  int flip_count = 0;
  int saturation_count = 0;
};

/// Cascaded tracking controller; one update per controller tick.
class TrackingController {
 public:
  TrackingController(const ControllerGains& gains, const VerticalParams& params,
                     const ControllerOptions& options = {});

  /// Initializes heading references to psi0 before the first tick.
  void reset(double psi0, int h0 = 1);
  ControlOutput update(double t, const Reference& ref, const Measurement& meas, double dt);

  const ControllerState& state() const { return state_; }
  const ControllerGains& gains() const { return gains_; }
  const ControllerOptions& options() const { return options_; }

 private:
  ControllerGains gains_;
  VerticalParams params_;
  ControllerOptions options_;
  ControllerState state_;
};

}  // namespace fwav::control
