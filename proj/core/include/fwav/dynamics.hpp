#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "fwav/params.hpp"
#include "fwav/se3.hpp"

namespace fwav::dynamics {

using se3::ReducedAttitude;
using se3::UnitQuaternion;
using Vec16 = Eigen::Matrix<double, 16, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;

/// 16-state model: position/velocity inertial, body angular rate, actuator states.
struct FwavState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  UnitQuaternion q;
  Vec3 omega = Vec3::Zero();
  double f_flap = 0.0;     // Hz
  double theta_rud = 0.0;  // rad
  double theta_ele = 0.0;  // rad

  /// Layout: p, v, q (eta, eps), omega, f_flap, theta_rud, theta_ele.
  Vec16 to_vector() const;
  static FwavState from_vector(const Vec16& x);
};

struct FullCommand {
  double f_flap_c = 0.0;
  double theta_rud_c = 0.0;
  double theta_ele_c = 0.0;
};

enum class RudderMode {
  ExplicitRudder,  // rudder deflection plus wind-vane yaw torque
  GammaProxy,      // lumped law in which Gamma_y acts as the yaw input
};

enum class LateralMode {
  Constrained,  // vv_y held at zero (non-holonomic constraint)
  Relaxed,      // lateral row integrated as written for the vertical frame
};

/// Planar-heading model written in the vertical frame rotated by psi.
struct VerticalState {
  Vec3 p = Vec3::Zero();
  Vec3 vv = Vec3::Zero();  // vertical-frame velocity
  double psi = 0.0;
  double omega_psi = 0.0;

  Vec3 velocity() const { return se3::yaw_rotation(psi) * vv; }
  Vec8 to_vector() const;
  static VerticalState from_vector(const Vec8& x);
};

struct VerticalInputs {
  ReducedAttitude gamma;
  double f_flap = 0.0;
  double theta_rud = 0.0;  // only read in ExplicitRudder mode
  RudderMode rudder_mode = RudderMode::ExplicitRudder;
  LateralMode lateral_mode = LateralMode::Constrained;
};

/// k_tf f^2. Throws InvalidInput for f < 0.
double thrust_magnitude(double f_flap, double k_tf);
double thrust_magnitude(double f_flap, const FwavParams& params);

/// Componentwise -k_i sgn(v_i) v_i^2.
Vec3 body_drag(const Vec3& v_body, const Vec3& k_d);
inline Vec3 body_drag(const Vec3& v_body, const FwavParams& params) {
  return body_drag(v_body, params.k_d);
}

/// Tail deflection torque in the body frame.
Vec3 deflection_torque(const FwavState& state, const FwavParams& params);

/// Time derivative of the full state (quaternion part as 4 coefficients).
Vec16 full_rhs(const FwavState& state, const FullCommand& cmd, const FwavParams& params);

/// Yaw angular acceleration of the vertical model including damping.
double yaw_acceleration(const VerticalState& state, const VerticalInputs& in,
                        const VerticalParams& params);

/// Time derivative of the vertical-frame state.
Vec8 vertical_rhs(const VerticalState& state, const VerticalInputs& in,
                  const VerticalParams& params);

using FullSchedule = std::function<FullCommand(double t)>;
using VerticalSchedule = std::function<VerticalInputs(double t)>;

struct FullSample {
  double t = 0.0;
  FwavState x;
  FullCommand u;
};

struct VerticalSample {
  double t = 0.0;
  VerticalState x;
  VerticalInputs u;
};

/// One RK4 step; inputs are evaluated at the stage times and q is renormalized.
FwavState step_full(const FwavState& x, double t, double dt, const FullSchedule& u,
                    const FwavParams& params);
VerticalState step_vertical(const VerticalState& x, double t, double dt,
                            const VerticalSchedule& u, const VerticalParams& params);

/// Fixed-step integration logging every step (including t = 0).
/// Throws InvalidInput for bad dt/duration and PropagationError on NaN/Inf.
std::vector<FullSample> integrate_full(const FwavState& x0, const FullSchedule& u,
                                       const FwavParams& params, double dt, double duration);
std::vector<VerticalSample> integrate_vertical(const VerticalState& x0,
                                               const VerticalSchedule& u,
                                               const VerticalParams& params, double dt,
                                               double duration);

inline constexpr const char* kStateLogHeader =
    "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,fflap,thrud,thele";

/// Full-schema state log.
std::string full_log_csv(const std::vector<FullSample>& log);

/// Vertical runs in the full schema: q = R(psi) R(q_e(Gamma)), w = (0, 0, omega_psi)
/// (inertial yaw rate), thele = 0.
std::string vertical_log_csv(const std::vector<VerticalSample>& log);

/// Vertical state with the vertical-frame constraint applied to an inertial velocity.
VerticalState vertical_from_inertial(const Vec3& p, const Vec3& v, double psi, double omega_psi);

}  // namespace fwav::dynamics
