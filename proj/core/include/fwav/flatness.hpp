#pragma once

#include <array>
#include <optional>

#include "fwav/dynamics.hpp"
#include "fwav/params.hpp"
#include "fwav/se3.hpp"

namespace fwav::flatness {

using se3::ReducedAttitude;
using se3::UnitQuaternion;

/// Number of flat-output derivatives carried by a sample. Four are enough for
/// the states and inputs; the extra orders make input rates exact as well.
inline constexpr int kMaxDerivative = 6;

inline constexpr double kDefaultVEps = 0.05;  // m/s
inline constexpr double kDefaultFEps = 1.0;   // Hz

/// Flat outputs sigma = (x, y, z) and their time derivatives. An explicit
/// heading channel (psi and its derivatives) may be supplied instead of
/// deriving psi from the velocity azimuth.
struct FlatSample {
  Vec3 sigma = Vec3::Zero();
  std::array<Vec3, kMaxDerivative> d{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                     Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::optional<std::array<double, kMaxDerivative + 1>> psi;

  const Vec3& d1() const { return d[0]; }
  const Vec3& d2() const { return d[1]; }
  const Vec3& d3() const { return d[2]; }
  const Vec3& d4() const { return d[3]; }

  /// Sample with the given derivatives up to order 4; higher orders zero.
  static FlatSample make(const Vec3& sigma, const Vec3& d1, const Vec3& d2 = Vec3::Zero(),
                         const Vec3& d3 = Vec3::Zero(), const Vec3& d4 = Vec3::Zero());
  void set_heading(double psi0, double psi_rate = 0.0, double psi_acc = 0.0);
};

/// What to do when the horizontal speed is below v_eps and no heading is given.
enum class LowSpeedHeading {
  Hold,    // constant heading along the leading nonzero horizontal derivative
  Extend,  // analytic continuation of the velocity azimuth through the slow region
};

struct FlatOptions {
  double v_eps = kDefaultVEps;
  double f_eps = kDefaultFEps;
  LowSpeedHeading low_speed = LowSpeedHeading::Hold;
  /// When the wind-vane inversion would need |Gamma_y| above gamma_y_limit,
  /// clamp it and assign the remaining yaw acceleration to the rudder term.
  bool rudder_assist = false;
  double gamma_y_limit = 0.5;
  /// When set, the velocity azimuth is replaced by its antipode if that lies
  /// closer to this heading. Body forward speed is then negative.
  std::optional<double> heading_branch;
  /// Quaternion of the previous sample; selects s_e for sign continuity.
  std::optional<UnitQuaternion> previous_attitude;
};

struct VerticalFlat {
  Vec3 vv = Vec3::Zero();
  Vec3 vv_dot = Vec3::Zero();
  double psi = 0.0;
  double omega_psi = 0.0;
  double omega_psi_dot = 0.0;
};

struct AttitudeThrust {
  ReducedAttitude gamma;
  double f_flap = 0.0;
  double f_flap_dot = 0.0;
  Vec3 gamma_dot = Vec3::Zero();
  /// Rudder deflection of the vertical model; nonzero only with rudder_assist.
  double theta_rud_vertical = 0.0;
  /// f^2 / f_eps^2, and the 1/sqrt(1 - Gamma_y^2) amplification of f^2.
  double thrust_margin = 0.0;
  double gamma_y_amplification = 1.0;
};

struct FlatInputs {
  double f_flap = 0.0;
  double theta_rud = 0.0;
  double theta_ele = 0.0;
};

struct FlatStateResult {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  VerticalFlat vertical;
  AttitudeThrust attitude;
  UnitQuaternion q;
  int s_e = 1;
  Vec3 omega = Vec3::Zero();          // body frame
  Vec3 omega_dot = Vec3::Zero();      // body frame
  Vec3 omega_inertial = Vec3::Zero(); // vee(Rdot R^T)
  FlatInputs inputs;
  FlatInputs input_rates;

  dynamics::FwavState to_state() const;
  /// Commands that make the first-order actuator lags reproduce the inputs.
  dynamics::FullCommand lag_compensated_command(const FwavParams& params) const;
};

/// Heading, vertical-frame velocity and their rates.
/// Throws DegenerateHeading when the horizontal speed is below v_eps and no
/// heading channel is present (unless options.low_speed == Extend applies).
VerticalFlat flat_to_vertical(const FlatSample& sample, const VerticalParams& params,
                              const FlatOptions& options = {});

/// Reduced attitude and flapping frequency. Throws NegligibleThrust or
/// InfeasibleHeadingAcceleration.
AttitudeThrust flat_to_attitude_and_thrust(const FlatSample& sample, const VerticalParams& params,
                                           const FlatOptions& options = {});

/// Full state and deflection inputs. Throws UnrecoverableDeflection when a
/// deflection torque gain vanishes at a sample that needs torque.
FlatStateResult flat_to_full(const FlatSample& sample, const VerticalParams& vparams,
                             const FwavParams& fparams, const FlatOptions& options = {});

}  // namespace fwav::flatness
