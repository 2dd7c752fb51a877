#pragma once

#include <Eigen/Dense>

namespace fwav::se3 {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion q = [eta, epsilon] (scalar first, Hamilton product).
struct UnitQuaternion {
  double eta = 1.0;
  Vec3 epsilon = Vec3::Zero();

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);

  double norm() const { return std::sqrt(eta * eta + epsilon.squaredNorm()); }
  UnitQuaternion normalized() const;
  UnitQuaternion conjugate() const { return {eta, -epsilon}; }
  Eigen::Vector4d coeffs() const { return {eta, epsilon.x(), epsilon.y(), epsilon.z()}; }
};

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b);

/// Body z-axis expressed through Gamma = R^T(q) e3; yaw invariant.
struct ReducedAttitude {
  Vec3 gamma = Vec3::UnitZ();

  double x() const { return gamma.x(); }
  double y() const { return gamma.y(); }
  double z() const { return gamma.z(); }
  bool is_unit(double tol = 1e-9) const { return std::abs(gamma.squaredNorm() - 1.0) <= tol; }
};

/// Tolerance on |q| - 1 accepted by quat_to_rot.
inline constexpr double kQuaternionNormTolerance = 1e-6;
/// Recovery of the tilt quaternion needs Gamma^T e3 + 1 above this.
inline constexpr double kAntipodalGuard = 1e-6;
/// Symmetric part of Rdot R^T above which the derivative is flagged.
inline constexpr double kRotationDerivativeTolerance = 1e-6;

/// R(q) = I + 2 eta [eps]x + 2 [eps]x^2. Throws InvalidInput for non-unit q.
Mat3 quat_to_rot(const UnitQuaternion& q);

/// Shepperd's method; the returned quaternion has eta >= 0.
UnitQuaternion rot_to_quat(const Mat3& R);

Mat3 skew(const Vec3& v);

/// Inverse of skew() applied to the antisymmetric part of m.
Vec3 vee(const Mat3& m);

ReducedAttitude reduced_attitude(const UnitQuaternion& q);
ReducedAttitude reduced_attitude(const Mat3& R);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// Rotation about inertial Z by psi (inertial -> vertical frame change of basis).
Mat3 yaw_rotation(double psi);

/// Azimuth of the body attitude: psi such that R = R(psi) R(q_e) with q_e a pure tilt.
double heading_of(const UnitQuaternion& q);

/// Pure-tilt quaternion q_e = q_er / |q_er|, q_er = s_e [Gamma^T e3 + 1, Gamma x e3].
UnitQuaternion tilt_quaternion(const ReducedAttitude& gamma, int sign = 1);

/// R(psi) R(q_e). Throws DegenerateAttitude when Gamma^T e3 + 1 < kAntipodalGuard.
Mat3 recover_attitude(const ReducedAttitude& gamma, double psi, int sign = 1);
UnitQuaternion recover_attitude_quaternion(const ReducedAttitude& gamma, double psi, int sign = 1);

struct AngularVelocityEstimate {
  Vec3 omega = Vec3::Zero();
  /// Frobenius norm of the symmetric part of Rdot R^T.
  double symmetric_residual = 0.0;
  bool consistent() const { return symmetric_residual <= kRotationDerivativeTolerance; }
};

/// Extracts omega from [omega]x = Rdot R^T. The result is expressed in the
/// frame R maps into (inertial when R is body-to-inertial).
AngularVelocityEstimate angular_velocity_from_rotation(const Mat3& R, const Mat3& Rdot);

}  // namespace fwav::se3
