#include "fwav/se3.hpp"

#include <cmath>
#include <numbers>

#include "fwav/errors.hpp"

namespace fwav::se3 {

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) return identity();
  return {std::cos(0.5 * angle), std::sin(0.5 * angle) * axis / n};
}

UnitQuaternion UnitQuaternion::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InvalidInput("cannot normalize a zero or non-finite quaternion");
  }
  return {eta / n, epsilon / n};
}

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
  return {a.eta * b.eta - a.epsilon.dot(b.epsilon),
          a.eta * b.epsilon + b.eta * a.epsilon + a.epsilon.cross(b.epsilon)};
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) {
  const Mat3 a = 0.5 * (m - m.transpose());
  return {a(2, 1), a(0, 2), a(1, 0)};
}

Mat3 quat_to_rot(const UnitQuaternion& q) {
  if (std::abs(q.norm() - 1.0) > kQuaternionNormTolerance) {
    throw InvalidInput("quat_to_rot: quaternion is not unit norm");
  }
  const Mat3 e = skew(q.epsilon);
  return Mat3::Identity() + 2.0 * q.eta * e + 2.0 * e * e;
}

UnitQuaternion rot_to_quat(const Mat3& R) {
  const double tr = R.trace();
  UnitQuaternion q;
  if (tr > 0.0) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q.eta = 0.25 * s;
    q.epsilon = Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2));
    q.eta = (R(2, 1) - R(1, 2)) / s;
    q.epsilon = Vec3(0.25 * s, (R(0, 1) + R(1, 0)) / s, (R(0, 2) + R(2, 0)) / s);
  } else if (R(1, 1) > R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2));
    q.eta = (R(0, 2) - R(2, 0)) / s;
    q.epsilon = Vec3((R(0, 1) + R(1, 0)) / s, 0.25 * s, (R(1, 2) + R(2, 1)) / s);
  } else {
    const double s = 2.0 * std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1));
    q.eta = (R(1, 0) - R(0, 1)) / s;
    q.epsilon = Vec3((R(0, 2) + R(2, 0)) / s, (R(1, 2) + R(2, 1)) / s, 0.25 * s);
  }
  if (q.eta < 0.0) {
    q.eta = -q.eta;
    q.epsilon = -q.epsilon;
  }
  return q.normalized();
}

ReducedAttitude reduced_attitude(const Mat3& R) {
  return {R.transpose() * Vec3::UnitZ()};
}

ReducedAttitude reduced_attitude(const UnitQuaternion& q) {
  ReducedAttitude g = reduced_attitude(quat_to_rot(q));
  g.gamma.normalize();
  return g;
}

double wrap_angle(double angle) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

Mat3 yaw_rotation(double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Mat3 r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

double heading_of(const UnitQuaternion& q) {
  return wrap_angle(2.0 * std::atan2(q.epsilon.z(), q.eta));
}

UnitQuaternion tilt_quaternion(const ReducedAttitude& gamma, int sign) {
  if (sign != 1 && sign != -1) throw InvalidInput("tilt_quaternion: sign must be +1 or -1");
  const Vec3 g = gamma.gamma;
  const double w = g.z() + 1.0;
  if (w < kAntipodalGuard) {
    throw DegenerateAttitude("reduced attitude is antipodal to e3; tilt is undefined");
  }
  const UnitQuaternion raw{sign * w, sign * g.cross(Vec3::UnitZ())};
  return raw.normalized();
}

UnitQuaternion recover_attitude_quaternion(const ReducedAttitude& gamma, double psi, int sign) {
  const UnitQuaternion yaw = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), psi);
  return (yaw * tilt_quaternion(gamma, sign)).normalized();
}

Mat3 recover_attitude(const ReducedAttitude& gamma, double psi, int sign) {
  return yaw_rotation(psi) * quat_to_rot(tilt_quaternion(gamma, sign));
}

AngularVelocityEstimate angular_velocity_from_rotation(const Mat3& R, const Mat3& Rdot) {
  const Mat3 w = Rdot * R.transpose();
  AngularVelocityEstimate out;
  out.omega = vee(w);
  out.symmetric_residual = (0.5 * (w + w.transpose())).norm();
  return out;
}

}  // namespace fwav::se3
