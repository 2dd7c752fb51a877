#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "fwav/trajectory.hpp"

namespace fwav::planner {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.5;
};

/// Cylinder of infinite extent along inertial X.
struct CylinderX {
  Eigen::Vector2d center_yz = Eigen::Vector2d::Zero();
  double radius = 0.3;
};

using ObstacleShape = std::variant<Sphere, CylinderX>;

/// Signed clearance (distance to the axis or center minus radius - margin).
/// With origin_form a sphere is measured from the inertial origin instead of
/// its center.
double clearance(const ObstacleShape& shape, const Vec3& p, double margin = 0.0,
                 bool origin_form = false);
/// Gradient of clearance with respect to p (unit length; a fixed direction is
/// used when p sits exactly on the center/axis).
Vec3 clearance_gradient(const ObstacleShape& shape, const Vec3& p, bool origin_form = false);

struct BoundaryState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

struct Waypoint {
  int segment = 0;
  double local_time = 0.0;
  Vec3 position = Vec3::Zero();
};

struct ConstraintSet {
  BoundaryState start;
  BoundaryState end;
  std::vector<Waypoint> waypoints;
  double v_h_max = 1.5;       // m/s
  double v_v_max = 1.0;       // m/s
  double psi_rate_max = 1.5;  // rad/s
  bool enforce_psi_rate = true;
  std::vector<ObstacleShape> obstacles;
  double sample_interval = 0.15;  // s
  /// Radius inflation applied while planning (not in reported residuals).
  double obstacle_margin = 0.05;
  bool ball_origin_form = false;
  /// Horizontal speed below which the heading rate is not constrained.
  double v_eps = 0.05;

  /// Throws InvalidInput if a limit or obstacle is malformed.
  void validate() const;
};

/// Rec(x) = max(x, 0).
inline double rec(double x) { return x > 0.0 ? x : 0.0; }

/// Interior sample times k * interval in the open interval (0, duration).
std::vector<double> sample_times(double duration, double interval);

/// Horizontal heading rate (x' y'' - y' x'') / (x'^2 + y'^2).
double heading_rate(const Vec3& v, const Vec3& a);

struct NamedResidual {
  std::string name;
  double value = 0.0;
  bool equality = true;
  /// Sample time of the largest single contribution (inequalities only).
  double worst_time = std::numeric_limits<double>::quiet_NaN();
};

struct ResidualReport {
  std::vector<NamedResidual> entries;

  double max_equality() const;
  double max_inequality() const;
  const NamedResidual& worst() const;
  const NamedResidual* find(const std::string& name) const;
  std::string to_string() const;
};

/// Equality residuals (boundary, waypoints, continuity) and the sampled
/// Rec aggregates (speeds, heading rate, one per obstacle). The obstacle
/// margin is `margin`, not cons.obstacle_margin, so reports use true radii.
ResidualReport constraint_residuals(const PiecewiseTrajectory& traj, const ConstraintSet& cons,
                                    double margin = 0.0);
ResidualReport constraint_residuals(const PiecewiseTrajectory& traj, const ConstraintSet& cons,
                                    const std::vector<double>& times, double margin = 0.0);

}  // namespace fwav::planner
