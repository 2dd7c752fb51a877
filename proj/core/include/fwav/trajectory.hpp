#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "fwav/flatness.hpp"

namespace fwav::planner {

/// sigma_j(t) = sum_i c_i t^i on local time t in (0, T], one row per axis.
struct PolySegment {
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(3, 7);  // 3 x (N + 1)
  double T = 3.0;

  int order() const { return static_cast<int>(coeffs.cols()) - 1; }
  /// Derivative of the given order at local time t.
  Vec3 eval(double t, int derivative = 0) const;
};

class PiecewiseTrajectory {
 public:
  PiecewiseTrajectory() = default;
  explicit PiecewiseTrajectory(std::vector<PolySegment> segments);

  const std::vector<PolySegment>& segments() const { return segments_; }
  int segment_count() const { return static_cast<int>(segments_.size()); }
  double duration() const;
  /// Global start time of each segment.
  double segment_start(int index) const;

  /// Segment index and local time of a global time. Junctions resolve to the
  /// later segment at local time 0; the final instant stays on the last one.
  std::pair<int, double> locate(double t) const;

  /// Throws DomainError outside [0, duration].
  Vec3 eval(double t, int derivative = 0) const;

  /// Flat sample carrying all derivatives used by the flatness map.
  flatness::FlatSample flat_sample(double t) const;

  /// Largest |jump| over junctions for derivative orders 0..max_order.
  double continuity_mismatch(int max_order = 3) const;

  /// Same trajectory shifted by a constant offset.
  PiecewiseTrajectory translated(const Vec3& offset) const;

 private:
  std::vector<PolySegment> segments_;
  std::vector<double> starts_;
};

struct ObjectiveWeights {
  double mu_p = 1.0;  // snap weight
  double mu_v = 0.1;  // path-length weight
};

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Quadrature points per segment for the path-length term.
inline constexpr int kVelocityQuadratureOrder = 64;

/// integral of sum_j (sigma_j^(4))^2 over [0, T] as a quadratic form in the
/// monomial coefficients of one axis.
Eigen::MatrixXd snap_hessian(int order, double T);

/// mu_p * closed-form snap integral + mu_v * quadrature of sum_j |sigma_j'|.
double snap_objective(const PiecewiseTrajectory& traj, const ObjectiveWeights& weights);
double snap_integral(const PiecewiseTrajectory& traj);
double velocity_l1_integral(const PiecewiseTrajectory& traj);

/// `seg,axis,c0..cN,T` rows.
std::string trajectory_to_csv(const PiecewiseTrajectory& traj);
PiecewiseTrajectory trajectory_from_csv(const std::string& text);
void save_trajectory(const std::string& path, const PiecewiseTrajectory& traj);
PiecewiseTrajectory load_trajectory(const std::string& path);

/// `t,x,y,z,vx,vy,vz,ax,ay,az,jx,jy,jz,sx,sy,sz` rows every dt (end point included).
std::string sampled_csv(const PiecewiseTrajectory& traj, double dt);

}  // namespace fwav::planner
