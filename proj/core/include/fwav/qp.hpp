#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fwav/constraints.hpp"
#include "fwav/trajectory.hpp"

namespace fwav::planner {

/// Coefficient layout of a decision vector: [segment][axis][coefficient].
struct Layout {
  int segments = 1;
  int order = 6;
  double T = 3.0;

  int coeffs_per_axis() const { return order + 1; }
  int size() const { return segments * 3 * coeffs_per_axis(); }
  int index(int seg, int axis, int coef) const {
    return (seg * 3 + axis) * coeffs_per_axis() + coef;
  }
};

/// Monomial row r with r . c = d^k/dt^k sum_i c_i t^i.
Eigen::RowVectorXd monomial_row(int order, double t, int derivative);

Eigen::VectorXd trajectory_to_vector(const PiecewiseTrajectory& traj);
PiecewiseTrajectory trajectory_from_vector(const Eigen::VectorXd& x, const Layout& layout);

/// Linear equality constraints A x = b with one readable name per row.
struct EqualitySystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<std::string> rows;
};

/// Boundary position/velocity/acceleration, waypoints and continuity of
/// orders 0..3 at every junction.
EqualitySystem build_equality_system(const ConstraintSet& cons, const Layout& layout);

/// Block-diagonal snap Hessian H with x^T H x = snap integral.
Eigen::MatrixXd snap_hessian_full(const Layout& layout);

/// Row indices of A that are linearly dependent on earlier rows (pivoted QR).
std::vector<int> dependent_rows(const Eigen::MatrixXd& A, double tol = 1e-10);

struct QpSolution {
  PiecewiseTrajectory traj;
  double objective = 0.0;     // mu_p * snap integral
  double kkt_residual = 0.0;  // max-norm residual of the KKT system
};

/// Exact minimizer of mu_p * snap subject to the equality constraints of
/// `cons` (inequalities are ignored). Requires weights.mu_v == 0.
/// Throws RankDeficient naming dependent rows, or when the objective does not
/// determine the solution on the constraint nullspace.
QpSolution solve_qp_equality(const ConstraintSet& cons, const ObjectiveWeights& weights,
                             const Layout& layout);

}  // namespace fwav::planner
