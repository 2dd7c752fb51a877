#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fwav/constraints.hpp"
#include "fwav/qp.hpp"
#include "fwav/trajectory.hpp"

namespace fwav::planner {

struct PlanOptions {
  int segments = 1;
  int order = 6;
  double T = 3.0;  // s per segment
  int restarts = 16;
  std::uint64_t seed = 1;
  int max_outer = 40;
  int max_inner = 300;
  /// Acceptance threshold on every Rec aggregate at the planner samples.
  double tolerance = 1e-6;
  /// Relative tightening of speed and heading-rate limits inside the optimizer.
  double limit_tightening = 0.01;
  /// Smoothing width of |v| in the path-length term (optimizer only).
  double l1_smoothing = 1e-3;
  bool parallel = true;

  Layout layout() const { return Layout{segments, order, T}; }
  void validate() const;
};

struct RestartSummary {
  int index = 0;
  bool feasible = false;
  double objective = 0.0;
  double max_inequality = 0.0;
  int outer_iterations = 0;
  double penalty = 0.0;
};

struct PlanReport {
  ResidualReport residuals;        // planner sample grid
  ResidualReport dense_residuals;  // 10x denser verification grid
  double objective = 0.0;
  double kkt_residual = 0.0;
  double penalty = 0.0;
  int best_restart = -1;
  int outer_iterations = 0;
  bool feasible = false;
  std::vector<RestartSummary> restarts;

  std::string to_string() const;
};

struct PlanResult {
  PiecewiseTrajectory traj;
  PlanReport report;
};

/// Multi-start augmented-Lagrangian minimization of snap_objective with the
/// equality constraints eliminated exactly. Throws InfeasiblePlan when no
/// restart drives every sampled aggregate below opts.tolerance.
PlanResult plan(const ConstraintSet& cons, const ObjectiveWeights& weights,
                const PlanOptions& opts);

}  // namespace fwav::planner
