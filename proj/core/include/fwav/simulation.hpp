#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fwav/cases.hpp"
#include "fwav/controller.hpp"
#include "fwav/dynamics.hpp"
#include "fwav/params.hpp"
#include "fwav/trajectory.hpp"

namespace fwav::sim {

enum class ModelKind { Vertical, Full };

std::string model_name(ModelKind kind);
ModelKind parse_model(const std::string& name);

struct Scenario {
  planner::PlanningCase plan;
  ModelKind model = ModelKind::Vertical;
  ModelParams params;
  control::ControllerGains gains = control::ControllerGains::nominal();
  control::ControllerOptions controller;
  double dt = 1e-3;               // s, dynamics step
  double controller_rate = 100.0; // Hz
  /// Simulated time; 0 means the trajectory duration.
  double duration = 0.0;
  Vec3 position_offset = Vec3::Zero();
  Vec3 velocity_offset = Vec3::Zero();
  /// Magnitude of a random initial position offset drawn from `seed`.
  double perturb = 0.0;
  std::uint64_t seed = 1;
  double divergence_radius = 100.0;  // m

  void validate() const;
  /// Dynamics steps per controller tick (dt must divide the period).
  int steps_per_tick() const;
};

/// Scenario for a built-in case with default parameters and nominal gains.
Scenario scenario_for_case(const std::string& name);
/// JSON scenario: {"case": ..., or inline constraints, "model", "params",
/// "gains", "dt", "controller_rate", "duration", "perturb", "seed", ...}.
/// Relative file references resolve against the scenario's directory.
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);
/// A scenario file path if one exists, otherwise a case name.
Scenario resolve_scenario(const std::string& name_or_path);
std::string scenario_to_json(const Scenario& scenario);

struct FlipEvent {
  double t = 0.0;
  double V2_before = 0.0;
  double V2_after = 0.0;
  double jump_delta_formula = 0.0;
  double omega_psi = 0.0;
};

struct ClosedLoopResult {
  std::vector<dynamics::FullSample> states;  // full-schema log at every dynamics step
  std::vector<control::ControllerLogRow> controller_log;
  std::vector<FlipEvent> flips;
  std::vector<double> saturation_times;
  bool diverged = false;
  double divergence_time = 0.0;
  double duration = 0.0;
};

/// Closed-loop run of the tracking controller on the selected model along
/// `traj`, starting on the trajectory (plus offsets). Deterministic.
ClosedLoopResult run_closed_loop(const Scenario& scenario, const planner::PiecewiseTrajectory& traj);

std::string states_csv(const ClosedLoopResult& result);
std::string controller_log_csv(const ClosedLoopResult& result);

/// Initial vehicle heading along a trajectory (velocity azimuth or the
/// leading nonzero horizontal derivative).
double initial_heading(const planner::PiecewiseTrajectory& traj);

struct IdealCascadeOptions {
  double dt = 1e-3;
  double duration = 20.0;
  Vec3 position_offset = Vec3::Zero();
  Vec3 velocity_offset = Vec3::Zero();
  double psi_offset = 0.0;
  double omega_psi0 = 0.0;
  int h0 = 1;
};

struct IdealCascadeStep {
  double t = 0.0;
  Vec3 e_p = Vec3::Zero();
  Vec3 e_v = Vec3::Zero();
  double V1 = 0.0;
  double V1_dot_expected = 0.0;
  double V2 = 0.0;
  double flow_bound = 0.0;
  double delta_psi = 0.0;
  double omega_psi = 0.0;
};

struct IdealCascadeResult {
  std::vector<IdealCascadeStep> steps;
  std::vector<FlipEvent> flips;
};

/// Positional subsystem with v' = a_d enforced exactly (analytic v_d rate)
/// and the heading subsystem driven by Gamma_y through the lumped yaw law.
/// The reference is held at its final value after the trajectory ends.
IdealCascadeResult simulate_ideal_cascade(const planner::PiecewiseTrajectory& traj,
                                          const control::ControllerGains& gains,
                                          const VerticalParams& params,
                                          const IdealCascadeOptions& opts);

struct HeadingReversalOptions {
  double dt = 1e-3;
  double duration = 8.0;
  double step_time = 0.5;
  double psi0 = 0.0;
  double heading_offset = 0.0;
  double omega_psi0 = 0.0;
  int h0 = 1;
};

/// Hover at the origin while psi_d steps from psi0 to psi0 + pi at step_time.
/// The vehicle starts at psi0 + heading_offset.
IdealCascadeResult simulate_heading_reversal(const control::ControllerGains& gains,
                                             const VerticalParams& params,
                                             const HeadingReversalOptions& opts);

struct RoundTripResult {
  double max_position_error = 0.0;
  double worst_time = 0.0;
  std::vector<dynamics::VerticalSample> log;
};

/// Feeds flatness-recovered (Gamma, f_flap, rudder) into the vertical model
/// and compares the integrated position with sigma(t).
RoundTripResult flatness_round_trip(const planner::PiecewiseTrajectory& traj,
                                    const VerticalParams& params, double dt);

}  // namespace fwav::sim
