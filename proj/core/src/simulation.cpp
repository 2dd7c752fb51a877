#include "fwav/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fwav/errors.hpp"
#include "fwav/flatness.hpp"
#include "fwav/io.hpp"
#include "fwav/rk4.hpp"

namespace fwav::sim {

using control::ControllerGains;
using control::TrackingController;
using dynamics::FullSample;
using dynamics::VerticalInputs;
using dynamics::VerticalState;
using planner::PiecewiseTrajectory;
using json = nlohmann::json;

std::string model_name(ModelKind kind) { return kind == ModelKind::Full ? "full" : "vertical"; }

ModelKind parse_model(const std::string& name) {
  if (name == "vertical") return ModelKind::Vertical;
  if (name == "full") return ModelKind::Full;
  throw InvalidInput("unknown model '" + name + "' (expected vertical or full)");
}

void Scenario::validate() const {
  plan.constraints.validate();
  plan.options.validate();
  params.validate();
  gains.validate();
  if (!(dt > 0.0)) throw InvalidInput("scenario: dt must be positive");
  if (!(controller_rate > 0.0)) throw InvalidInput("scenario: controller_rate must be positive");
  if (duration < 0.0) throw InvalidInput("scenario: duration must be non-negative");
  if (perturb < 0.0) throw InvalidInput("scenario: perturb must be non-negative");
  steps_per_tick();
}

int Scenario::steps_per_tick() const {
  const double ratio = 1.0 / (controller_rate * dt);
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
    throw InvalidInput("scenario: dt must divide the controller period");
  }
  return static_cast<int>(n);
}

Scenario scenario_for_case(const std::string& name) {
  Scenario s;
  s.plan = planner::case_library(name);
  return s;
}

namespace {

Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput("scenario: expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void read_boundary(const json& j, planner::BoundaryState& b) {
  if (j.contains("position")) b.position = vec3(j["position"]);
  if (j.contains("velocity")) b.velocity = vec3(j["velocity"]);
  if (j.contains("acceleration")) b.acceleration = vec3(j["acceleration"]);
}

json boundary_json(const planner::BoundaryState& b) {
  return json{{"position", to_json(b.position)},
              {"velocity", to_json(b.velocity)},
              {"acceleration", to_json(b.acceleration)}};
}

std::string resolve(const std::string& ref, const std::string& base) {
  std::filesystem::path p(ref);
  if (p.is_relative()) p = std::filesystem::path(base) / p;
  return p.string();
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j[key].get<T>();
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("scenario: ") + e.what());
  }
  try {
    Scenario s;
    if (j.contains("case")) s.plan = planner::case_library(j["case"].get<std::string>());
    if (j.contains("constraints")) {
      const json& c = j["constraints"];
      planner::ConstraintSet& cs = s.plan.constraints;
      if (c.contains("start")) read_boundary(c["start"], cs.start);
      if (c.contains("end")) read_boundary(c["end"], cs.end);
      if (c.contains("waypoints")) {
        cs.waypoints.clear();
        for (const json& w : c["waypoints"]) {
          cs.waypoints.push_back(planner::Waypoint{w.at("segment").get<int>(),
                                                   w.at("local_time").get<double>(),
                                                   vec3(w.at("position"))});
        }
      }
      if (c.contains("obstacles")) {
        cs.obstacles.clear();
        for (const json& o : c["obstacles"]) {
          const std::string type = o.at("type").get<std::string>();
          if (type == "sphere") {
            cs.obstacles.push_back(planner::Sphere{vec3(o.at("center")), o.at("radius").get<double>()});
          } else if (type == "cylinder_x") {
            const json& yz = o.at("center_yz");
            cs.obstacles.push_back(planner::CylinderX{
                Eigen::Vector2d(yz.at(0).get<double>(), yz.at(1).get<double>()),
                o.at("radius").get<double>()});
          } else {
            throw InvalidInput("scenario: unknown obstacle type '" + type + "'");
          }
        }
      }
      read(c, "v_h_max", cs.v_h_max);
      read(c, "v_v_max", cs.v_v_max);
      read(c, "psi_rate_max", cs.psi_rate_max);
      read(c, "enforce_psi_rate", cs.enforce_psi_rate);
      read(c, "sample_interval", cs.sample_interval);
      read(c, "obstacle_margin", cs.obstacle_margin);
      read(c, "ball_origin_form", cs.ball_origin_form);
    }
    if (j.contains("weights")) {
      read(j["weights"], "mu_p", s.plan.weights.mu_p);
      read(j["weights"], "mu_v", s.plan.weights.mu_v);
    }
    if (j.contains("plan")) {
      const json& p = j["plan"];
      read(p, "segments", s.plan.options.segments);
      read(p, "order", s.plan.options.order);
      read(p, "T", s.plan.options.T);
      read(p, "restarts", s.plan.options.restarts);
      read(p, "seed", s.plan.options.seed);
    }
    if (j.contains("name")) s.plan.name = j["name"].get<std::string>();
    if (j.contains("model")) s.model = parse_model(j["model"].get<std::string>());
    if (j.contains("params")) s.params = load_params(resolve(j["params"].get<std::string>(), base_dir));
    if (j.contains("gains")) {
      s.gains = control::load_gains(resolve(j["gains"].get<std::string>(), base_dir));
    }
    if (j.contains("decompose")) {
      const std::string d = j["decompose"].get<std::string>();
      if (d == "verbatim") {
        s.controller.decompose = control::DecomposeMode::Verbatim;
      } else if (d == "drag_augmented") {
        s.controller.decompose = control::DecomposeMode::DragAugmented;
      } else {
        throw InvalidInput("scenario: unknown decompose mode '" + d + "'");
      }
    }
    read(j, "dt", s.dt);
    read(j, "controller_rate", s.controller_rate);
    read(j, "duration", s.duration);
    read(j, "perturb", s.perturb);
    read(j, "seed", s.seed);
    if (j.contains("position_offset")) s.position_offset = vec3(j["position_offset"]);
    if (j.contains("velocity_offset")) s.velocity_offset = vec3(j["velocity_offset"]);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_scenario(io::read_text_file(path), base.empty() ? "." : base);
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (std::filesystem::is_regular_file(name_or_path)) return load_scenario(name_or_path);
  return scenario_for_case(name_or_path);
}

std::string scenario_to_json(const Scenario& s) {
  const planner::ConstraintSet& c = s.plan.constraints;
  json obstacles = json::array();
  for (const planner::ObstacleShape& o : c.obstacles) {
    if (const auto* sp = std::get_if<planner::Sphere>(&o)) {
      obstacles.push_back({{"type", "sphere"}, {"center", to_json(sp->center)}, {"radius", sp->radius}});
    } else {
      const auto& cy = std::get<planner::CylinderX>(o);
      obstacles.push_back({{"type", "cylinder_x"},
                           {"center_yz", json::array({cy.center_yz.x(), cy.center_yz.y()})},
                           {"radius", cy.radius}});
    }
  }
  json waypoints = json::array();
  for (const planner::Waypoint& w : c.waypoints) {
    waypoints.push_back(
        {{"segment", w.segment}, {"local_time", w.local_time}, {"position", to_json(w.position)}});
  }
  json j;
  j["name"] = s.plan.name;
  j["constraints"] = {{"start", boundary_json(c.start)},
                      {"end", boundary_json(c.end)},
                      {"waypoints", waypoints},
                      {"obstacles", obstacles},
                      {"v_h_max", c.v_h_max},
                      {"v_v_max", c.v_v_max},
                      {"psi_rate_max", c.psi_rate_max},
                      {"enforce_psi_rate", c.enforce_psi_rate},
                      {"sample_interval", c.sample_interval},
                      {"obstacle_margin", c.obstacle_margin},
                      {"ball_origin_form", c.ball_origin_form}};
  j["weights"] = {{"mu_p", s.plan.weights.mu_p}, {"mu_v", s.plan.weights.mu_v}};
  j["plan"] = {{"segments", s.plan.options.segments},
               {"order", s.plan.options.order},
               {"T", s.plan.options.T},
               {"restarts", s.plan.options.restarts},
               {"seed", s.plan.options.seed}};
  j["model"] = model_name(s.model);
  j["decompose"] =
      s.controller.decompose == control::DecomposeMode::Verbatim ? "verbatim" : "drag_augmented";
  j["dt"] = s.dt;
  j["controller_rate"] = s.controller_rate;
  j["duration"] = s.duration;
  j["perturb"] = s.perturb;
  j["position_offset"] = to_json(s.position_offset);
  j["velocity_offset"] = to_json(s.velocity_offset);
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

double initial_heading(const PiecewiseTrajectory& traj) {
  const flatness::FlatSample s = traj.flat_sample(0.0);
  for (const Vec3& d : s.d) {
    if (d.head<2>().norm() > 1e-12) return std::atan2(d.y(), d.x());
  }
  return 0.0;
}

namespace {

control::Reference reference_at(const PiecewiseTrajectory& traj, double t) {
  control::Reference r;
  const double T = traj.duration();
  if (t >= T) {
    r.sigma = traj.eval(T, 0);
    r.sigma_dot = traj.eval(T, 1);
    if (r.sigma_dot.norm() > 0.0) {
      // Continue at the final velocity so moving end states stay consistent.
      r.sigma += r.sigma_dot * (t - T);
    }
    return r;
  }
  r.sigma = traj.eval(t, 0);
  r.sigma_dot = traj.eval(t, 1);
  r.sigma_ddot = traj.eval(t, 2);
  return r;
}

FullSample vertical_to_full(double t, const VerticalState& x, const VerticalInputs& u) {
  FullSample s;
  s.t = t;
  s.x.p = x.p;
  s.x.v = x.velocity();
  s.x.q = se3::recover_attitude_quaternion(u.gamma, x.psi);
  s.x.omega = Vec3(0.0, 0.0, x.omega_psi);
  s.x.f_flap = u.f_flap;
  s.x.theta_rud = u.theta_rud;
  s.x.theta_ele = 0.0;
  s.u.f_flap_c = u.f_flap;
  s.u.theta_rud_c = u.theta_rud;
  return s;
}

Vec3 random_offset(std::uint64_t seed, double magnitude) {
  if (magnitude <= 0.0) return Vec3::Zero();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 d(n(rng), n(rng), n(rng));
  return magnitude * d.normalized();
}

bool escaped(const Vec3& p, double radius) { return !p.allFinite() || p.norm() > radius; }

}  // namespace

ClosedLoopResult run_closed_loop(const Scenario& sc, const PiecewiseTrajectory& traj) {
  sc.validate();
  ClosedLoopResult out;
  out.duration = sc.duration > 0.0 ? sc.duration : traj.duration();
  const int sub = sc.steps_per_tick();
  const double tick = sub * sc.dt;
  const long ticks = std::lround(out.duration / tick);

  const control::Reference r0 = reference_at(traj, 0.0);
  const Vec3 p0 = r0.sigma + sc.position_offset + random_offset(sc.seed, sc.perturb);
  const Vec3 v0 = r0.sigma_dot + sc.velocity_offset;
  const double psi0 = initial_heading(traj);

  TrackingController ctl(sc.gains, sc.params.vertical, sc.controller);
  ctl.reset(psi0);

  auto record_tick = [&](double t, const control::ControlOutput& u) {
    out.controller_log.push_back(u.log);
    if (u.flipped) {
      out.flips.push_back(FlipEvent{t, u.V2_before, u.V2_after, u.jump_delta_formula, 0.0});
    }
    if (u.psi_rate_saturated) out.saturation_times.push_back(t);
  };

  if (sc.model == ModelKind::Vertical) {
    VerticalState x = dynamics::vertical_from_inertial(p0, v0, psi0, 0.0);
    VerticalInputs in;
    in.f_flap = sc.params.vertical.hover_frequency();
    in.rudder_mode = dynamics::RudderMode::GammaProxy;
    in.lateral_mode = dynamics::LateralMode::Constrained;
    out.states.push_back(vertical_to_full(0.0, x, in));
    for (long k = 0; k < ticks && !out.diverged; ++k) {
      const double t = k * tick;
      control::Measurement m;
      m.p = x.p;
      m.v = x.velocity();
      m.psi = x.psi;
      m.omega_psi = x.omega_psi;
      m.gamma = in.gamma;
      m.omega_body = Vec3(0.0, 0.0, x.omega_psi);
      const control::ControlOutput u = ctl.update(t, reference_at(traj, t), m, tick);
      record_tick(t, u);
      if (u.flipped) out.flips.back().omega_psi = x.omega_psi;
      in.gamma = u.gamma_p;
      in.f_flap = u.f_flap;
      const dynamics::VerticalSchedule hold = [&in](double) { return in; };
      for (int i = 0; i < sub; ++i) {
        const double ts = t + i * sc.dt;
        x = dynamics::step_vertical(x, ts, sc.dt, hold, sc.params.vertical);
        out.states.push_back(vertical_to_full(ts + sc.dt, x, in));
        if (escaped(x.p, sc.divergence_radius)) {
          out.diverged = true;
          out.divergence_time = ts + sc.dt;
          break;
        }
      }
    }
    return out;
  }

  // Full model: start from the flatness-recovered state on the trajectory.
  flatness::FlatOptions fo;
  fo.low_speed = flatness::LowSpeedHeading::Hold;
  fo.rudder_assist = true;
  dynamics::FwavState x;
  try {
    x = flatness::flat_to_full(traj.flat_sample(0.0), sc.params.vertical, sc.params.full, fo)
            .to_state();
  } catch (const Error&) {
    x.q = se3::recover_attitude_quaternion(se3::ReducedAttitude{}, psi0);
    x.f_flap = sc.params.full.hover_frequency();
  }
  x.p = p0;
  x.v = v0;
  dynamics::FullCommand cmd{x.f_flap, x.theta_rud, x.theta_ele};
  out.states.push_back(FullSample{0.0, x, cmd});
  for (long k = 0; k < ticks && !out.diverged; ++k) {
    const double t = k * tick;
    const Mat3 R = se3::quat_to_rot(x.q);
    control::Measurement m;
    m.p = x.p;
    m.v = x.v;
    m.psi = se3::heading_of(x.q);
    m.omega_psi = (R * x.omega).z();
    m.gamma = se3::reduced_attitude(x.q);
    m.omega_body = x.omega;
    const control::ControlOutput u = ctl.update(t, reference_at(traj, t), m, tick);
    record_tick(t, u);
    if (u.flipped) out.flips.back().omega_psi = m.omega_psi;
    cmd = dynamics::FullCommand{u.f_flap, u.tail.theta_rud, u.tail.theta_ele};
    const dynamics::FullSchedule hold = [&cmd](double) { return cmd; };
    for (int i = 0; i < sub; ++i) {
      const double ts = t + i * sc.dt;
      try {
        x = dynamics::step_full(x, ts, sc.dt, hold, sc.params.full);
      } catch (const Error&) {
        out.diverged = true;
        out.divergence_time = ts;
        break;
      }
      out.states.push_back(FullSample{ts + sc.dt, x, cmd});
      if (escaped(x.p, sc.divergence_radius)) {
        out.diverged = true;
        out.divergence_time = ts + sc.dt;
        break;
      }
    }
  }
  return out;
}

std::string states_csv(const ClosedLoopResult& result) {
  return dynamics::full_log_csv(result.states);
}

std::string controller_log_csv(const ClosedLoopResult& result) {
  std::string s = std::string(control::kControllerLogHeader) + "\n";
  for (const control::ControllerLogRow& r : result.controller_log) {
    s += control::controller_log_row_csv(r);
    s += '\n';
  }
  return s;
}

namespace {

using RefFn = std::function<control::Reference(double)>;

struct CascadeSetup {
  Vec3 p0, v0;
  double psi0 = 0.0;
  double omega0 = 0.0;
  int h0 = 1;
  double dt = 1e-3;
  double duration = 1.0;
};

/// Ideal cascade: continuous positional law plus the lumped yaw model with
/// the controller evaluated every step.
IdealCascadeResult run_ideal(const RefFn& ref_at, const CascadeSetup& cs,
                             const ControllerGains& gains, const VerticalParams& params) {
  control::ControllerOptions copt;
  copt.analytic_vd_dot = true;
  TrackingController ctl(gains, params, copt);
  ctl.reset(cs.psi0, cs.h0);

  using State = Eigen::Matrix<double, 8, 1>;  // p, v, psi, omega
  State x;
  x << cs.p0, cs.v0, cs.psi0, cs.omega0;
  VerticalInputs in;
  in.rudder_mode = dynamics::RudderMode::GammaProxy;
  in.lateral_mode = dynamics::LateralMode::Relaxed;
  in.f_flap = params.hover_frequency();

  auto accel = [&](double t, const Vec3& p, const Vec3& v) {
    const control::Reference r = ref_at(t);
    const Vec3 e_p = r.sigma - p;
    const Vec3 v_d = control::desired_velocity(r.sigma_dot, e_p, gains.Kp);
    const Vec3 v_d_dot = control::desired_velocity_rate(r.sigma_ddot, r.sigma_dot, v, e_p, gains.Kp);
    return control::desired_acceleration(v_d_dot, e_p, v_d - v, gains.Kp, gains.Kv);
  };
  auto rhs = [&](double t, const State& s) {
    State d;
    d.segment<3>(0) = s.segment<3>(3);
    d.segment<3>(3) = accel(t, s.segment<3>(0), s.segment<3>(3));
    VerticalState vs;
    vs.psi = s[6];
    vs.omega_psi = s[7];
    vs.vv = se3::yaw_rotation(s[6]).transpose() * s.segment<3>(3);
    d[6] = s[7];
    d[7] = dynamics::yaw_acceleration(vs, in, params);
    return d;
  };

  IdealCascadeResult out;
  const long n = std::lround(cs.duration / cs.dt);
  for (long k = 0; k <= n; ++k) {
    const double t = k * cs.dt;
    const control::Reference r = ref_at(t);
    control::Measurement m;
    m.p = x.segment<3>(0);
    m.v = x.segment<3>(3);
    m.psi = x[6];
    m.omega_psi = x[7];
    m.gamma = in.gamma;
    const control::ControlOutput u = ctl.update(t, r, m, cs.dt);

    IdealCascadeStep st;
    st.t = t;
    st.e_p = u.errors.e_p;
    st.e_v = u.errors.e_v;
    const control::LyapunovReport lr =
        control::lyapunov_monitors(u.errors, ctl.state().h_psi, u.psi_d_dot, m.omega_psi, gains);
    st.V1 = lr.V1;
    st.V1_dot_expected = lr.V1_dot_expected;
    st.V2 = lr.V2;
    st.flow_bound = lr.flow_bound;
    st.delta_psi = u.errors.delta_psi;
    st.omega_psi = m.omega_psi;
    out.steps.push_back(st);
    if (u.flipped) {
      out.flips.push_back(FlipEvent{t, u.V2_before, u.V2_after, u.jump_delta_formula, m.omega_psi});
    }
    if (k == n) break;
    in.gamma = u.gamma_p;
    in.f_flap = u.f_flap;
    x = rk4_step(rhs, t, x, cs.dt);
    x[6] = se3::wrap_angle(x[6]);
    if (!x.allFinite()) throw PropagationError("simulate_ideal_cascade: non-finite state", k);
  }
  return out;
}

}  // namespace

IdealCascadeResult simulate_ideal_cascade(const PiecewiseTrajectory& traj,
                                          const ControllerGains& gains,
                                          const VerticalParams& params,
                                          const IdealCascadeOptions& opts) {
  CascadeSetup cs;
  const control::Reference r0 = reference_at(traj, 0.0);
  cs.p0 = r0.sigma + opts.position_offset;
  cs.v0 = r0.sigma_dot + opts.velocity_offset;
  cs.psi0 = se3::wrap_angle(initial_heading(traj) + opts.psi_offset);
  cs.omega0 = opts.omega_psi0;
  cs.h0 = opts.h0;
  cs.dt = opts.dt;
  cs.duration = opts.duration;
  return run_ideal([&traj](double t) { return reference_at(traj, t); }, cs, gains, params);
}

IdealCascadeResult simulate_heading_reversal(const ControllerGains& gains,
                                             const VerticalParams& params,
                                             const HeadingReversalOptions& opts) {
  CascadeSetup cs;
  cs.p0 = Vec3::Zero();
  cs.v0 = Vec3::Zero();
  cs.psi0 = se3::wrap_angle(opts.psi0 + opts.heading_offset);
  cs.omega0 = opts.omega_psi0;
  cs.h0 = opts.h0;
  cs.dt = opts.dt;
  cs.duration = opts.duration;
  const double psi0 = opts.psi0;
  const double ts = opts.step_time;
  auto ref = [psi0, ts](double t) {
    control::Reference r;
    r.psi_override = true;
    r.psi_d = se3::wrap_angle(t >= ts ? psi0 + std::numbers::pi : psi0);
    return r;
  };
  return run_ideal(ref, cs, gains, params);
}

namespace {

constexpr double kBranchStep = 1e-3;

// Heading on a uniform grid, continuous in time and anchored at the sample of
// largest horizontal speed. Where the speed passes through zero the heading
// keeps its branch instead of turning around.
std::vector<double> heading_branch_table(const PiecewiseTrajectory& traj, double step) {
  const double T = traj.duration();
  const auto n = static_cast<std::size_t>(std::lround(T / step)) + 1;
  std::vector<double> az(n, 0.0), speed(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 v = traj.eval(std::min(static_cast<double>(i) * step, T), 1);
    speed[i] = std::hypot(v.x(), v.y());
    az[i] = std::atan2(v.y(), v.x());
  }
  const std::size_t anchor =
      static_cast<std::size_t>(std::max_element(speed.begin(), speed.end()) - speed.begin());
  if (speed[anchor] == 0.0) return std::vector<double>(n, initial_heading(traj));
  std::vector<double> out(n, az[anchor]);
  auto follow = [&](std::size_t i, double prev) {
    double a = az[i];
    if (speed[i] == 0.0) return prev;
    if (std::cos(a - prev) < 0.0) a = se3::wrap_angle(a + std::numbers::pi);
    return a;
  };
  for (std::size_t i = anchor + 1; i < n; ++i) out[i] = follow(i, out[i - 1]);
  for (std::size_t i = anchor; i-- > 0;) out[i] = follow(i, out[i + 1]);
  return out;
}

}  // namespace

RoundTripResult flatness_round_trip(const PiecewiseTrajectory& traj, const VerticalParams& params,
                                    double dt) {
  flatness::FlatOptions fo;
  fo.low_speed = flatness::LowSpeedHeading::Extend;
  fo.rudder_assist = true;
  const double T = traj.duration();
  const std::vector<double> branch = heading_branch_table(traj, kBranchStep);
  auto options_at = [&](double t) {
    flatness::FlatOptions o = fo;
    const auto i = static_cast<std::size_t>(std::lround(std::clamp(t, 0.0, T) / kBranchStep));
    o.heading_branch = branch[std::min(i, branch.size() - 1)];
    return o;
  };
  auto schedule = [&](double t) {
    const flatness::AttitudeThrust a = flatness::flat_to_attitude_and_thrust(
        traj.flat_sample(std::clamp(t, 0.0, T)), params, options_at(t));
    VerticalInputs u;
    u.gamma = a.gamma;
    u.f_flap = a.f_flap;
    u.theta_rud = a.theta_rud_vertical;
    u.rudder_mode = dynamics::RudderMode::ExplicitRudder;
    u.lateral_mode = dynamics::LateralMode::Constrained;
    return u;
  };
  const flatness::FlatSample s0 = traj.flat_sample(0.0);
  const flatness::VerticalFlat vf0 = flatness::flat_to_vertical(s0, params, options_at(0.0));
  VerticalState x0;
  x0.p = s0.sigma;
  x0.vv = vf0.vv;
  x0.psi = vf0.psi;
  x0.omega_psi = vf0.omega_psi;
  RoundTripResult out;
  out.log = dynamics::integrate_vertical(x0, schedule, params, dt, T);
  for (const dynamics::VerticalSample& s : out.log) {
    const double err = (s.x.p - traj.eval(std::min(s.t, T), 0)).norm();
    if (err > out.max_position_error) {
      out.max_position_error = err;
      out.worst_time = s.t;
    }
  }
  return out;
}

}  // namespace fwav::sim
