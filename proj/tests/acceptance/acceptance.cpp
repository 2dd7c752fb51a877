// Acceptance run: one PASS/FAIL line per criterion. Exit code is the number
// of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fwav/cases.hpp"
#include "fwav/cli.hpp"
#include "fwav/constraints.hpp"
#include "fwav/controller.hpp"
#include "fwav/errors.hpp"
#include "fwav/identification.hpp"
#include "fwav/io.hpp"
#include "fwav/metrics.hpp"
#include "fwav/numeric.hpp"
#include "fwav/planner.hpp"
#include "fwav/qp.hpp"
#include "fwav/simulation.hpp"

#ifndef FWAV_DATA_DIR
#define FWAV_DATA_DIR "data"
#endif

using namespace fwav;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double boundary_residual(const planner::PiecewiseTrajectory& traj, const planner::ConstraintSet& c) {
  const double T = traj.duration();
  double r = 0.0;
  const Vec3 start[3] = {c.start.position, c.start.velocity, c.start.acceleration};
  const Vec3 end[3] = {c.end.position, c.end.velocity, c.end.acceleration};
  for (int k = 0; k < 3; ++k) {
    r = std::max(r, (traj.eval(0.0, k) - start[k]).cwiseAbs().maxCoeff());
    r = std::max(r, (traj.eval(T, k) - end[k]).cwiseAbs().maxCoeff());
  }
  return r;
}

double min_distance(const planner::PiecewiseTrajectory& traj, const planner::ObstacleShape& o,
                    const std::vector<double>& times) {
  double d = 1e300;
  for (double t : times) d = std::min(d, planner::clearance(o, traj.eval(t, 0)) + std::visit([](const auto& s) { return s.radius; }, o));
  return d;
}

std::vector<double> grid(double T, double step) {
  std::vector<double> t;
  const long n = std::lround(T / step);
  for (long k = 0; k <= n; ++k) t.push_back(std::min(T, k * step));
  return t;
}

planner::PlanResult plan_case(const std::string& name) {
  const planner::PlanningCase c = planner::case_library(name);
  return planner::plan(c.constraints, c.weights, c.options);
}

Outcome case_a_feasibility() {
  const planner::PlanningCase c = planner::case_library("a");
  if (c.options.restarts != 16) return {false, "case a is not configured with 16 restarts"};
  const auto t0 = std::chrono::steady_clock::now();
  const planner::PlanResult r = planner::plan(c.constraints, c.weights, c.options);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double T = r.traj.duration();
  const std::vector<double> samples = planner::sample_times(T, c.constraints.sample_interval);
  const std::vector<double> dense = grid(T, c.constraints.sample_interval / 10.0);
  const double br = boundary_residual(r.traj, c.constraints);
  const double ds = min_distance(r.traj, c.constraints.obstacles.at(0), samples);
  const double dd = min_distance(r.traj, c.constraints.obstacles.at(0), dense);
  const bool ok = samples.size() == 19 && std::abs(T - 3.0) < 1e-12 && br < 1e-8 && ds >= 0.5 &&
                  dd >= 0.45 && secs < 30.0;
  return {ok, fmt("boundary %.2e, %zu samples min dist %.4f m, dense min dist %.4f m, %.2f s",
                  br, samples.size(), ds, dd, secs)};
}

Outcome case_b_feasibility() {
  const planner::PlanningCase c = planner::case_library("b");
  const planner::PlanResult r = planner::plan(c.constraints, c.weights, c.options);
  const double T = r.traj.duration();
  const std::vector<double> samples = planner::sample_times(T, c.constraints.sample_interval);
  const std::vector<double> dense = grid(T, c.constraints.sample_interval / 10.0);
  bool ok = r.traj.segments().size() == 2 && c.constraints.obstacles.size() == 2;
  std::string d;
  for (const auto& o : c.constraints.obstacles) {
    const double ds = min_distance(r.traj, o, samples);
    const double dd = min_distance(r.traj, o, dense);
    ok = ok && ds >= 0.3;
    d += fmt("min dist %.4f (dense %.4f) m, ", ds, dd);
  }
  const double cont = r.traj.continuity_mismatch(3);
  ok = ok && cont < 1e-6;
  return {ok, d + fmt("junction mismatch %.2e", cont)};
}

Outcome qp_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(-1.0, 1.0), vel(-0.3, 0.3), acc(-0.3, 0.3);
  int checked = 0, drawn = 0;
  double worst = 0.0;
  while (checked < 20 && drawn < 200) {
    ++drawn;
    planner::PlanningCase c = planner::case_library("a");
    c.constraints.obstacles.clear();
    c.weights.mu_v = 0.0;
    c.options.restarts = 4;
    c.constraints.start = {Vec3(pos(rng), pos(rng), pos(rng)), Vec3(vel(rng), vel(rng), vel(rng)),
                           Vec3(acc(rng), acc(rng), acc(rng))};
    c.constraints.end = {Vec3(pos(rng), pos(rng), pos(rng)), Vec3(vel(rng), vel(rng), vel(rng)),
                         Vec3(acc(rng), acc(rng), acc(rng))};
    const planner::Layout L = c.options.layout();
    const planner::QpSolution qp = planner::solve_qp_equality(c.constraints, c.weights, L);
    // Only configurations whose unconstrained optimum already respects the
    // speed and heading-rate limits have the closed form as their answer.
    const planner::ResidualReport rep = planner::constraint_residuals(
        qp.traj, c.constraints,
        planner::sample_times(qp.traj.duration(), c.constraints.sample_interval));
    if (rep.max_inequality() > 0.0) continue;
    const planner::PlanResult r = planner::plan(c.constraints, c.weights, c.options);
    const double f = planner::snap_objective(r.traj, c.weights);
    const double rel = std::abs(f - qp.objective) / std::max(1e-12, std::abs(qp.objective));
    worst = std::max(worst, rel);
    ++checked;
  }
  return {checked == 20 && worst <= 1e-6,
          fmt("%d configurations (%d drawn), worst relative gap %.2e", checked, drawn, worst)};
}

Outcome round_trip() {
  const VerticalParams vp;
  bool ok = true;
  std::string d;
  for (const char* name : {"a", "b"}) {
    const planner::PlanResult r = plan_case(name);
    const sim::RoundTripResult rt = sim::flatness_round_trip(r.traj, vp, 1e-4);
    ok = ok && rt.max_position_error < 0.02;
    d += fmt("%s: %.2f mm at t=%.2f s; ", name, rt.max_position_error * 1e3, rt.worst_time);
  }
  return {ok, d};
}

Outcome lyapunov_flow() {
  const planner::PlanResult r = plan_case("a");
  const control::ControllerGains gains = control::ControllerGains::certified();
  const control::StabilityMargin margin = control::heading_stability_margin(gains, gains.psi_rate_ff_cap);
  if (!margin.margin_ok) return {false, "certified gains give no heading rate margin"};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0), sgn(-1.0, 1.0);
  double worst_rise = -1e300, worst_terminal = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 dir(n(rng), n(rng), n(rng));
    dir.normalize();
    sim::IdealCascadeOptions o;
    o.position_offset = dir * 0.5 * std::cbrt(u(rng));
    o.omega_psi0 = 0.9 * margin.omega_psi_max * sgn(rng);
    o.psi_offset = M_PI * sgn(rng);
    o.h0 = trial % 2 == 0 ? 1 : -1;
    const sim::IdealCascadeResult res = sim::simulate_ideal_cascade(r.traj, gains, VerticalParams{}, o);
    for (std::size_t k = 1; k < res.steps.size(); ++k) {
      worst_rise = std::max(worst_rise, res.steps[k].V1 - res.steps[k - 1].V1);
    }
    worst_terminal = std::max(worst_terminal, res.steps.back().e_p.norm());
  }
  return {worst_rise <= 1e-6 && worst_terminal < 1e-3,
          fmt("max step increase of V1 %.2e, worst terminal |e_p| %.2e m, omega_max %.2f rad/s",
              worst_rise, worst_terminal, margin.omega_psi_max)};
}

Outcome jump_decrease() {
  const control::ControllerGains gains = control::ControllerGains::certified();
  int total = 0, variants = 0, worst_count = 0;
  double worst = -1e300;
  for (double w0 : {0.0, 0.8, -0.8}) {
    for (double offset : {0.5, -0.5, 1.0, -1.0}) {
      sim::HeadingReversalOptions o;
      o.omega_psi0 = w0;
      o.heading_offset = offset;
      o.h0 = offset > 0.0 ? 1 : -1;
      const sim::IdealCascadeResult res = sim::simulate_heading_reversal(gains, VerticalParams{}, o);
      ++variants;
      total += static_cast<int>(res.flips.size());
      worst_count = std::max(worst_count, static_cast<int>(res.flips.size()));
      for (const sim::FlipEvent& f : res.flips) worst = std::max(worst, f.V2_after - f.V2_before);
    }
  }
  return {total >= 1 && worst < 0.0 && worst_count <= 2,
          fmt("%d variants, %d flips, at most %d per run, max V2+ - V2 %.3e", variants, total,
              worst_count, worst)};
}

Outcome table_metrics() {
  const std::vector<sim::MetricsReport> base = sim::read_metrics_csv(
      io::read_text_file(std::string(FWAV_DATA_DIR) + "/reference_rms.csv"));
  bool ok = base.size() == 3;
  std::string d;
  for (const sim::MetricsReport& b : base) {
    const sim::Scenario s = sim::scenario_for_case(b.name);
    const planner::PlanResult r = planner::plan(s.plan.constraints, s.plan.weights, s.plan.options);
    const sim::ClosedLoopResult cl = sim::run_closed_loop(s, r.traj);
    if (cl.diverged) {
      ok = false;
      d += b.name + ": diverged; ";
      continue;
    }
    const sim::MetricsReport m = sim::compute_metrics(sim::positions_from_states(cl.states), r.traj);
    const bool row = m.along_track.rms <= b.along_track.rms && m.cross_track.rms <= b.cross_track.rms &&
                     m.altitude.rms <= b.altitude.rms;
    ok = ok && row;
    d += fmt("%s %.3f/%.3f/%.3f (limit %.3f/%.3f/%.3f); ", b.name.c_str(), m.along_track.rms,
             m.cross_track.rms, m.altitude.rms, b.along_track.rms, b.cross_track.rms, b.altitude.rms);
  }
  return {ok, d};
}

Outcome case_c_events() {
  const sim::Scenario s = sim::scenario_for_case("c");
  const planner::PlanResult r = planner::plan(s.plan.constraints, s.plan.weights, s.plan.options);
  const sim::ClosedLoopResult cl = sim::run_closed_loop(s, r.traj);
  // Waypoints 3 and 5 in flight order (start, five interior points, end).
  const double seg = s.plan.options.T;
  const double w3 = seg + 0.0, w5 = 2.0 * seg + 0.0;
  auto near = [&](double tc) {
    return std::any_of(cl.saturation_times.begin(), cl.saturation_times.end(),
                       [&](double t) { return std::abs(t - tc) <= 1.5; });
  };
  const bool ok = !cl.diverged && cl.flips.size() >= 2 && near(w3) && near(w5);
  return {ok, fmt("%zu flips, %zu saturated ticks, near %.1f s: %s, near %.1f s: %s", cl.flips.size(),
                  cl.saturation_times.size(), w3, near(w3) ? "yes" : "no", w5, near(w5) ? "yes" : "no")};
}

std::vector<sim::ForwardSample> synthetic_forward_log(double kd_over_m, double noise, std::uint64_t seed) {
  const sim::IdentifyOptions o;
  const double dt_sim = 1e-4, dt_log = 0.01, T = 12.0;
  auto f_of = [](double t) { return 16.0 + 2.0 * std::sin(0.9 * t); };
  auto gx_of = [](double t) { return -0.25 - 0.1 * std::sin(0.5 * t + 0.3); };
  auto rhs = [&](double t, double v) {
    return -o.k_tf * f_of(t) * f_of(t) * gx_of(t) / o.m - kd_over_m * signed_square(v);
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, noise > 0.0 ? noise : 1.0);
  std::vector<sim::ForwardSample> log;
  double v = 1.0, t = 0.0;
  const long every = std::lround(dt_log / dt_sim);
  for (long k = 0; t <= T; ++k) {
    if (k % every == 0) {
      log.push_back({t, v + (noise > 0.0 ? n(rng) : 0.0), f_of(t), gx_of(t)});
    }
    const double k1 = rhs(t, v), k2 = rhs(t + dt_sim / 2, v + dt_sim / 2 * k1);
    const double k3 = rhs(t + dt_sim / 2, v + dt_sim / 2 * k2), k4 = rhs(t + dt_sim, v + dt_sim * k3);
    v += dt_sim / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    t = (k + 1) * dt_sim;
  }
  return log;
}

Outcome drag_identification() {
  const VerticalParams vp;
  const double truth = vp.vk_d.x() / vp.m;
  const double clean = sim::identify_drag(synthetic_forward_log(truth, 0.0, 3), {}).k_d_over_m;
  const double noisy = sim::identify_drag(synthetic_forward_log(truth, 0.01, 3), {}).k_d_over_m;
  const double ec = std::abs(clean - truth) / truth, en = std::abs(noisy - truth) / truth;
  return {ec <= 0.01 && en <= 0.05,
          fmt("true %.4f, noiseless %.4f (%.3f%%), sigma 0.01: %.4f (%.2f%%)", truth, clean, ec * 100,
              noisy, en * 100)};
}

Outcome determinism() {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "fwav_acceptance_det";
  std::filesystem::create_directories(dir);
  std::string files[2];
  for (int i = 0; i < 2; ++i) {
    const std::string out = (dir / ("metrics_" + std::to_string(i) + ".csv")).string();
    const char* argv[] = {"fwav", "track", "--case", "a", "--seed", "7", "--out", out.c_str()};
    std::ostringstream so, se;
    const int rc = cli::run(8, argv, so, se);
    if (rc != cli::kExitOk) return {false, "track exited with " + std::to_string(rc) + ": " + se.str()};
    files[i] = io::read_text_file(out);
  }
  return {!files[0].empty() && files[0] == files[1],
          fmt("%zu-byte metrics files %s", files[0].size(), files[0] == files[1] ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"planner feasibility, case a", case_a_feasibility},
      {"planner feasibility, case b", case_b_feasibility},
      {"equality-constrained optimum matches closed form", qp_equivalence},
      {"flatness round trip", round_trip},
      {"V1 non-increasing and convergence", lyapunov_flow},
      {"V2 decreases across hysteresis flips", jump_decrease},
      {"tracking RMS within reference", table_metrics},
      {"case c heading flips and rate saturation", case_c_events},
      {"drag identification", drag_identification},
      {"deterministic track output", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
