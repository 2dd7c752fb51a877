#include "fwav/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <ostream>
#include <string>

#include "fwav/cases.hpp"
#include "fwav/errors.hpp"
#include "fwav/identification.hpp"
#include "fwav/io.hpp"
#include "fwav/metrics.hpp"
#include "fwav/planner.hpp"
#include "fwav/simulation.hpp"

namespace fwav::cli {
namespace {

struct Common {
  std::string scenario;
  std::string params;
  std::string gains;
  std::string model;
  long long seed = -1;
  int restarts = -1;
  double perturb = -1.0;
};

sim::Scenario build_scenario(const Common& c) {
  sim::Scenario s = sim::resolve_scenario(c.scenario);
  if (!c.params.empty()) s.params = load_params(c.params);
  if (!c.gains.empty()) s.gains = control::load_gains(c.gains);
  if (!c.model.empty()) s.model = sim::parse_model(c.model);
  if (c.seed >= 0) {
    s.seed = static_cast<std::uint64_t>(c.seed);
    s.plan.options.seed = static_cast<std::uint64_t>(c.seed);
  }
  if (c.restarts > 0) s.plan.options.restarts = c.restarts;
  if (c.perturb >= 0.0) s.perturb = c.perturb;
  s.validate();
  return s;
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    io::write_text_file(path, text);
  }
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  const std::string stem = p.stem().string();
  return (p.parent_path() / (stem + suffix)).string();
}

planner::PlanResult run_plan(const sim::Scenario& s) {
  return planner::plan(s.plan.constraints, s.plan.weights, s.plan.options);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trajectory planning, tracking simulation and analysis for a flapping-wing vehicle"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&common](CLI::App* sub, bool with_perturb) {
    sub->add_option("--params", common.params, "Parameter file (key = value)");
    sub->add_option("--gains", common.gains, "Controller gain file (key = value)");
    sub->add_option("--seed", common.seed, "Seed for restarts and perturbations");
    sub->add_option("--restarts", common.restarts, "Planner restarts");
    if (with_perturb) {
      sub->add_option("--model", common.model, "Dynamics model: vertical or full");
      sub->add_option("--perturb", common.perturb, "Random initial position offset magnitude (m)");
    }
  };

  // plan
  std::string plan_out, plan_report, plan_sampled;
  double plan_dt = 0.01;
  CLI::App* plan = app.add_subcommand("plan", "Plan a trajectory for a case or scenario file");
  plan->add_option("--scenario", common.scenario, "Case name (a, b, c, line) or scenario JSON")->required();
  plan->add_option("--out", plan_out, "Trajectory CSV (seg,axis,c0..cN,T)")->required();
  plan->add_option("--report", plan_report, "Residual report file");
  plan->add_option("--sampled", plan_sampled, "Sampled trajectory CSV");
  plan->add_option("--dt", plan_dt, "Sampling step for --sampled (s)");
  add_common(plan, false);

  // simulate
  std::string sim_traj, sim_out, sim_ctrl, sim_metrics;
  CLI::App* simulate = app.add_subcommand("simulate", "Closed-loop run along a planned trajectory");
  simulate->add_option("--scenario", common.scenario, "Case name or scenario JSON")->required();
  simulate->add_option("--traj", sim_traj, "Trajectory CSV")->required();
  simulate->add_option("--out", sim_out, "State log CSV")->required();
  simulate->add_option("--controller-log", sim_ctrl, "Controller log CSV");
  simulate->add_option("--metrics", sim_metrics, "Metrics CSV");
  add_common(simulate, true);

  // track
  std::string track_case, track_out, track_dir;
  CLI::App* track = app.add_subcommand("track", "Plan, simulate and score a case");
  auto* case_opt = track->add_option("--case", track_case, "Case name (a, b, c, line)");
  track->add_option("--scenario", common.scenario, "Scenario JSON")->excludes(case_opt);
  track->add_option("--out", track_out, "Metrics CSV (default: stdout)");
  track->add_option("--log-dir", track_dir, "Directory for trajectory and log files");
  add_common(track, true);

  // metrics
  std::string met_traj, met_states, met_out, met_name = "run", met_baseline;
  bool met_playback = false;
  double met_dt = 0.01;
  CLI::App* metrics = app.add_subcommand("metrics", "Along/cross/altitude errors of a state log");
  metrics->add_option("--traj", met_traj, "Trajectory CSV")->required();
  auto* states_opt = metrics->add_option("--states", met_states, "State log CSV");
  metrics->add_flag("--playback", met_playback, "Score the trajectory sampled against itself")
      ->excludes(states_opt);
  metrics->add_option("--dt", met_dt, "Playback sampling step (s)");
  metrics->add_option("--name", met_name, "Row label");
  metrics->add_option("--out", met_out, "Metrics CSV (default: stdout)");
  metrics->add_option("--baseline", met_baseline, "Baseline CSV to compare RMS values against");

  // identify
  std::string id_states, id_params;
  sim::IdentifyOptions id_opts;
  CLI::App* identify = app.add_subcommand("identify", "Least-squares drag identification from a state log");
  identify->add_option("--states", id_states, "State log CSV")->required();
  identify->add_option("--params", id_params, "Parameter file for m and k_tf");
  identify->add_option("--window", id_opts.window, "Samples per integration window");
  identify->add_option("--min-speed", id_opts.min_speed, "Excitation threshold (m/s)");

  // cases
  std::string cases_name;
  CLI::App* cases = app.add_subcommand("cases", "Print built-in case configurations");
  cases->add_option("name", cases_name, "Case to print as scenario JSON (lists names when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (plan->parsed()) {
      const sim::Scenario s = build_scenario(common);
      const planner::PlanResult r = run_plan(s);
      planner::save_trajectory(plan_out, r.traj);
      if (!plan_report.empty()) write_or_print(plan_report, r.report.to_string(), out);
      if (!plan_sampled.empty()) write_or_print(plan_sampled, planner::sampled_csv(r.traj, plan_dt), out);
      out << "planned " << s.plan.name << ": objective " << r.report.objective << ", restart "
          << r.report.best_restart << ", max inequality " << r.report.residuals.max_inequality()
          << "\n";
      return kExitOk;
    }
    if (simulate->parsed()) {
      const sim::Scenario s = build_scenario(common);
      const planner::PiecewiseTrajectory traj = planner::load_trajectory(sim_traj);
      const sim::ClosedLoopResult r = sim::run_closed_loop(s, traj);
      write_or_print(sim_out, sim::states_csv(r), out);
      if (!sim_ctrl.empty()) write_or_print(sim_ctrl, sim::controller_log_csv(r), out);
      if (r.diverged) {
        err << "diverged at t = " << r.divergence_time << " s\n";
        return kExitDiverged;
      }
      if (!sim_metrics.empty()) {
        sim::MetricsReport m = sim::compute_metrics(sim::positions_from_states(r.states), traj);
        m.name = s.plan.name;
        write_or_print(sim_metrics, sim::metrics_csv({m}), out);
      }
      out << "simulated " << r.states.size() << " steps, " << r.flips.size()
          << " heading flips, " << r.saturation_times.size() << " heading-rate saturations\n";
      return kExitOk;
    }
    if (track->parsed()) {
      if (track_case.empty() && common.scenario.empty()) {
        err << "error: track needs --case or --scenario\n";
        return kExitUsage;
      }
      if (!track_case.empty()) common.scenario = track_case;
      const sim::Scenario s = build_scenario(common);
      const planner::PlanResult plan_result = run_plan(s);
      const sim::ClosedLoopResult r = sim::run_closed_loop(s, plan_result.traj);
      if (!track_dir.empty()) {
        std::filesystem::create_directories(track_dir);
        const std::filesystem::path d(track_dir);
        planner::save_trajectory((d / "trajectory.csv").string(), plan_result.traj);
        io::write_text_file((d / "states.csv").string(), sim::states_csv(r));
        io::write_text_file((d / "controller.csv").string(), sim::controller_log_csv(r));
        io::write_text_file((d / "plan_report.txt").string(), plan_result.report.to_string());
      }
      if (r.diverged) {
        err << "diverged at t = " << r.divergence_time << " s\n";
        return kExitDiverged;
      }
      sim::MetricsReport m =
          sim::compute_metrics(sim::positions_from_states(r.states), plan_result.traj);
      m.name = s.plan.name;
      write_or_print(track_out, sim::metrics_csv({m}), out);
      if (!track_out.empty()) {
        io::write_text_file(sibling(track_out, "_summary.txt"),
                            sim::metrics_summary(m) + "heading_flips " +
                                std::to_string(r.flips.size()) + "\nheading_rate_saturations " +
                                std::to_string(r.saturation_times.size()) + "\n");
      }
      return kExitOk;
    }
    if (metrics->parsed()) {
      const planner::PiecewiseTrajectory traj = planner::load_trajectory(met_traj);
      std::vector<sim::PositionSample> log;
      if (met_playback) {
        const long n = std::lround(traj.duration() / met_dt);
        for (long k = 0; k <= n; ++k) {
          const double t = std::min(k * met_dt, traj.duration());
          log.push_back(sim::PositionSample{t, traj.eval(t, 0)});
        }
      } else if (!met_states.empty()) {
        log = sim::positions_from_csv(io::read_text_file(met_states));
      } else {
        err << "error: metrics needs --states or --playback\n";
        return kExitUsage;
      }
      sim::MetricsReport m = sim::compute_metrics(log, traj);
      m.name = met_name;
      write_or_print(met_out, sim::metrics_csv({m}), out);
      if (!met_baseline.empty()) {
        for (const sim::MetricsReport& b : sim::read_metrics_csv(io::read_text_file(met_baseline))) {
          if (b.name != met_name) continue;
          const bool ok = m.along_track.rms <= b.along_track.rms &&
                          m.cross_track.rms <= b.cross_track.rms &&
                          m.altitude.rms <= b.altitude.rms;
          out << "baseline " << b.name << ": rms " << (ok ? "within" : "above") << " reference\n";
        }
      }
      return kExitOk;
    }
    if (identify->parsed()) {
      if (!id_params.empty()) {
        const ModelParams p = load_params(id_params);
        id_opts.m = p.full.m;
        id_opts.k_tf = p.full.k_tf;
      }
      const auto samples = sim::forward_samples_from_csv(io::read_text_file(id_states));
      const sim::DragEstimate e = sim::identify_drag(samples, id_opts);
      out << "k_d_over_m " << io::format_number(e.k_d_over_m) << "\n"
          << "k_d " << io::format_number(e.k_d_over_m * id_opts.m) << "\n"
          << "residual_norm " << io::format_number(e.residual_norm) << "\n"
          << "windows " << e.windows << "\n";
      return kExitOk;
    }
    if (cases->parsed()) {
      if (cases_name.empty()) {
        for (const std::string& n : planner::case_names()) out << n << "\n";
      } else {
        out << sim::scenario_to_json(sim::scenario_for_case(cases_name));
      }
      return kExitOk;
    }
  } catch (const InfeasiblePlan& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Divergence& e) {
    err << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fwav::cli
