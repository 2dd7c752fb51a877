#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "fwav/cli.hpp"
#include "fwav/io.hpp"
#include "fwav/metrics.hpp"

using namespace fwav;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "fwav");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fwav_cli_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"bogus"}).code == cli::kExitUsage);
  CHECK(run({"plan"}).code == cli::kExitUsage);
  CHECK(run({"plan", "--scenario", "zz", "--out", tmp("x.csv")}).code == cli::kExitUsage);
}

TEST_CASE("cases lists names and prints scenarios") {
  const Run list = run({"cases"});
  CHECK(list.code == cli::kExitOk);
  CHECK(list.out == "a\nb\nc\nline\n");
  const Run one = run({"cases", "b"});
  CHECK(one.out.find("cylinder_x") != std::string::npos);
}

TEST_CASE("plan, simulate and metrics chain") {
  const std::string traj = tmp("line.csv"), states = tmp("line_states.csv"), report = tmp("line_report.txt");
  REQUIRE(run({"plan", "--scenario", "line", "--out", traj, "--restarts", "2", "--report", report}).code ==
          cli::kExitOk);
  CHECK(io::read_text_file(report).find("feasible yes") == 0);
  REQUIRE(run({"simulate", "--scenario", "line", "--traj", traj, "--out", states}).code == cli::kExitOk);
  const Run m = run({"metrics", "--traj", traj, "--states", states, "--name", "line", "--baseline",
                     std::string(FWAV_DATA_DIR) + "/reference_rms.csv"});
  CHECK(m.code == cli::kExitOk);
  CHECK(m.out.find("baseline line: rms within reference") != std::string::npos);
  const Run pb = run({"metrics", "--traj", traj, "--playback"});
  REQUIRE(pb.code == cli::kExitOk);
  const auto rows = sim::read_metrics_csv(pb.out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].cross_track.max < 1e-12);
}

TEST_CASE("infeasible plans exit with code 2") {
  const std::string scen = tmp("tight.json");
  io::write_text_file(scen, R"({"case": "line", "constraints": {"v_h_max": 0.1}, "plan": {"restarts": 1}})");
  const Run r = run({"plan", "--scenario", scen, "--out", tmp("tight.csv")});
  CHECK(r.code == cli::kExitInfeasible);
  CHECK(r.err.find("speed.horizontal") != std::string::npos);
}

TEST_CASE("divergence exits with code 3") {
  const std::string traj = tmp("line2.csv");
  REQUIRE(run({"plan", "--scenario", "line", "--out", traj, "--restarts", "1"}).code == cli::kExitOk);
  const std::string scen = tmp("diverge.json");
  io::write_text_file(scen, R"({"case": "line", "position_offset": [150, 0, 0]})");
  CHECK(run({"simulate", "--scenario", scen, "--traj", traj, "--out", tmp("d.csv")}).code ==
        cli::kExitDiverged);
}

TEST_CASE("identify reads a state log") {
  const std::string traj = tmp("line3.csv"), states = tmp("line3_states.csv");
  REQUIRE(run({"plan", "--scenario", "line", "--out", traj, "--restarts", "1"}).code == cli::kExitOk);
  REQUIRE(run({"simulate", "--scenario", "line", "--traj", traj, "--out", states}).code == cli::kExitOk);
  const Run r = run({"identify", "--states", states});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("k_d_over_m") == 0);
}
