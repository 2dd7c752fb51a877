#include <doctest.h>

#include <cmath>
#include <random>

#include "fwav/errors.hpp"
#include "fwav/identification.hpp"
#include "fwav/metrics.hpp"
#include "fwav/numeric.hpp"

using namespace fwav;
using namespace fwav::sim;

namespace {

planner::PiecewiseTrajectory straight(const Vec3& velocity, double T) {
  planner::PolySegment s;
  s.T = T;
  s.coeffs.col(1) = velocity;
  return planner::PiecewiseTrajectory({s});
}

std::vector<ForwardSample> forward_log(double kd_over_m, double noise, std::uint64_t seed, double v0 = 1.0) {
  const IdentifyOptions o;
  auto f_of = [](double t) { return 15.0 + 3.0 * std::sin(1.3 * t); };
  auto gx_of = [](double t) { return -0.2 - 0.15 * std::cos(0.7 * t); };
  auto rhs = [&](double t, double v) {
    return -o.k_tf * f_of(t) * f_of(t) * gx_of(t) / o.m - kd_over_m * signed_square(v);
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ForwardSample> log;
  double v = v0;
  const double h = 1e-4;
  for (long k = 0; k <= 100000; ++k) {
    const double t = k * h;
    if (k % 100 == 0) log.push_back({t, v + noise * n(rng), f_of(t), gx_of(t)});
    const double k1 = rhs(t, v), k2 = rhs(t + h / 2, v + h / 2 * k1);
    const double k3 = rhs(t + h / 2, v + h / 2 * k2), k4 = rhs(t + h, v + h * k3);
    v += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return log;
}

}  // namespace

TEST_CASE("error decomposition is orthogonal") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 200; ++i) {
    const Vec3 e(n(rng), n(rng), n(rng));
    const Vec3 sd(n(rng), n(rng), n(rng));
    const ErrorComponents c = decompose_error(e, sd, 0.05);
    CHECK(c.along * c.along + c.cross * c.cross + c.altitude * c.altitude ==
          doctest::Approx(e.squaredNorm()).epsilon(1e-12));
    CHECK(c.altitude == doctest::Approx(e.z()));
  }
  // Along x when moving along x; slow motion falls back to the inertial axes.
  const ErrorComponents a = decompose_error(Vec3(0.1, 0.2, 0.3), Vec3(0.0, 1.0, 0.0), 0.05);
  CHECK(std::abs(a.along) == doctest::Approx(0.2));
  CHECK(std::abs(a.cross) == doctest::Approx(0.1));
  const ErrorComponents b = decompose_error(Vec3(0.1, 0.2, 0.3), Vec3(0.0, 0.01, 0.0), 0.05);
  CHECK(std::abs(b.along) == doctest::Approx(0.1));
  CHECK(std::abs(b.cross) == doctest::Approx(0.2));
}

TEST_CASE("metrics of a constant lateral offset") {
  const auto tr = straight(Vec3(1.0, 0.0, 0.0), 2.0);
  std::vector<PositionSample> log;
  for (int k = 0; k <= 200; ++k) {
    const double t = k * 0.01;
    log.push_back({t, tr.eval(t) + Vec3(0.0, 0.1, -0.05)});
  }
  log.push_back({5.0, Vec3(100, 100, 100)});  // outside the window
  const MetricsReport m = compute_metrics(log, tr);
  CHECK(m.samples == 201);
  CHECK(m.along_track.rms == doctest::Approx(0.0).scale(1.0));
  CHECK(m.cross_track.rms == doctest::Approx(0.1));
  CHECK(m.cross_track.max == doctest::Approx(0.1));
  CHECK(m.altitude.rms == doctest::Approx(0.05));
  CHECK_THROWS_AS(compute_metrics({}, tr), InvalidInput);
}

TEST_CASE("metrics csv round trip") {
  MetricsReport r;
  r.name = "a";
  r.along_track = {0.5, 0.25};
  r.cross_track = {0.125, 0.0625};
  r.altitude = {1.0 / 3.0, 0.1};
  const std::string csv = metrics_csv({r});
  CHECK(csv.rfind(kMetricsHeader, 0) == 0);
  const auto back = read_metrics_csv(csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0].name == "a");
  CHECK(back[0].altitude.max == r.altitude.max);
  CHECK(back[0].cross_track.rms == r.cross_track.rms);
  CHECK_THROWS_AS(read_metrics_csv("case,x\n"), InvalidInput);
}

TEST_CASE("shipped baseline holds the reference RMS values") {
  const auto rows = read_metrics_csv(io::read_text_file(std::string(FWAV_DATA_DIR) + "/reference_rms.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].name == "a");
  CHECK(rows[0].along_track.rms == 0.170);
  CHECK(rows[1].cross_track.rms == 0.312);
  CHECK(rows[2].altitude.rms == 0.052);
}

TEST_CASE("positions from a state csv") {
  const auto p = positions_from_csv("t,px,py,pz,vx\n0,1,2,3,0\n0.1,4,5,6,0\n");
  REQUIRE(p.size() == 2);
  CHECK((p[1].p - Vec3(4, 5, 6)).norm() == 0.0);
}

TEST_CASE("drag identification recovers the coefficient") {
  const double truth = 0.6;
  const DragEstimate clean = identify_drag(forward_log(truth, 0.0, 1), {});
  CHECK(clean.k_d_over_m == doctest::Approx(truth).epsilon(1e-3));
  CHECK(clean.windows > 10);
  const DragEstimate noisy = identify_drag(forward_log(truth, 0.01, 2), {});
  CHECK(noisy.k_d_over_m == doctest::Approx(truth).epsilon(0.05));
}

TEST_CASE("slow logs lack excitation") {
  std::vector<ForwardSample> log;
  for (int k = 0; k < 100; ++k) log.push_back({k * 0.01, 0.05, 15.0, 0.0});
  CHECK_THROWS_AS(identify_drag(log, {}), InsufficientExcitation);
  IdentifyOptions bad;
  bad.window = 1;
  CHECK_THROWS_AS(identify_drag(forward_log(0.6, 0.0, 1), bad), InvalidInput);
}
