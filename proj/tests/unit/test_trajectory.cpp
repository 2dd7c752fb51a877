#include <doctest.h>

#include <cmath>
#include <random>

#include "fwav/errors.hpp"
#include "fwav/trajectory.hpp"

using namespace fwav;
using namespace fwav::planner;

namespace {

PolySegment poly(std::initializer_list<double> x, double T) {
  PolySegment s;
  s.T = T;
  s.coeffs = Eigen::MatrixXd::Zero(3, 7);
  int i = 0;
  for (double c : x) s.coeffs(0, i++) = c;
  return s;
}

double fact_ratio(int i, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= i - j;
  return r;
}

}  // namespace

TEST_CASE("segment evaluation matches the monomial sum") {
  const PolySegment s = poly({1.0, -2.0, 0.5, 0.25, -0.1, 0.05, 0.01}, 2.0);
  for (double t : {0.0, 0.3, 1.7, 2.0}) {
    for (int k = 0; k <= 6; ++k) {
      double ref = 0.0;
      for (int i = k; i <= 6; ++i) ref += s.coeffs(0, i) * fact_ratio(i, k) * std::pow(t, i - k);
      CHECK(s.eval(t, k).x() == doctest::Approx(ref).epsilon(1e-13));
    }
    CHECK(s.eval(t, 7).norm() == 0.0);
  }
}

TEST_CASE("Gauss-Legendre integrates degree 2n-1 exactly") {
  const auto [x, w] = gauss_legendre(5);
  for (int d = 0; d <= 9; ++d) {
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) q += w[i] * std::pow(x[i], d);
    const double exact = d % 2 == 1 ? 0.0 : 2.0 / (d + 1);
    CHECK(q == doctest::Approx(exact).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("snap Hessian entries match the monomial integrals") {
  const int N = 6;
  const double T = 1.7;
  const Eigen::MatrixXd H = snap_hessian(N, T);
  REQUIRE(H.rows() == N + 1);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) {
      double ref = 0.0;
      if (i >= 4 && j >= 4) {
        const int p = i + j - 8;
        ref = fact_ratio(i, 4) * fact_ratio(j, 4) * std::pow(T, p + 1) / (p + 1);
      }
      CHECK(H(i, j) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
    }
  }
  CHECK((H - H.transpose()).norm() == 0.0);
}

TEST_CASE("snap and path-length integrals of simple polynomials") {
  const PiecewiseTrajectory q({poly({0, 0, 0, 0, 1}, 2.0)});
  CHECK(snap_integral(q) == doctest::Approx(24.0 * 24.0 * 2.0));
  const PiecewiseTrajectory line({poly({0, 1}, 3.0)});
  CHECK(snap_integral(line) == 0.0);
  CHECK(velocity_l1_integral(line) == doctest::Approx(3.0));
  CHECK(snap_objective(line, ObjectiveWeights{1.0, 0.5}) == doctest::Approx(1.5));
  // |x'| changes sign: x = t^2 - t on [0, 2] travels 1/4 + 9/4. Quadrature
  // across the kink is not exact.
  const PiecewiseTrajectory back({poly({0, -1, 1}, 2.0)});
  CHECK(velocity_l1_integral(back) == doctest::Approx(2.5).epsilon(1e-4));
}

TEST_CASE("piecewise location, continuity and translation") {
  const PiecewiseTrajectory tr({poly({0, 1}, 1.0), poly({1, 1}, 2.0)});
  CHECK(tr.duration() == 3.0);
  CHECK(tr.segment_start(1) == 1.0);
  CHECK(tr.locate(0.5).first == 0);
  CHECK(tr.locate(1.5).first == 1);
  CHECK(tr.locate(1.5).second == doctest::Approx(0.5));
  CHECK(tr.locate(3.0).first == 1);
  CHECK(tr.eval(2.5).x() == doctest::Approx(2.5));
  CHECK(tr.continuity_mismatch(3) < 1e-15);
  const PiecewiseTrajectory kink({poly({0, 1}, 1.0), poly({1, 2}, 1.0)});
  CHECK(kink.continuity_mismatch(3) == doctest::Approx(1.0));
  const PiecewiseTrajectory moved = tr.translated(Vec3(0, 1, 2));
  CHECK((moved.eval(2.0) - tr.eval(2.0) - Vec3(0, 1, 2)).norm() < 1e-15);
  CHECK_THROWS_AS(PiecewiseTrajectory(std::vector<PolySegment>{}), InvalidInput);
}

TEST_CASE("trajectory csv round trip is exact") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::vector<PolySegment> segs(3);
  for (auto& s : segs) {
    s.T = 1.0 + std::abs(n(rng));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 7; ++c) s.coeffs(r, c) = n(rng);
  }
  const PiecewiseTrajectory tr(segs);
  const PiecewiseTrajectory back = trajectory_from_csv(trajectory_to_csv(tr));
  REQUIRE(back.segment_count() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK((back.segments()[i].coeffs - segs[i].coeffs).norm() == 0.0);
    CHECK(back.segments()[i].T == segs[i].T);
  }
  CHECK_THROWS_AS(trajectory_from_csv("seg,axis\n0,0\n"), InvalidInput);
}

TEST_CASE("flat samples carry the derivatives") {
  const PiecewiseTrajectory tr({poly({0, 1, 0.5, 0.1, 0.01}, 2.0)});
  const auto s = tr.flat_sample(1.2);
  CHECK((s.sigma - tr.eval(1.2, 0)).norm() == 0.0);
  for (int k = 1; k <= 4; ++k) CHECK((s.d[k - 1] - tr.eval(1.2, k)).norm() == 0.0);
}

TEST_CASE("sampled csv covers the duration") {
  const PiecewiseTrajectory tr({poly({0, 1}, 1.0)});
  const std::string csv = sampled_csv(tr, 0.25);
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 6);
}
