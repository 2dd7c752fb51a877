#include "fwav/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fwav/errors.hpp"
#include "fwav/io.hpp"

namespace fwav::planner {
namespace {

// d^k/dt^k t^i = i!/(i-k)! t^(i-k)
double falling(int i, int k) {
  double f = 1.0;
  for (int j = 0; j < k; ++j) f *= static_cast<double>(i - j);
  return f;
}

constexpr double kTimeSlack = 1e-9;

}  // namespace

Vec3 PolySegment::eval(double t, int k) const {
  Vec3 out = Vec3::Zero();
  const int n = order();
  // Horner on the differentiated polynomial.
  for (int i = n; i >= k; --i) out = out * t + coeffs.col(i) * falling(i, k);
  return out;
}

PiecewiseTrajectory::PiecewiseTrajectory(std::vector<PolySegment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw InvalidInput("trajectory needs at least one segment");
  double t = 0.0;
  for (const auto& s : segments_) {
    if (!(s.T > 0.0)) throw InvalidInput("segment duration must be positive");
    if (s.coeffs.rows() != 3 || s.coeffs.cols() < 1) {
      throw InvalidInput("segment coefficients must be 3 x (N + 1)");
    }
    starts_.push_back(t);
    t += s.T;
  }
}

double PiecewiseTrajectory::duration() const {
  return segments_.empty() ? 0.0 : starts_.back() + segments_.back().T;
}

double PiecewiseTrajectory::segment_start(int index) const { return starts_.at(index); }

std::pair<int, double> PiecewiseTrajectory::locate(double t) const {
  const double total = duration();
  if (segments_.empty() || t < -kTimeSlack || t > total + kTimeSlack || !std::isfinite(t)) {
    throw DomainError("trajectory time " + std::to_string(t) + " outside [0, " +
                      std::to_string(total) + "]");
  }
  int idx = 0;
  for (int i = 1; i < segment_count(); ++i) {
    if (t >= starts_[i]) idx = i;
  }
  double local = t - starts_[idx];
  local = std::clamp(local, 0.0, segments_[idx].T);
  return {idx, local};
}

Vec3 PiecewiseTrajectory::eval(double t, int derivative) const {
  const auto [idx, local] = locate(t);
  return segments_[idx].eval(local, derivative);
}

flatness::FlatSample PiecewiseTrajectory::flat_sample(double t) const {
  const auto [idx, local] = locate(t);
  const PolySegment& s = segments_[idx];
  flatness::FlatSample out;
  out.sigma = s.eval(local, 0);
  for (int k = 1; k <= flatness::kMaxDerivative; ++k) out.d[k - 1] = s.eval(local, k);
  return out;
}

double PiecewiseTrajectory::continuity_mismatch(int max_order) const {
  double worst = 0.0;
  for (int i = 0; i + 1 < segment_count(); ++i) {
    for (int k = 0; k <= max_order; ++k) {
      const Vec3 a = segments_[i].eval(segments_[i].T, k);
      const Vec3 b = segments_[i + 1].eval(0.0, k);
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

PiecewiseTrajectory PiecewiseTrajectory::translated(const Vec3& offset) const {
  std::vector<PolySegment> segs = segments_;
  for (auto& s : segs) s.coeffs.col(0) += offset;
  return PiecewiseTrajectory(std::move(segs));
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw InvalidInput("gauss_legendre: need at least one node");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

Eigen::MatrixXd snap_hessian(int order, double T) {
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(order + 1, order + 1);
  for (int i = 4; i <= order; ++i) {
    for (int k = 4; k <= order; ++k) {
      const int p = i + k - 7;
      Q(i, k) = falling(i, 4) * falling(k, 4) * std::pow(T, p) / p;
    }
  }
  return Q;
}

double snap_integral(const PiecewiseTrajectory& traj) {
  double total = 0.0;
  for (const auto& s : traj.segments()) {
    const Eigen::MatrixXd Q = snap_hessian(s.order(), s.T);
    for (int a = 0; a < 3; ++a) {
      const Eigen::VectorXd c = s.coeffs.row(a).transpose();
      total += c.dot(Q * c);
    }
  }
  return total;
}

double velocity_l1_integral(const PiecewiseTrajectory& traj) {
  const auto [x, w] = gauss_legendre(kVelocityQuadratureOrder);
  double total = 0.0;
  for (const auto& s : traj.segments()) {
    for (std::size_t q = 0; q < x.size(); ++q) {
      const double t = 0.5 * s.T * (x[q] + 1.0);
      total += 0.5 * s.T * w[q] * s.eval(t, 1).cwiseAbs().sum();
    }
  }
  return total;
}

double snap_objective(const PiecewiseTrajectory& traj, const ObjectiveWeights& weights) {
  double v = weights.mu_p * snap_integral(traj);
  if (weights.mu_v != 0.0) v += weights.mu_v * velocity_l1_integral(traj);
  return v;
}

std::string trajectory_to_csv(const PiecewiseTrajectory& traj) {
  std::ostringstream out;
  const int n = traj.segments().front().order();
  out << "seg,axis";
  for (int i = 0; i <= n; ++i) out << ",c" << i;
  out << ",T\n";
  for (int s = 0; s < traj.segment_count(); ++s) {
    const PolySegment& seg = traj.segments()[s];
    for (int a = 0; a < 3; ++a) {
      out << s << ',' << a;
      for (int i = 0; i <= n; ++i) out << ',' << io::format_number(seg.coeffs(a, i));
      out << ',' << io::format_number(seg.T) << '\n';
    }
  }
  return out.str();
}

PiecewiseTrajectory trajectory_from_csv(const std::string& text) {
  const io::CsvTable table = io::parse_csv(text);
  const int seg_col = table.column("seg");
  const int axis_col = table.column("axis");
  const int t_col = table.column("T");
  if (seg_col < 0 || axis_col < 0 || t_col < 0) {
    throw InvalidInput("trajectory CSV needs seg, axis and T columns");
  }
  int n = -1;
  while (table.column("c" + std::to_string(n + 1)) >= 0) ++n;
  if (n < 0) throw InvalidInput("trajectory CSV has no coefficient columns");

  int segs = 0;
  for (const auto& r : table.rows) segs = std::max(segs, static_cast<int>(r[seg_col]) + 1);
  std::vector<PolySegment> out(segs);
  std::vector<int> seen(segs, 0);
  for (auto& s : out) s.coeffs = Eigen::MatrixXd::Zero(3, n + 1);
  for (const auto& r : table.rows) {
    const int s = static_cast<int>(r[seg_col]);
    const int a = static_cast<int>(r[axis_col]);
    if (s < 0 || a < 0 || a > 2) throw InvalidInput("trajectory CSV: bad seg/axis index");
    for (int i = 0; i <= n; ++i) out[s].coeffs(a, i) = r[table.column("c" + std::to_string(i))];
    out[s].T = r[t_col];
    seen[s] |= 1 << a;
  }
  for (int s = 0; s < segs; ++s) {
    if (seen[s] != 7) throw InvalidInput("trajectory CSV: segment " + std::to_string(s) + " incomplete");
  }
  return PiecewiseTrajectory(std::move(out));
}

void save_trajectory(const std::string& path, const PiecewiseTrajectory& traj) {
  io::write_text_file(path, trajectory_to_csv(traj));
}

PiecewiseTrajectory load_trajectory(const std::string& path) {
  return trajectory_from_csv(io::read_text_file(path));
}

std::string sampled_csv(const PiecewiseTrajectory& traj, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("sampled_csv: dt must be positive");
  std::ostringstream out;
  out << "t,x,y,z,vx,vy,vz,ax,ay,az,jx,jy,jz,sx,sy,sz\n";
  const double total = traj.duration();
  const long n = std::lround(std::floor(total / dt + 1e-9));
  for (long i = 0; i <= n + 1; ++i) {
    double t = static_cast<double>(i) * dt;
    if (i == n + 1) {
      if (total - static_cast<double>(n) * dt < 1e-9) break;
      t = total;
    }
    out << io::format_number(t);
    for (int k = 0; k <= 4; ++k) {
      const Vec3 v = traj.eval(t, k);
      for (int a = 0; a < 3; ++a) out << ',' << io::format_number(v[a]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace fwav::planner
