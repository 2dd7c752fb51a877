#include "fwav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fwav/errors.hpp"
#include "fwav/io.hpp"

namespace fwav::sim {

ErrorComponents decompose_error(const Vec3& e, const Vec3& sigma_dot, double v_eps) {
  ErrorComponents c;
  c.altitude = e.z();
  const Eigen::Vector2d vh = sigma_dot.head<2>();
  const double speed = vh.norm();
  if (speed < v_eps) {
    c.along = e.x();
    c.cross = e.y();
    return c;
  }
  const Eigen::Vector2d u = vh / speed;
  c.along = e.x() * u.x() + e.y() * u.y();
  c.cross = -e.x() * u.y() + e.y() * u.x();
  return c;
}

MetricsReport compute_metrics(const std::vector<PositionSample>& log,
                              const planner::PiecewiseTrajectory& traj, double v_eps) {
  if (log.empty()) throw InvalidInput("compute_metrics: empty log");
  MetricsReport r;
  const double T = traj.duration();
  double sa = 0.0, sc = 0.0, sz = 0.0;
  for (const PositionSample& s : log) {
    if (s.t < 0.0 || s.t > T + 1e-9) continue;
    const double t = std::min(s.t, T);
    const ErrorComponents c = decompose_error(traj.eval(t, 0) - s.p, traj.eval(t, 1), v_eps);
    r.along_track.max = std::max(r.along_track.max, std::abs(c.along));
    r.cross_track.max = std::max(r.cross_track.max, std::abs(c.cross));
    r.altitude.max = std::max(r.altitude.max, std::abs(c.altitude));
    sa += c.along * c.along;
    sc += c.cross * c.cross;
    sz += c.altitude * c.altitude;
    ++r.samples;
  }
  if (r.samples == 0) throw InvalidInput("compute_metrics: no samples inside the trajectory window");
  r.along_track.rms = std::sqrt(sa / r.samples);
  r.cross_track.rms = std::sqrt(sc / r.samples);
  r.altitude.rms = std::sqrt(sz / r.samples);
  return r;
}

std::vector<PositionSample> positions_from_states(const std::vector<dynamics::FullSample>& states) {
  std::vector<PositionSample> out;
  out.reserve(states.size());
  for (const dynamics::FullSample& s : states) out.push_back(PositionSample{s.t, s.x.p});
  return out;
}

std::vector<PositionSample> positions_from_csv(const std::string& csv_text) {
  const io::CsvTable table = io::parse_csv(csv_text);
  const auto t = table.column_values("t");
  const auto x = table.column_values("px");
  const auto y = table.column_values("py");
  const auto z = table.column_values("pz");
  std::vector<PositionSample> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = PositionSample{t[i], Vec3(x[i], y[i], z[i])};
  return out;
}

std::string metrics_csv(const std::vector<MetricsReport>& rows) {
  std::ostringstream os;
  os << kMetricsHeader << "\n";
  for (const MetricsReport& r : rows) {
    os << r.name << ',' << io::format_number(r.along_track.max) << ','
       << io::format_number(r.along_track.rms) << ',' << io::format_number(r.cross_track.max)
       << ',' << io::format_number(r.cross_track.rms) << ',' << io::format_number(r.altitude.max)
       << ',' << io::format_number(r.altitude.rms) << "\n";
  }
  return os.str();
}

std::vector<MetricsReport> read_metrics_csv(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("read_metrics_csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) {
    throw InvalidInput("read_metrics_csv: expected header '" + std::string(kMetricsHeader) + "'");
  }
  std::vector<MetricsReport> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw InvalidInput("read_metrics_csv: expected 7 columns: " + line);
    double v[6];
    for (int i = 0; i < 6; ++i) {
      try {
        v[i] = std::stod(cells[i + 1]);
      } catch (const std::exception&) {
        throw InvalidInput("read_metrics_csv: bad number '" + cells[i + 1] + "'");
      }
    }
    MetricsReport r;
    r.name = cells[0];
    r.along_track = {v[0], v[1]};
    r.cross_track = {v[2], v[3]};
    r.altitude = {v[4], v[5]};
    out.push_back(r);
  }
  return out;
}

std::string metrics_summary(const MetricsReport& r) {
  std::ostringstream os;
  os << "case " << r.name << " samples " << r.samples << "\n"
     << "along_track max " << r.along_track.max << " rms " << r.along_track.rms << "\n"
     << "cross_track max " << r.cross_track.max << " rms " << r.cross_track.rms << "\n"
     << "altitude max " << r.altitude.max << " rms " << r.altitude.rms << "\n";
  return os.str();
}

}  // namespace fwav::sim
