#pragma once

#include <string>
#include <vector>

#include "fwav/dynamics.hpp"
#include "fwav/trajectory.hpp"

namespace fwav::sim {

struct ErrorStats {
  double max = 0.0;
  double rms = 0.0;
};

struct MetricsReport {
  std::string name;
  ErrorStats along_track;
  ErrorStats cross_track;
  ErrorStats altitude;
  int samples = 0;
};

struct PositionSample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
};

/// Per-sample decomposition of e = sigma(t) - p.
struct ErrorComponents {
  double along = 0.0;
  double cross = 0.0;
  double altitude = 0.0;
};
ErrorComponents decompose_error(const Vec3& e, const Vec3& sigma_dot, double v_eps);

/// MAX/RMS of the along-track, cross-track and altitude errors over samples
/// with t inside the trajectory window. Throws InvalidInput for an empty log.
MetricsReport compute_metrics(const std::vector<PositionSample>& log,
                              const planner::PiecewiseTrajectory& traj, double v_eps = 0.05);
std::vector<PositionSample> positions_from_states(const std::vector<dynamics::FullSample>& states);
/// Reads t,px,py,pz from a state log CSV.
std::vector<PositionSample> positions_from_csv(const std::string& csv_text);

inline constexpr const char* kMetricsHeader =
    "case,along_max,along_rms,cross_max,cross_rms,altitude_max,altitude_rms";
std::string metrics_csv(const std::vector<MetricsReport>& rows);
std::vector<MetricsReport> read_metrics_csv(const std::string& csv_text);
std::string metrics_summary(const MetricsReport& report);

}  // namespace fwav::sim
