#include "fwav/identification.hpp"

#include <cmath>
#include <limits>

#include "fwav/errors.hpp"
#include "fwav/io.hpp"
#include "fwav/numeric.hpp"

namespace fwav::sim {

DragEstimate identify_drag(const std::vector<ForwardSample>& log, const IdentifyOptions& opts) {
  if (opts.window < 2) throw InvalidInput("identify_drag: window must be at least 2 samples");
  if (!(opts.m > 0.0) || !(opts.k_tf > 0.0)) throw InvalidInput("identify_drag: m and k_tf must be positive");
  std::vector<double> phi, y;
  const std::size_t w = static_cast<std::size_t>(opts.window);
  for (std::size_t a = 0; a + w <= log.size(); a += w - 1) {
    const std::size_t b = a + w - 1;
    bool excited = true;
    for (std::size_t i = a; i <= b; ++i) excited = excited && std::abs(log[i].vv_x) > opts.min_speed;
    if (!excited) continue;
    double thrust = 0.0, drag = 0.0;
    for (std::size_t i = a; i < b; ++i) {
      const double h = log[i + 1].t - log[i].t;
      if (!(h > 0.0)) throw InvalidInput("identify_drag: time stamps must increase");
      auto th = [&](const ForwardSample& s) { return opts.k_tf * s.f_flap * s.f_flap * s.gamma_x / opts.m; };
      thrust += 0.5 * h * (th(log[i]) + th(log[i + 1]));
      drag += 0.5 * h * (signed_square(log[i].vv_x) + signed_square(log[i + 1].vv_x));
    }
    phi.push_back(-drag);
    y.push_back(log[b].vv_x - log[a].vv_x + thrust);
  }
  double pp = 0.0;
  for (double p : phi) pp += p * p;
  const double condition = pp > 0.0 ? 1.0 / std::sqrt(pp) : std::numeric_limits<double>::infinity();
  if (phi.empty() || pp < 1e-12) {
    throw InsufficientExcitation(
        "identify_drag: no window with |vv_x| above the excitation threshold (condition " +
            io::format_number(condition) + ")",
        condition);
  }
  double py = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) py += phi[i] * y[i];
  DragEstimate est;
  est.k_d_over_m = py / pp;
  double rr = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double r = y[i] - est.k_d_over_m * phi[i];
    rr += r * r;
  }
  est.residual_norm = std::sqrt(rr);
  est.windows = static_cast<int>(phi.size());
  est.condition = condition;
  return est;
}

std::vector<ForwardSample> forward_samples(const std::vector<dynamics::FullSample>& states) {
  std::vector<ForwardSample> out;
  out.reserve(states.size());
  for (const dynamics::FullSample& s : states) {
    const double psi = se3::heading_of(s.x.q);
    const Vec3 vv = se3::yaw_rotation(psi).transpose() * s.x.v;
    out.push_back(ForwardSample{s.t, vv.x(), s.x.f_flap, se3::reduced_attitude(s.x.q).x()});
  }
  return out;
}

std::vector<ForwardSample> forward_samples_from_csv(const std::string& csv_text) {
  const io::CsvTable table = io::parse_csv(csv_text);
  for (const char* c : {"t", "vx", "vy", "vz", "qw", "qx", "qy", "qz", "fflap"}) {
    if (table.column(c) < 0) throw InvalidInput(std::string("state log lacks column ") + c);
  }
  const auto t = table.column_values("t");
  const auto vx = table.column_values("vx");
  const auto vy = table.column_values("vy");
  const auto vz = table.column_values("vz");
  const auto qw = table.column_values("qw");
  const auto qx = table.column_values("qx");
  const auto qy = table.column_values("qy");
  const auto qz = table.column_values("qz");
  const auto f = table.column_values("fflap");
  std::vector<dynamics::FullSample> states(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    states[i].t = t[i];
    states[i].x.v = Vec3(vx[i], vy[i], vz[i]);
    states[i].x.q = se3::UnitQuaternion{qw[i], Vec3(qx[i], qy[i], qz[i])};
    states[i].x.f_flap = f[i];
  }
  return forward_samples(states);
}

}  // namespace fwav::sim
