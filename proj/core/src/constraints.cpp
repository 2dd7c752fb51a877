#include "fwav/constraints.hpp"

#include <cmath>
#include <sstream>

#include "fwav/errors.hpp"
#include "fwav/io.hpp"

namespace fwav::planner {

double clearance(const ObstacleShape& shape, const Vec3& p, double margin, bool origin_form) {
  if (const auto* s = std::get_if<Sphere>(&shape)) {
    const Vec3 ref = origin_form ? Vec3::Zero() : s->center;
    return (p - ref).norm() - (s->radius + margin);
  }
  const auto& c = std::get<CylinderX>(shape);
  return (Eigen::Vector2d(p.y(), p.z()) - c.center_yz).norm() - (c.radius + margin);
}

Vec3 clearance_gradient(const ObstacleShape& shape, const Vec3& p, bool origin_form) {
  Vec3 d;
  if (const auto* s = std::get_if<Sphere>(&shape)) {
    d = p - (origin_form ? Vec3::Zero() : s->center);
  } else {
    const auto& c = std::get<CylinderX>(shape);
    d = Vec3(0.0, p.y() - c.center_yz.x(), p.z() - c.center_yz.y());
  }
  const double n = d.norm();
  if (n < 1e-12) {
    // On the center or axis every direction is a descent direction; pick one
    // that is valid for both shapes.
    return Vec3(0.0, 0.0, 1.0);
  }
  return d / n;
}

void ConstraintSet::validate() const {
  if (!(v_h_max > 0.0 && v_v_max > 0.0 && psi_rate_max > 0.0)) {
    throw InvalidInput("ConstraintSet: speed and heading-rate limits must be positive");
  }
  if (!(sample_interval > 0.0)) throw InvalidInput("ConstraintSet: sample_interval must be positive");
  if (obstacle_margin < 0.0) throw InvalidInput("ConstraintSet: obstacle_margin must be non-negative");
  for (const auto& o : obstacles) {
    const double r = std::visit([](const auto& s) { return s.radius; }, o);
    if (!(r > 0.0)) throw InvalidInput("ConstraintSet: obstacle radius must be positive");
  }
  for (const auto& w : waypoints) {
    if (w.segment < 0 || w.local_time < 0.0) throw InvalidInput("ConstraintSet: bad waypoint");
  }
}

std::vector<double> sample_times(double duration, double interval) {
  std::vector<double> out;
  for (long k = 1;; ++k) {
    const double t = static_cast<double>(k) * interval;
    if (t >= duration - 1e-9) break;
    out.push_back(t);
  }
  return out;
}

double heading_rate(const Vec3& v, const Vec3& a) {
  const double vh2 = v.x() * v.x() + v.y() * v.y();
  if (vh2 <= 0.0) return 0.0;
  return (v.x() * a.y() - v.y() * a.x()) / vh2;
}

double ResidualReport::max_equality() const {
  double m = 0.0;
  for (const auto& e : entries)
    if (e.equality) m = std::max(m, e.value);
  return m;
}

double ResidualReport::max_inequality() const {
  double m = 0.0;
  for (const auto& e : entries)
    if (!e.equality) m = std::max(m, e.value);
  return m;
}

const NamedResidual& ResidualReport::worst() const {
  if (entries.empty()) throw InvalidInput("empty residual report");
  const NamedResidual* w = &entries.front();
  for (const auto& e : entries)
    if (e.value > w->value) w = &e;
  return *w;
}

const NamedResidual* ResidualReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

std::string ResidualReport::to_string() const {
  std::ostringstream out;
  for (const auto& e : entries) {
    out << e.name << " = " << io::format_number(e.value);
    if (!e.equality && std::isfinite(e.worst_time)) {
      out << " (worst at t=" << io::format_number(e.worst_time) << ")";
    }
    out << '\n';
  }
  return out.str();
}

namespace {

const char* kAxis[3] = {"x", "y", "z"};

void add_vec(ResidualReport& r, const std::string& prefix, const Vec3& diff) {
  for (int a = 0; a < 3; ++a) r.entries.push_back({prefix + "." + kAxis[a], std::abs(diff[a]), true});
}

struct Aggregate {
  NamedResidual entry;
  double worst = 0.0;
  void add(double excess, double t) {
    const double e = rec(excess);
    entry.value += e;
    if (e > worst) {
      worst = e;
      entry.worst_time = t;
    }
  }
};

}  // namespace

ResidualReport constraint_residuals(const PiecewiseTrajectory& traj, const ConstraintSet& cons,
                                    double margin) {
  return constraint_residuals(traj, cons, sample_times(traj.duration(), cons.sample_interval),
                              margin);
}

ResidualReport constraint_residuals(const PiecewiseTrajectory& traj, const ConstraintSet& cons,
                                    const std::vector<double>& times, double margin) {
  ResidualReport r;
  const auto& segs = traj.segments();
  const PolySegment& first = segs.front();
  const PolySegment& last = segs.back();
  add_vec(r, "boundary.start.position", first.eval(0.0, 0) - cons.start.position);
  add_vec(r, "boundary.start.velocity", first.eval(0.0, 1) - cons.start.velocity);
  add_vec(r, "boundary.start.acceleration", first.eval(0.0, 2) - cons.start.acceleration);
  add_vec(r, "boundary.end.position", last.eval(last.T, 0) - cons.end.position);
  add_vec(r, "boundary.end.velocity", last.eval(last.T, 1) - cons.end.velocity);
  add_vec(r, "boundary.end.acceleration", last.eval(last.T, 2) - cons.end.acceleration);
  for (std::size_t i = 0; i < cons.waypoints.size(); ++i) {
    const Waypoint& w = cons.waypoints[i];
    if (w.segment >= traj.segment_count()) {
      throw InvalidInput("waypoint " + std::to_string(i) + " refers to a missing segment");
    }
    add_vec(r, "waypoint[" + std::to_string(i) + "]",
            segs[w.segment].eval(w.local_time, 0) - w.position);
  }
  for (int s = 0; s + 1 < traj.segment_count(); ++s) {
    for (int k = 0; k <= 3; ++k) {
      add_vec(r, "continuity[" + std::to_string(s) + "].d" + std::to_string(k),
              segs[s].eval(segs[s].T, k) - segs[s + 1].eval(0.0, k));
    }
  }

  Aggregate vh{{"speed.horizontal", 0.0, false}};
  Aggregate vv{{"speed.vertical", 0.0, false}};
  Aggregate hr{{"heading_rate", 0.0, false}};
  std::vector<Aggregate> obs;
  for (std::size_t i = 0; i < cons.obstacles.size(); ++i) {
    obs.push_back({{"obstacle[" + std::to_string(i) + "]", 0.0, false}});
  }
  for (double t : times) {
    const Vec3 p = traj.eval(t, 0);
    const Vec3 v = traj.eval(t, 1);
    const Vec3 a = traj.eval(t, 2);
    const double speed_h = std::hypot(v.x(), v.y());
    vh.add(speed_h - cons.v_h_max, t);
    vv.add(std::abs(v.z()) - cons.v_v_max, t);
    if (cons.enforce_psi_rate && speed_h >= cons.v_eps) {
      hr.add(std::abs(heading_rate(v, a)) - cons.psi_rate_max, t);
    }
    for (std::size_t i = 0; i < cons.obstacles.size(); ++i) {
      obs[i].add(-clearance(cons.obstacles[i], p, margin, cons.ball_origin_form), t);
    }
  }
  r.entries.push_back(vh.entry);
  r.entries.push_back(vv.entry);
  r.entries.push_back(hr.entry);
  for (auto& o : obs) r.entries.push_back(o.entry);
  return r;
}

}  // namespace fwav::planner
