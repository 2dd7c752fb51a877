#include "fwav/cases.hpp"

#include <cmath>
#include <numbers>

#include "fwav/errors.hpp"

namespace fwav::planner {

std::vector<std::string> case_names() { return {"a", "b", "c", "line"}; }

PlanningCase case_library(const std::string& name) {
  PlanningCase pc;
  pc.name = name;
  ConstraintSet& c = pc.constraints;
  PlanOptions& o = pc.options;
  if (name == "a") {
    o.segments = 1;
    c.start.position = Vec3::Zero();
    c.end.position = Vec3(1.0, 1.0, 1.0);
    c.obstacles.push_back(Sphere{Vec3(0.5, 0.5, 0.5), 0.5});
  } else if (name == "b") {
    o.segments = 2;
    c.start.position = Vec3::Zero();
    c.end.position = Vec3(0.0, 2.0, 0.0);
    c.obstacles.push_back(CylinderX{Eigen::Vector2d(0.5, -0.2), 0.3});
    c.obstacles.push_back(CylinderX{Eigen::Vector2d(1.5, 0.1), 0.3});
  } else if (name == "c") {
    o.segments = 3;
    const double pi = std::numbers::pi;
    auto polar = [](double r, double a) { return Vec3(r * std::cos(a), r * std::sin(a), 0.0); };
    c.start.position = Vec3(1.5, 0.0, 0.0);
    c.end.position = Vec3(1.5, 0.0, 0.0);
    const double half = 0.5 * o.T;
    c.waypoints.push_back(Waypoint{0, half, polar(0.3, pi / 3.0)});
    c.waypoints.push_back(Waypoint{1, 0.0, polar(1.5, 2.0 * pi / 3.0)});
    c.waypoints.push_back(Waypoint{1, half, Vec3(-0.3, 0.0, 0.0)});
    c.waypoints.push_back(Waypoint{2, 0.0, polar(1.5, 4.0 * pi / 3.0)});
    c.waypoints.push_back(Waypoint{2, half, polar(0.3, 5.0 * pi / 3.0)});
    // The petal turns exceed any reasonable heading-rate bound at the tips.
    c.enforce_psi_rate = false;
  } else if (name == "line") {
    o.segments = 1;
    o.T = 6.0;
    c.start.position = Vec3::Zero();
    c.start.velocity = Vec3(0.5, 0.0, 0.0);
    c.end.position = Vec3(3.0, 0.0, 0.0);
    c.end.velocity = Vec3(0.5, 0.0, 0.0);
  } else {
    throw InvalidInput("unknown case '" + name + "' (expected a, b, c or line)");
  }
  return pc;
}

}  // namespace fwav::planner
