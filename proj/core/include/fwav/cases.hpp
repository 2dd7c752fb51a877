#pragma once

#include <string>
#include <vector>

#include "fwav/constraints.hpp"
#include "fwav/planner.hpp"

namespace fwav::planner {

struct PlanningCase {
  std::string name;
  ConstraintSet constraints;
  ObjectiveWeights weights;
  PlanOptions options;
};

/// Built-in configurations "a", "b", "c" and the straight "line" run.
/// Throws InvalidInput for other names.
PlanningCase case_library(const std::string& name);
std::vector<std::string> case_names();

}  // namespace fwav::planner
