#pragma once

#include <string>
#include <vector>

#include "splineplan/network.hpp"
#include "splineplan/spline.hpp"
#include "splineplan/vehicle.hpp"

namespace splineplan {

// Feasibility validation on a code path deliberately separate from the loss
// suite: containment goes through Quadrangle::contains, curvature through a
// local polynomial evaluation. Only geometry_core/vehicle primitives are
// shared, so a loss bug cannot certify itself.
struct ValidatorConfig {
  int samples_per_segment = kSamplesPerSegment;
  bool midpoint_refinement = true;  // checks midpoints between samples too
  double kappa_tol = 1e-6;          // 1/m
  double containment_tol = 1e-9;    // m
  double endpoint_tol = 1e-6;       // m and rad
};

struct Violation {
  std::string what;
  int segment = -1;
  int sample = -1;
};

struct ValidationResult {
  bool ok = true;
  std::vector<Violation> violations;
};

ValidationResult validate_path(const PathSpline& path, const TaskInput& task,
                               const VehicleParams& params,
                               const ValidatorConfig& cfg = {});

inline bool path_feasible(const PathSpline& path, const TaskInput& task,
                          const VehicleParams& params, const ValidatorConfig& cfg = {}) {
  return validate_path(path, task, params, cfg).ok;
}

}  // namespace splineplan
