#pragma once

#include <optional>

#include "splineplan/network.hpp"
#include "splineplan/scenario.hpp"
#include "splineplan/spline.hpp"

namespace splineplan {

enum class PlanStatus { kFeasible, kTimeout, kInfeasible };

const char* plan_status_name(PlanStatus s);

struct PlanResult {
  PlanStatus status = PlanStatus::kInfeasible;
  std::optional<PathSpline> path;
  double wall_time = 0.0;  // seconds, informational
  double length = 0.0;     // meters, for feasible results
  std::vector<double> cost_checkpoints;  // anytime mode: best cost per mark
};

// RRT* over quintic-segment extensions with a Dubins distance metric.
// The budget is iteration-based so results are reproducible; wall time is
// reported but does not influence the search.
struct RrtStarConfig {
  int max_iterations = 4000;
  double max_time = 10.0;        // seconds, failsafe only (0 disables)
  double steer_step = 8.0;       // meters, max extension length
  double goal_bias = 0.12;
  double neighbor_gamma = 14.0;  // shrinking-ball constant
  double max_neighbor_radius = 10.0;
  uint64_t seed = 0;
  bool anytime = false;  // keep improving after the first solution
  int checkpoint_every = 0;  // iterations between cost checkpoints (anytime)
};

PlanResult rrt_star(const PlanningTask& task, const VehicleParams& vehicle,
                    const RrtStarConfig& cfg);

}  // namespace splineplan
