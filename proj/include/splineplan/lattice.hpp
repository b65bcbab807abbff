#pragma once

#include "splineplan/rrt_star.hpp"

namespace splineplan {

// One precomputed motion primitive: a quintic with zero curvature at both
// ends, expressed in the expanding node's local frame.
struct LatticePrimitive {
  std::string name;
  GluingPoint target;     // local-frame boundary values
  QuinticSegment seg;     // solved once, frame attached per expansion
  double length = 0.0;
  double max_kappa = 0.0;
  Pose2 end;              // local end pose
};

// The committed set: one straight, lateral offsets (+-1 m, +-2 m), heading
// changes (+-22.5 deg, +-45 deg); all satisfy |kappa| <= kappa_max.
std::vector<LatticePrimitive> default_lattice_primitives(double kappa_max);

void save_lattice_primitives(const std::string& path,
                             std::span<const LatticePrimitive> prims);
std::vector<LatticePrimitive> load_lattice_primitives(const std::string& path);

struct LatticeConfig {
  std::vector<LatticePrimitive> primitives;  // empty: use the default set
  double grid_resolution = 0.5;   // meters
  int heading_bins = 16;          // 22.5 degree bins anchored at q0
  double heuristic_weight = 1.0;  // 0 turns A* into Dijkstra
  int max_expansions = 40000;
  double snap_radius = 9.0;       // meters (Dubins) for the analytic goal join
  double max_time = 0.0;          // seconds, failsafe only (0 disables)
  // dedupe states by exact pose instead of grid cells; the search graph
  // then does not depend on expansion order (used by the Dijkstra oracle)
  bool exact_states = false;
};

// A* over the primitive lattice with an admissible Dubins heuristic; the
// goal is closed by an exact quintic join so endpoints match qd exactly.
PlanResult lattice_astar(const PlanningTask& task, const VehicleParams& vehicle,
                         const LatticeConfig& cfg);

}  // namespace splineplan
