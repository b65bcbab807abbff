#pragma once

#include <span>

#include "splineplan/dubins.hpp"
#include "splineplan/geometry.hpp"
#include "splineplan/network.hpp"
#include "splineplan/vehicle.hpp"

namespace splineplan {

enum class ManeuverKind { kOvertaking, kPerpendicular, kOblique };

const char* kind_name(ManeuverKind k);
ManeuverKind kind_from_name(const std::string& name);

// Base layouts and jitter ranges for the three maneuver families. The
// numeric values are a desk-scale reconstruction tuned for workable
// admission rates; dimensions jitter up to 10 m and oblique parking angles
// span 30..80 degrees against the perpendicular 90.
struct ScenarioTemplate {
  ManeuverKind kind = ManeuverKind::kOvertaking;

  double road_length = 42.0;
  double road_length_jitter = 10.0;
  double road_width = 9.0;
  double road_width_jitter = 2.0;

  // overtaking: stopped-vehicle block on the right lane edge
  double obstacle_length = 7.0;
  double obstacle_length_jitter = 3.0;
  double obstacle_depth = 2.8;
  double obstacle_depth_jitter = 0.8;

  // parking bays
  double bay_width = 3.4;
  double bay_width_jitter = 0.5;
  double bay_depth = 6.3;
  double bay_depth_jitter = 0.5;
  double bay_angle = kPi / 2;    // from the road axis; pi/2 = perpendicular
  double bay_angle_jitter = 0.0; // oblique uses a wide range

  static ScenarioTemplate defaults(ManeuverKind kind);
};

// Instantiated environment: free space plus the endpoint sampling recipe,
// all expressed in a local layout frame placed into the world by a rigid
// transform.
struct ScenarioEnv {
  int env_id = 0;
  ManeuverKind kind{};
  FreeSpace fs{std::vector<Quadrangle>{
      Quadrangle({Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}})}};

  double world_angle = 0.0;
  Vec2 world_shift{};

  struct Box {
    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0, th_lo = 0, th_hi = 0;
  };
  Box q0_box;  // local frame

  // overtaking goals sample from a box; parking goals sample along the bay
  // axis at heading -bay_angle
  Box qd_box;
  double bay_mouth_x = 0.0;
  double bay_angle = 0.0;
  double qd_depth_lo = 0.0;  // guiding-point distance along the bay axis
  double qd_depth_hi = 0.0;
  double qd_heading_jitter = 0.0;

  Pose2 to_world(const Pose2& local) const {
    const double c = std::cos(world_angle), s = std::sin(world_angle);
    return Pose2{c * local.position.x - s * local.position.y + world_shift.x,
                 s * local.position.x + c * local.position.y + world_shift.y,
                 local.heading + world_angle};
  }
};

// Draws an environment from the template; degenerate jitter outcomes are
// resampled (bounded retries).
ScenarioEnv make_env(const ScenarioTemplate& tpl, Rng& rng, int env_id);

inline FreeSpace instantiate(const ScenarioTemplate& tpl, uint64_t seed) {
  Rng rng(seed);
  return make_env(tpl, rng, 0).fs;
}

Pose2 sample_q0(const ScenarioEnv& env, Rng& rng);
Pose2 sample_qd(const ScenarioEnv& env, Rng& rng);

struct PlanningTask {
  int env_id = 0;
  ManeuverKind kind{};
  FreeSpace fs{std::vector<Quadrangle>{
      Quadrangle({Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}})}};
  Pose2 q0;
  Pose2 qd;

  TaskInput input() const { return {q0, qd, &fs}; }
};

struct Dataset {
  std::vector<PlanningTask> train;
  std::vector<PlanningTask> val;
  std::vector<PlanningTask> test;
};

struct GenerateConfig {
  std::array<int, 3> counts{600, 150, 100};  // train, val, test
  std::vector<ManeuverKind> kinds{ManeuverKind::kOvertaking,
                                  ManeuverKind::kPerpendicular,
                                  ManeuverKind::kOblique};
  int pairs_per_env = 20;
  double val_fresh_env_fraction = 0.2;  // validation tasks in unseen envs
  int max_pair_attempts = 250;          // per environment before redrawing it
  int max_env_attempts = 60;
  VehicleParams vehicle;
  DubinsFeasibilityConfig dubins;
};

// Deterministic generation: only Dubins-feasible tasks with collision-free
// endpoint footprints are admitted; test environments never appear in the
// train or validation splits. Aborts when the admission rate collapses
// below 1% over a sliding window.
Dataset generate_dataset(const GenerateConfig& cfg, uint64_t seed);

}  // namespace splineplan
