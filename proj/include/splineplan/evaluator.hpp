#pragma once

#include <functional>

#include "splineplan/io.hpp"
#include "splineplan/lattice.hpp"
#include "splineplan/rrt_star.hpp"
#include "splineplan/scenario.hpp"
#include "splineplan/validator.hpp"

namespace splineplan {

struct EvalRow {
  int task_id = 0;
  std::string planner;
  PlanStatus status = PlanStatus::kInfeasible;
  double time = 0.0;        // seconds
  double length = 0.0;      // meters, feasible rows only
  double length_vs_sl = 0.0;  // percent, only when SL solved the same task
  bool has_length_vs_sl = false;
};

struct PlannerSummary {
  std::string planner;
  int tasks = 0;
  int feasible = 0;
  double accuracy = 0.0;
  double time_mean = 0.0, time_std = 0.0;          // feasible rows
  double rel_length_mean = 0.0, rel_length_std = 0.0;  // vs SL, both feasible
  int rel_length_count = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<PlannerSummary> summaries;
};

using PlannerFn = std::function<PlanResult(const PlanningTask&)>;

struct PlannerEntry {
  std::string name;
  PlannerFn plan;
};

struct EvaluateOptions {
  bool record_wall_time = true;  // false writes zeros (reproducible artifacts)
  ValidatorConfig validator;
};

// Runs every planner on every task; any returned path must also pass the
// independent validator or the row is downgraded to infeasible. Relative
// lengths are reported against the "lattice" planner where both succeed.
EvalReport evaluate(std::span<const PlanningTask> tasks,
                    std::span<const PlannerEntry> planners,
                    const VehicleParams& vehicle, const EvaluateOptions& opts = {});

std::string eval_rows_csv(const EvalReport& report, const std::string& meta_line);
Json eval_summary_json(const EvalReport& report);

// --- heatmap of feasible start orientations (generalization study) ---

struct HeatmapSpec {
  FreeSpace environment{std::vector<Quadrangle>{
      Quadrangle({Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}})}};
  Pose2 qd;
  double resolution = 0.25;  // meters
  int orientation_bins = 36;
};

struct HeatmapCell {
  double x = 0.0, y = 0.0;
  int count = 0;           // feasible orientations
  uint64_t mask = 0;       // bit per orientation bin
};

std::vector<HeatmapCell> heatmap(const HeatmapSpec& spec, const PlannerModel& model,
                                 const VehicleParams& vehicle);

std::string heatmap_csv(std::span<const HeatmapCell> cells, const std::string& meta_line);

}  // namespace splineplan
