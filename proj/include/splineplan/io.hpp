#pragma once

#include <string>

#include "json.hpp"
#include "splineplan/losses.hpp"
#include "splineplan/network.hpp"
#include "splineplan/scenario.hpp"

namespace splineplan {

using Json = nlohmann::ordered_json;

// FNV-1a over the canonical dump; embedded in every output artifact.
std::string config_hash(const Json& j);

struct RunMeta {
  std::string config_hash;
  uint64_t seed = 0;
  Json to_json() const;
};

// --- geometry / tasks ---

Json quad_to_json(const Quadrangle& q);        // 4 x [x, y], any cyclic order on read
Quadrangle quad_from_json(const Json& j);
Json pose_to_json(const Pose2& p);             // [x, y, theta]
Pose2 pose_from_json(const Json& j);

Json task_to_json(const PlanningTask& t);
PlanningTask task_from_json(const Json& j);

// JSON-lines dataset files (one per split, first line is run metadata).
void write_tasks_jsonl(const std::string& path, std::span<const PlanningTask> tasks,
                       const RunMeta& meta);
std::vector<PlanningTask> read_tasks_jsonl(const std::string& path);

// --- paths ---

Json path_to_json(const PathSpline& path, const RunMeta& meta);
PathSpline path_from_json(const Json& j);

// --- model checkpoints ---

void save_model(const std::string& path, const PlannerModel& model, const RunMeta& meta);
PlannerModel load_model(const std::string& path);

// --- vehicle / app config ---

VehicleParams vehicle_from_json(const Json& j);  // missing keys keep defaults
Json vehicle_to_json(const VehicleParams& p);

Json loss_to_json(const LossBreakdown& b);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
Json load_json_file(const std::string& path);

}  // namespace splineplan
