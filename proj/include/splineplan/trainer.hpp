#pragma once

#include <functional>
#include <optional>
#include <string>

#include "splineplan/adam.hpp"
#include "splineplan/losses.hpp"
#include "splineplan/network.hpp"
#include "splineplan/scenario.hpp"

namespace splineplan {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 64;
  std::vector<ManeuverKind> curriculum{ManeuverKind::kOvertaking,
                                       ManeuverKind::kPerpendicular,
                                       ManeuverKind::kOblique};
  bool cumulative_stages = true;  // each stage also trains earlier kinds
  int epochs_per_stage = 50;
  double pretrain_threshold = 1e-3;  // batch-mean curv+over+nbal
  int pretrain_max_steps = 2000;
  uint64_t seed = 0;
  int checkpoint_every = 0;             // epochs; 0 writes only best/last
  std::string checkpoint_dir;           // empty: keep checkpoints in memory only
  std::string metrics_path;             // optional JSON-lines per-step log
};

struct StepRecord {
  int stage = 0;  // -1 for pretraining
  int step = 0;
  LossBreakdown mean;
};

struct EpochRecord {
  int stage = 0;
  int epoch = 0;         // within the stage
  int global_epoch = 0;  // across stages
  double val_accuracy = 0.0;
  double train_loss = 0.0;  // mean total over the epoch's steps
};

struct TrainReport {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  int best_global_epoch = -1;
  double best_accuracy = -1.0;
  int pretrain_steps = 0;
  int skipped_batches = 0;
};

// Fraction of tasks where the rollout closes and the independent validator
// accepts the path.
double validate(const PlannerModel& model, std::span<const PlanningTask> tasks,
                const VehicleParams& vehicle);

// Self-supervised training: pretraining phase (collision gated off) on the
// first curriculum stage's tasks, then curriculum stages with cumulative
// task sets. Returns the checkpoint with the highest validation accuracy.
std::pair<PlannerModel, TrainReport> train(const Dataset& data, const TrainConfig& cfg,
                                           const VehicleParams& vehicle);

// Single-sample loss + gradient through the full rollout; exposed for the
// gradient test suites. Returns the loss terms; `grad` (when non-null)
// receives d(total)/d(weights).
LossBreakdown rollout_loss_grad(const PlannerModel& model, const PlanningTask& task,
                                const VehicleParams& vehicle, TrainPhase phase,
                                std::vector<double>* grad);

}  // namespace splineplan
