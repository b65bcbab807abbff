#include "splineplan/trainer.hpp"

#include <fstream>

#include "splineplan/io.hpp"
#include "splineplan/validator.hpp"

namespace splineplan {

namespace {

// Per-sample workspace reused across the whole run; tapes get large.
struct SampleWorkspace {
  Tape tape;
  std::vector<DiffValue> taped_w;
  std::vector<double> adj;
};

// Returns false when the sample produced a non-finite loss.
bool accumulate_sample(SampleWorkspace& ws, const std::vector<double>& weights,
                       const PlanningTask& task, const VehicleParams& vehicle,
                       TrainPhase phase, std::vector<double>& grad,
                       LossBreakdown& out) {
  ws.tape.clear();
  const int P = static_cast<int>(weights.size());
  const int32_t base = ws.tape.input_block(weights);
  ws.taped_w.resize(P);
  for (int i = 0; i < P; ++i) ws.taped_w[i] = {weights[i], base + i, &ws.tape};
  try {
    const auto res = rollout<DiffValue>(task.input(), ws.taped_w, &ws.tape);
    const auto terms = evaluate_losses<DiffValue>(res.assembled, task.fs, vehicle, phase);
    out = terms.snapshot();
    if (!std::isfinite(out.total)) return false;
    ws.tape.backward(terms.total, ws.adj);
    for (int i = 0; i < P; ++i) grad[i] += ws.adj.empty() ? 0.0 : ws.adj[i];
    return true;
  } catch (const std::runtime_error&) {
    // solver failures inside the rollout are treated like non-finite loss
    out = {};
    out.total = std::numeric_limits<double>::quiet_NaN();
    return false;
  }
}

LossBreakdown mean_breakdown(const std::vector<LossBreakdown>& items) {
  LossBreakdown m;
  if (items.empty()) return m;
  for (const auto& b : items) {
    m.coll += b.coll;
    m.curv += b.curv;
    m.over += b.over;
    m.nbal += b.nbal;
    m.len += b.len;
    m.total += b.total;
    m.sigma_len += b.sigma_len;
  }
  const double n = static_cast<double>(items.size());
  m.coll /= n;
  m.curv /= n;
  m.over /= n;
  m.nbal /= n;
  m.len /= n;
  m.total /= n;
  m.sigma_coll = items.front().sigma_coll;
  m.sigma_len = m.sigma_len == static_cast<int>(items.size()) ? 1 : 0;
  return m;
}

class MetricsLog {
 public:
  explicit MetricsLog(const std::string& path) {
    if (!path.empty()) out_.open(path);
  }
  void write(int stage, int step, const LossBreakdown& b) {
    if (!out_.is_open()) return;
    Json j = loss_to_json(b);
    j["stage"] = stage;
    j["step"] = step;
    out_ << j.dump() << "\n";
  }

 private:
  std::ofstream out_;
};

}  // namespace

double validate(const PlannerModel& model, std::span<const PlanningTask> tasks,
                const VehicleParams& vehicle) {
  if (tasks.empty()) return 0.0;
  int ok = 0;
  for (const auto& task : tasks) {
    const auto res = rollout<double>(task.input(), model.weights, nullptr);
    if (!res.assembled.final_ok) continue;
    if (path_feasible(res.assembled.path, task.input(), vehicle)) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(tasks.size());
}

LossBreakdown rollout_loss_grad(const PlannerModel& model, const PlanningTask& task,
                                const VehicleParams& vehicle, TrainPhase phase,
                                std::vector<double>* grad) {
  static thread_local SampleWorkspace ws;
  std::vector<double> g(model.weights.size(), 0.0);
  LossBreakdown out;
  if (!accumulate_sample(ws, model.weights, task, vehicle, phase, g, out))
    throw SolveError("rollout loss was non-finite");
  if (grad) *grad = std::move(g);
  return out;
}

std::pair<PlannerModel, TrainReport> train(const Dataset& data, const TrainConfig& cfg,
                                           const VehicleParams& vehicle) {
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (cfg.curriculum.empty()) throw ConfigError("curriculum must not be empty");

  PlannerModel model = PlannerModel::init(cfg.seed);
  TrainReport report;
  if (data.train.empty()) return {model, report};

  AdamState adam(model.weights.size(), cfg.learning_rate);
  SampleWorkspace ws;
  MetricsLog metrics(cfg.metrics_path);
  Rng shuffle_rng(cfg.seed ^ 0x5eedful);

  std::vector<double> grad(model.weights.size());
  std::vector<double> best_weights;
  std::vector<LossBreakdown> batch_stats;
  int consecutive_skips = 0;
  int global_step = 0;

  // one optimization step over tasks [lo, hi)
  const auto run_batch = [&](const std::vector<const PlanningTask*>& order, size_t lo,
                             size_t hi, TrainPhase phase, int stage) -> LossBreakdown {
    std::fill(grad.begin(), grad.end(), 0.0);
    batch_stats.clear();
    bool finite = true;
    for (size_t i = lo; i < hi; ++i) {
      LossBreakdown b;
      if (!accumulate_sample(ws, model.weights, *order[i], vehicle, phase, grad, b)) {
        finite = false;
        break;
      }
      batch_stats.push_back(b);
    }
    LossBreakdown mean = mean_breakdown(batch_stats);
    bool applied = false;
    if (finite) {
      const double inv = 1.0 / static_cast<double>(hi - lo);
      for (auto& g : grad) g *= inv;
      applied = adam_step(adam, model.weights, grad);
    }
    if (!applied) {
      report.skipped_batches += 1;
      consecutive_skips += 1;
      if (consecutive_skips >= 3)
        throw SolveError("three consecutive batches skipped (non-finite loss)");
      mean.total = std::numeric_limits<double>::quiet_NaN();
    } else {
      consecutive_skips = 0;
    }
    metrics.write(stage, global_step, mean);
    report.steps.push_back({stage, global_step, mean});
    ++global_step;
    return mean;
  };

  const auto tasks_of_kinds = [&](size_t stage_idx) {
    std::vector<const PlanningTask*> out;
    for (const auto& t : data.train) {
      for (size_t k = 0; k <= stage_idx && k < cfg.curriculum.size(); ++k) {
        const bool match = t.kind == cfg.curriculum[k];
        if ((cfg.cumulative_stages && match) ||
            (!cfg.cumulative_stages && k == stage_idx && match)) {
          out.push_back(&t);
          break;
        }
      }
    }
    return out;
  };

  // --- pretraining phase: collision gated off ---
  {
    auto tasks = tasks_of_kinds(0);
    if (tasks.empty()) tasks = tasks_of_kinds(cfg.curriculum.size() - 1);
    size_t cursor = tasks.size();
    for (int step = 0; step < cfg.pretrain_max_steps; ++step) {
      std::vector<const PlanningTask*> batch;
      while (batch.size() < static_cast<size_t>(cfg.batch_size)) {
        if (cursor >= tasks.size()) {
          shuffle_rng.shuffle(tasks);
          cursor = 0;
        }
        batch.push_back(tasks[cursor++]);
      }
      const LossBreakdown mean = run_batch(batch, 0, batch.size(),
                                           TrainPhase::kPretrain, -1);
      report.pretrain_steps += 1;
      if (std::isfinite(mean.total) &&
          mean.curv + mean.over + mean.nbal < cfg.pretrain_threshold)
        break;
    }
  }

  // --- curriculum stages ---
  int global_epoch = 0;
  for (size_t stage = 0; stage < cfg.curriculum.size(); ++stage) {
    auto stage_tasks = tasks_of_kinds(stage);
    if (stage_tasks.empty()) continue;
    for (int epoch = 0; epoch < cfg.epochs_per_stage; ++epoch, ++global_epoch) {
      shuffle_rng.shuffle(stage_tasks);
      double loss_sum = 0.0;
      int steps = 0;
      for (size_t lo = 0; lo < stage_tasks.size(); lo += cfg.batch_size) {
        const size_t hi = std::min(stage_tasks.size(), lo + cfg.batch_size);
        const LossBreakdown mean =
            run_batch(stage_tasks, lo, hi, TrainPhase::kMain, static_cast<int>(stage));
        if (std::isfinite(mean.total)) {
          loss_sum += mean.total;
          ++steps;
        }
      }
      const double acc = validate(model, data.val, vehicle);
      report.epochs.push_back({static_cast<int>(stage), epoch, global_epoch, acc,
                               steps ? loss_sum / steps : 0.0});
      if (acc > report.best_accuracy) {
        report.best_accuracy = acc;
        report.best_global_epoch = global_epoch;
        best_weights = model.weights;
      }
      if (!cfg.checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
          (global_epoch + 1) % cfg.checkpoint_every == 0) {
        save_model(cfg.checkpoint_dir + "/epoch_" + std::to_string(global_epoch) +
                       ".json",
                   model, RunMeta{"", cfg.seed});
      }
    }
  }

  if (report.best_global_epoch >= 0) model.weights = best_weights;
  return {model, report};
}

}  // namespace splineplan
