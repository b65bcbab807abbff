#include "splineplan/trainer.hpp"

#include "doctest.h"
#include "splineplan/validator.hpp"
#include "test_util.hpp"

using namespace splineplan;
using namespace testutil;

namespace {

PlanningTask straight_corridor_task(double separation = 33.0) {
  PlanningTask t;
  t.kind = ManeuverKind::kOvertaking;
  t.fs = FreeSpace({Quadrangle(
      {Vec2{-6, -3.5}, Vec2{45, -3.5}, Vec2{45, 3.5}, Vec2{-6, 3.5}})});
  t.q0 = Pose2{0, 0, 0};
  t.qd = Pose2{separation, 0, 0};
  return t;
}

Dataset tiny_dataset(int n_train, int n_val) {
  Dataset ds;
  Rng rng(17);
  for (int i = 0; i < n_train + n_val; ++i) {
    PlanningTask t = straight_corridor_task(rng.uniform(26.0, 36.0));
    t.q0 = Pose2{0, rng.uniform(-1.0, 1.0), rng.uniform(-0.05, 0.05)};
    t.env_id = i / 4;
    (i < n_train ? ds.train : ds.val).push_back(std::move(t));
  }
  return ds;
}

}  // namespace

TEST_CASE("zero epochs returns the initialized model with an empty report") {
  Dataset ds = tiny_dataset(4, 2);
  TrainConfig cfg;
  cfg.epochs_per_stage = 0;
  cfg.pretrain_max_steps = 0;
  cfg.curriculum = {ManeuverKind::kOvertaking};
  cfg.seed = 9;
  const auto [model, report] = train(ds, cfg, VehicleParams{});
  CHECK(model.weights == PlannerModel::init(9).weights);
  CHECK(report.epochs.empty());
  CHECK(report.best_global_epoch == -1);
}

TEST_CASE("training is deterministic for identical seeds") {
  Dataset ds = tiny_dataset(8, 4);
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.epochs_per_stage = 2;
  cfg.pretrain_max_steps = 3;
  cfg.curriculum = {ManeuverKind::kOvertaking};
  cfg.seed = 5;
  const auto [m1, r1] = train(ds, cfg, VehicleParams{});
  const auto [m2, r2] = train(ds, cfg, VehicleParams{});
  CHECK(m1.weights == m2.weights);
  REQUIRE(r1.epochs.size() == r2.epochs.size());
  for (size_t i = 0; i < r1.epochs.size(); ++i)
    CHECK(r1.epochs[i].val_accuracy == r2.epochs[i].val_accuracy);
}

TEST_CASE("single straight task reaches the length-loss regime within 500 steps") {
  Dataset ds;
  ds.train.push_back(straight_corridor_task());
  ds.val.push_back(straight_corridor_task());
  TrainConfig cfg;
  cfg.batch_size = 1;
  cfg.epochs_per_stage = 500;
  cfg.pretrain_max_steps = 50;
  cfg.curriculum = {ManeuverKind::kOvertaking};
  cfg.seed = 2;
  const auto [model, report] = train(ds, cfg, VehicleParams{});
  bool reached = false;
  int first_step = -1;
  for (const auto& s : report.steps) {
    if (s.stage >= 0 && s.mean.sigma_len == 1) {
      reached = true;
      first_step = s.step;
      break;
    }
  }
  CHECK(reached);
  CHECK(first_step <= 500);
  CHECK(report.best_accuracy == 1.0);
}

TEST_CASE("validate: overshooting model scores zero, feasible paths pass") {
  VehicleParams vp;
  // the freshly initialized model drives ~30 m; a 6 m goal overshoots
  std::vector<PlanningTask> close_tasks(5, straight_corridor_task(6.0));
  const auto model = PlannerModel::init(3);
  CHECK(validate(model, close_tasks, vp) == 0.0);

  // validator sanity: hand-assembled feasible paths are accepted
  const PlanningTask t = straight_corridor_task(35.0);
  const std::vector<GluingPoint> gps(6, GluingPoint{5.0, 0, 0, 0});
  const PathSpline path = assemble(t.q0, gps, t.qd);
  CHECK(path_feasible(path, t.input(), vp));
}

TEST_CASE("best checkpoint has the highest recorded validation accuracy") {
  Dataset ds = tiny_dataset(10, 5);
  TrainConfig cfg;
  cfg.batch_size = 5;
  cfg.epochs_per_stage = 3;
  cfg.pretrain_max_steps = 10;
  cfg.curriculum = {ManeuverKind::kOvertaking};
  cfg.seed = 11;
  const auto [model, report] = train(ds, cfg, VehicleParams{});
  for (const auto& e : report.epochs) CHECK(e.val_accuracy <= report.best_accuracy);
}
