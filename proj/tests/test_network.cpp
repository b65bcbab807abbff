#include "splineplan/network.hpp"

#include "doctest.h"
#include "splineplan/io.hpp"
#include "splineplan/losses.hpp"
#include "splineplan/trainer.hpp"
#include "test_util.hpp"

using namespace splineplan;
using namespace testutil;

namespace {

FreeSpace corridor(double length = 45.0, double width = 8.0) {
  return FreeSpace({Quadrangle({Vec2{-5, -width / 2}, Vec2{length, -width / 2},
                                Vec2{length, width / 2}, Vec2{-5, width / 2}})});
}

FreeSpace random_fs(Rng& rng, int quads) {
  std::vector<Quadrangle> qs;
  for (int i = 0; i < quads; ++i)
    qs.push_back(random_quad(rng, {rng.uniform(-10, 10), rng.uniform(-10, 10)},
                             rng.uniform(2.0, 5.0)));
  return FreeSpace(qs);
}

}  // namespace

TEST_CASE("model layer table and initialization") {
  const auto layers = model_layers();
  REQUIRE(layers.size() == 24);
  CHECK(layers[0].in == 8);
  CHECK(layers[0].out == 32);
  CHECK(layers[1].out == 128);
  CHECK(layers[2].out == 64);
  CHECK(layers[3].out == 64);
  CHECK(layers[4].in == 4);
  CHECK(layers[7].out == 256);
  CHECK(layers[8].in == 320);
  CHECK(layers[11].out == 1);

  const auto m = PlannerModel::init(3);
  CHECK(m.valid());
  CHECK(static_cast<int>(m.weights.size()) == model_param_count());
  const auto m2 = PlannerModel::init(3);
  CHECK(m.weights == m2.weights);
  const auto m3 = PlannerModel::init(4);
  CHECK(m.weights != m3.weights);
}

TEST_CASE("zero weights squash to x=5.1 and zeros") {
  PlannerModel zero;
  zero.weights.assign(model_param_count(), 0.0);
  const FreeSpace fs = corridor();
  const Pose2 q0{0, 0, 0};
  const auto map_code = encode_map<double>(fs, q0, zero.weights, nullptr);
  const auto state_code =
      encode_state<double>(PoseT<double>{{0, 0}, 0}, Pose2{20, 0, 0}, zero.weights,
                           nullptr);
  const auto gp = predict_gluing_point<double>(map_code, state_code, zero.weights,
                                               nullptr);
  CHECK(gp.x == doctest::Approx(5.1));
  CHECK(gp.y == 0.0);
  CHECK(gp.dy == 0.0);
  CHECK(gp.ddy == 0.0);
}

TEST_CASE("x head output stays in (0.1, 10.1)") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = PlannerModel::init(rng.next_u64());
    const FreeSpace fs = random_fs(rng, 3);
    const Pose2 q0{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi)};
    const Pose2 qd{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi)};
    const auto mc = encode_map<double>(fs, q0, m.weights, nullptr);
    const auto sc = encode_state<double>(
        PoseT<double>{{q0.position.x, q0.position.y}, q0.heading}, qd, m.weights,
        nullptr);
    const auto gp = predict_gluing_point<double>(mc, sc, m.weights, nullptr);
    CHECK(gp.x > 0.1);
    CHECK(gp.x < 10.1);
    CHECK(std::isfinite(gp.y));
    CHECK(std::isfinite(gp.dy));
    CHECK(std::isfinite(gp.ddy));
  }
}

TEST_CASE("map code invariances") {
  Rng rng(33);
  const auto model = PlannerModel::init(7);
  for (int trial = 0; trial < 20; ++trial) {
    const FreeSpace fs = random_fs(rng, 1 + trial % 4);
    const Pose2 q0{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-kPi, kPi)};
    const auto base = encode_map<double>(fs, q0, model.weights, nullptr);

    {
      // permute quad order (rotate list)
      std::vector<Quadrangle> rotated(fs.quads.begin() + fs.quads.size() / 2,
                                      fs.quads.end());
      rotated.insert(rotated.end(), fs.quads.begin(),
                     fs.quads.begin() + fs.quads.size() / 2);
      const auto permuted = encode_map<double>(FreeSpace(rotated), q0, model.weights,
                                               nullptr);
      for (size_t i = 0; i < base.size(); ++i)
        CHECK(std::abs(base[i] - permuted[i]) <= 1e-6);
    }
    {
      // cyclic rotation of one quad's vertex list
      std::vector<Quadrangle> quads = fs.quads;
      const auto& v = quads[0].vertices();
      quads[0] = Quadrangle({v[2], v[3], v[0], v[1]});
      const auto rotated = encode_map<double>(FreeSpace(quads), q0, model.weights,
                                              nullptr);
      for (size_t i = 0; i < base.size(); ++i)
        CHECK(std::abs(base[i] - rotated[i]) <= 1e-6);
    }
  }
}

TEST_CASE("state encoding depends only on the relative pose") {
  const auto model = PlannerModel::init(11);
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose2 qi{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi)};
    const Pose2 qd{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi)};
    const Rigid t = random_rigid(rng);
    const auto a = encode_state<double>(
        PoseT<double>{{qi.position.x, qi.position.y}, qi.heading}, qd, model.weights,
        nullptr);
    const Pose2 qi2 = t.apply(qi), qd2 = t.apply(qd);
    const auto b = encode_state<double>(
        PoseT<double>{{qi2.position.x, qi2.position.y}, qi2.heading}, qd2,
        model.weights, nullptr);
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
  }
}

TEST_CASE("rollout: fixed evaluation count, determinism, closure") {
  const auto model = PlannerModel::init(5);
  const FreeSpace fs = corridor();
  const TaskInput task{Pose2{0, 0, 0}, Pose2{36, 0, 0}, &fs};
  RolloutStats stats;
  const PathSpline path = plan_neural(task, model, &stats);
  CHECK(stats.net_evals == 6);
  CHECK(stats.segment_solves == 7);
  CHECK(path.segments.size() == 7);
  CHECK(path.closed);

  RolloutStats stats2;
  const PathSpline path2 = plan_neural(task, model, &stats2);
  REQUIRE(path2.segments.size() == path.segments.size());
  for (size_t i = 0; i < path.segments.size(); ++i) {
    for (int c = 0; c < 6; ++c)
      CHECK(path.segments[i].coeffs[c] == path2.segments[i].coeffs[c]);
    CHECK(path.segments[i].span == path2.segments[i].span);
  }
}

TEST_CASE("rollout gradient through the loss matches finite differences") {
  Rng rng(606);
  const auto model = PlannerModel::init(17);
  const FreeSpace fs = corridor(40.0, 6.0);
  PlanningTask task;
  task.fs = fs;
  task.q0 = Pose2{0, 0.4, 0.05};
  task.qd = Pose2{34, -0.3, -0.04};
  VehicleParams vp;

  std::vector<double> grad;
  const auto breakdown = rollout_loss_grad(model, task, vp, TrainPhase::kMain, &grad);
  CHECK(std::isfinite(breakdown.total));
  REQUIRE(grad.size() == model.weights.size());

  // spot-check a deterministic sample of weights against central differences
  PlannerModel probe = model;
  int checked = 0;
  for (int t = 0; t < 400 && checked < 12; ++t) {
    const size_t i = rng.next_u64() % probe.weights.size();
    if (std::abs(grad[i]) < 1e-7) continue;
    const double h = 1e-6;
    const double orig = probe.weights[i];
    probe.weights[i] = orig + h;
    auto up = rollout_loss_grad(probe, task, vp, TrainPhase::kMain, nullptr);
    probe.weights[i] = orig - h;
    auto dn = rollout_loss_grad(probe, task, vp, TrainPhase::kMain, nullptr);
    probe.weights[i] = orig;
    const double fd = (up.total - dn.total) / (2 * h);
    CHECK(close_rel(grad[i], fd, 1e-3, 1e-6));
    ++checked;
  }
  CHECK(checked == 12);
}

TEST_CASE("checkpoint round-trips exactly") {
  const auto model = PlannerModel::init(23);
  const std::string path = "/tmp/splineplan_model_test.json";
  // io helpers are exercised here to pin the exact round-trip contract
  save_model(path, model, {"deadbeef", 23});
  const auto loaded = load_model(path);
  CHECK(loaded.weights == model.weights);
}
