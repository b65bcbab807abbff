#include "splineplan/network.hpp"

namespace splineplan {

namespace {

constexpr LayerSpec kLayers[] = {
    {"quad_enc1", 8, 32, true},     // 0
    {"quad_enc2", 32, 128, true},   // 1
    {"map_head1", 128, 64, true},   // 2
    {"map_head2", 64, 64, true},    // 3
    {"state1", 4, 64, true},        // 4
    {"state2", 64, 256, true},      // 5
    {"state3", 256, 256, true},     // 6
    {"state4", 256, 256, true},     // 7
    {"est_x1", 320, 128, true},     // 8
    {"est_x2", 128, 64, true},      {"est_x3", 64, 64, true},  {"est_x4", 64, 1, false},
    {"est_y1", 320, 128, true},     {"est_y2", 128, 64, true}, {"est_y3", 64, 64, true},
    {"est_y4", 64, 1, false},       {"est_dy1", 320, 128, true},
    {"est_dy2", 128, 64, true},     {"est_dy3", 64, 64, true}, {"est_dy4", 64, 1, false},
    {"est_ddy1", 320, 128, true},   {"est_ddy2", 128, 64, true},
    {"est_ddy3", 64, 64, true},     {"est_ddy4", 64, 1, false},
};
constexpr int kLayerCount = static_cast<int>(std::size(kLayers));

struct OffsetTable {
  std::array<int, kLayerCount + 1> off{};
  OffsetTable() {
    off[0] = 0;
    for (int i = 0; i < kLayerCount; ++i)
      off[i + 1] = off[i] + kLayers[i].in * kLayers[i].out + kLayers[i].out;
  }
};
const OffsetTable kOffsets;

}  // namespace

std::span<const LayerSpec> model_layers() { return {kLayers, std::size(kLayers)}; }

int model_param_count() { return kOffsets.off[kLayerCount]; }

int layer_offset(int layer_index) { return kOffsets.off[layer_index]; }

PlannerModel PlannerModel::init(uint64_t seed) {
  PlannerModel m;
  m.weights.assign(model_param_count(), 0.0);
  Rng rng(seed);
  for (int li = 0; li < kLayerCount; ++li) {
    const auto& l = kLayers[li];
    const double bound = std::sqrt(6.0 / (l.in + l.out));
    double* w = m.weights.data() + kOffsets.off[li];
    for (int i = 0; i < l.in * l.out; ++i) w[i] = rng.uniform(-bound, bound);
    // biases stay zero
  }
  return m;
}

PathSpline plan_neural(const TaskInput& task, const PlannerModel& model,
                       RolloutStats* stats) {
  if (!model.valid()) throw ConfigError("planner model has wrong parameter count");
  auto res = rollout<double>(task, model.weights, nullptr);
  if (stats) *stats = res.stats;
  if (!res.assembled.final_ok)
    throw OvershootError("rollout could not close the final segment to qd");
  return res.assembled.path;
}

}  // namespace splineplan
