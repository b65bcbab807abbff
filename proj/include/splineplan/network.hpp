#pragma once

#include <span>
#include <vector>

#include "splineplan/geometry.hpp"
#include "splineplan/spline.hpp"
#include "splineplan/tape.hpp"

namespace splineplan {

// Map coordinates and state offsets are fed to the network divided by this
// scale so inputs stay O(1) across desk-sized scenes.
constexpr double kInputScale = 25.0;  // meters

struct LayerSpec {
  const char* name;
  int in;
  int out;
  bool tanh_act;
};

// Three functional blocks: per-quad encoder (2 FC: 32, 128) averaged over
// the 4 cyclic vertex rotations and sum-pooled over quads, followed by the
// map output head (2 FC: 64, 64); state block (4 FC: 64, 256, 256, 256);
// four single-output estimator heads (4 FC each: 128, 64, 64, 1). All
// hidden activations are tanh; estimator outputs are identity except the
// x head, squashed to (0.1, 10.1).
std::span<const LayerSpec> model_layers();
int model_param_count();
int layer_offset(int layer_index);

struct PlannerModel {
  std::vector<double> weights;

  static PlannerModel init(uint64_t seed);  // Xavier-uniform, zero biases
  bool valid() const { return static_cast<int>(weights.size()) == model_param_count(); }
};

// Planning task: initial and desired poses (zero steering at both ends)
// plus the free space.
struct TaskInput {
  Pose2 q0;
  Pose2 qd;
  const FreeSpace* fs = nullptr;
};

struct RolloutStats {
  int net_evals = 0;       // state + estimator stack evaluations
  int segment_solves = 0;  // quintic boundary-value solves
};

template <class T>
struct RolloutResult {
  AssembleResult<T> assembled;
  RolloutStats stats;
};

namespace netdetail {

// Rewrites xs into a node block with consecutive ids (identity copies for
// expressions, fresh leaves for constants). No-op for plain doubles and
// for already-contiguous blocks.
inline void make_contiguous(Tape* tape, std::vector<DiffValue>& xs) {
  bool ok = !xs.empty() && !xs[0].is_const();
  for (size_t i = 0; ok && i < xs.size(); ++i)
    ok = !xs[i].is_const() && xs[i].id == xs[0].id + static_cast<int32_t>(i);
  if (ok) return;
  for (auto& x : xs) x = x.is_const() ? tape->input(x.v) : x + 0.0;
}
inline void make_contiguous(Tape*, std::vector<double>&) {}

// Taped weights are one contiguous leaf block, and callers keep activation
// vectors contiguous, so each neuron is a single range-affine record.
template <class T>
void apply_layer(std::span<const T> w, int offset, int in, int out, bool tanh_act,
                 std::vector<T>& x, std::vector<T>& y, Tape* tape) {
  using std::tanh;
  if constexpr (std::is_same_v<T, DiffValue>) {
    make_contiguous(tape, x);
    const int32_t w0 = w[offset].id;
    const int32_t x0 = x[0].id;
    y.resize(out);
    for (int o = 0; o < out; ++o)
      y[o] = tape->affine_range(w0 + out * in + o, w0 + o * in, x0, in);
    if (tanh_act)
      for (int o = 0; o < out; ++o) y[o] = tanh(y[o]);
  } else {
    y.resize(out);
    for (int o = 0; o < out; ++o) {
      double acc = w[offset + out * in + o];
      const T* row = w.data() + offset + o * in;
      for (int i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = tanh_act ? tanh(acc) : acc;
    }
  }
}

}  // namespace netdetail

// Latent map code (64). Invariant to quad order (sum pooling) and to cyclic
// rotation of each quad's vertex list (group averaging). Coordinates are
// taken in q0's frame.
template <class T>
std::vector<T> encode_map(const FreeSpace& fs, const Pose2& q0, std::span<const T> w,
                          Tape* tape);

// Latent state code (256) of the desired pose expressed in the current
// frame: inputs (dx, dy, sin dtheta, cos dtheta), positions scaled.
template <class T>
std::vector<T> encode_state(const PoseT<T>& qi, const Pose2& qd, std::span<const T> w,
                            Tape* tape);

// Four estimator heads applied to [map_code, state_code].
template <class T>
GluingPointT<T> predict_gluing_point(const std::vector<T>& map_code,
                                     const std::vector<T>& state_code,
                                     std::span<const T> w, Tape* tape);

// Six network evaluations, each advancing the frame chain by the solved
// segment, closed by the analytic final segment toward qd. Never throws on
// final-segment failure; check `assembled.final_ok`.
template <class T>
RolloutResult<T> rollout(const TaskInput& task, std::span<const T> w, Tape* tape);

// Inference-path wrapper: propagates the final-segment error.
PathSpline plan_neural(const TaskInput& task, const PlannerModel& model,
                       RolloutStats* stats = nullptr);

// --- implementation ---

template <class T>
std::vector<T> encode_map(const FreeSpace& fs, const Pose2& q0, std::span<const T> w,
                          Tape* tape) {
  std::vector<T> rot_in, h1, h2, pooled(128, T(0.0)), out;
  for (const auto& quad : fs.quads) {
    std::vector<T> quad_code(128, T(0.0));
    for (int rot = 0; rot < 4; ++rot) {
      rot_in.clear();
      for (int k = 0; k < 4; ++k) {
        const Vec2 local = q0.to_local(quad.vertex((k + rot) % 4));
        rot_in.push_back(T(local.x / kInputScale));
        rot_in.push_back(T(local.y / kInputScale));
      }
      netdetail::apply_layer<T>(w, layer_offset(0), 8, 32, true, rot_in, h1, tape);
      netdetail::apply_layer<T>(w, layer_offset(1), 32, 128, true, h1, h2, tape);
      for (int i = 0; i < 128; ++i) quad_code[i] = quad_code[i] + h2[i];
    }
    for (int i = 0; i < 128; ++i) pooled[i] = pooled[i] + 0.25 * quad_code[i];
  }
  netdetail::apply_layer<T>(w, layer_offset(2), 128, 64, true, pooled, h1, tape);
  netdetail::apply_layer<T>(w, layer_offset(3), 64, 64, true, h1, out, tape);
  return out;
}

template <class T>
std::vector<T> encode_state(const PoseT<T>& qi, const Pose2& qd, std::span<const T> w,
                            Tape* tape) {
  using std::cos;
  using std::sin;
  const T c = cos(qi.heading);
  const T s = sin(qi.heading);
  const T dxw = qd.position.x - qi.position.x;
  const T dyw = qd.position.y - qi.position.y;
  const T dth = qd.heading - qi.heading;
  std::vector<T> feats = {(c * dxw + s * dyw) * (1.0 / kInputScale),
                          (c * dyw - s * dxw) * (1.0 / kInputScale), sin(dth), cos(dth)};
  std::vector<T> a, b;
  netdetail::apply_layer<T>(w, layer_offset(4), 4, 64, true, feats, a, tape);
  netdetail::apply_layer<T>(w, layer_offset(5), 64, 256, true, a, b, tape);
  netdetail::apply_layer<T>(w, layer_offset(6), 256, 256, true, b, a, tape);
  netdetail::apply_layer<T>(w, layer_offset(7), 256, 256, true, a, b, tape);
  return b;
}

template <class T>
GluingPointT<T> predict_gluing_point(const std::vector<T>& map_code,
                                     const std::vector<T>& state_code,
                                     std::span<const T> w, Tape* tape) {
  std::vector<T> joint;
  joint.reserve(map_code.size() + state_code.size());
  joint.insert(joint.end(), map_code.begin(), map_code.end());
  joint.insert(joint.end(), state_code.begin(), state_code.end());

  std::array<T, 4> head_out{};
  std::vector<T> a, b;
  for (int h = 0; h < 4; ++h) {
    const int base = 8 + 4 * h;
    netdetail::apply_layer<T>(w, layer_offset(base), 320, 128, true, joint, a, tape);
    netdetail::apply_layer<T>(w, layer_offset(base + 1), 128, 64, true, a, b, tape);
    netdetail::apply_layer<T>(w, layer_offset(base + 2), 64, 64, true, b, a, tape);
    netdetail::apply_layer<T>(w, layer_offset(base + 3), 64, 1, false, a, b, tape);
    head_out[h] = b[0];
  }
  GluingPointT<T> gp;
  gp.x = 10.0 * sigmoid(head_out[0]) + kMinGluingAdvance;  // (0.1, 10.1)
  gp.y = head_out[1];
  gp.dy = head_out[2];
  gp.ddy = head_out[3];
  return gp;
}

template <class T>
RolloutResult<T> rollout(const TaskInput& task, std::span<const T> w, Tape* tape) {
  RolloutResult<T> out;
  out.assembled.path.q0 = task.q0;
  out.assembled.path.qd = task.qd;

  const std::vector<T> map_code = encode_map<T>(*task.fs, task.q0, w, tape);
  ChainState<T> st{
      PoseT<T>{{T(task.q0.position.x), T(task.q0.position.y)}, T(task.q0.heading)},
      T(0.0)};
  for (int i = 0; i < kDefaultSegments - 1; ++i) {
    const std::vector<T> state_code = encode_state<T>(st.frame, task.qd, w, tape);
    const GluingPointT<T> gp = predict_gluing_point<T>(map_code, state_code, w, tape);
    out.stats.net_evals += 1;
    out.assembled.path.gluing_points.push_back(gp);
    out.assembled.path.segments.push_back(advance_chain(st, gp));
    out.stats.segment_solves += 1;
  }
  out.assembled.last_gp_world = st.frame;
  try {
    out.assembled.path.segments.push_back(final_segment(st, task.qd));
    out.stats.segment_solves += 1;
    out.assembled.path.closed = true;
  } catch (const OvershootError&) {
    out.assembled.path.closed = false;
  } catch (const SolveError&) {
    out.assembled.path.closed = false;
  }
  out.assembled.final_ok = out.assembled.path.closed;
  return out;
}

}  // namespace splineplan
