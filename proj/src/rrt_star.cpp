#include "splineplan/rrt_star.hpp"

#include <chrono>

#include "splineplan/dubins.hpp"
#include "splineplan/validator.hpp"

namespace splineplan {

const char* plan_status_name(PlanStatus s) {
  switch (s) {
    case PlanStatus::kFeasible:
      return "feasible";
    case PlanStatus::kTimeout:
      return "timeout";
    case PlanStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

struct Edge {
  GluingPoint target;  // in the parent frame
  QuinticSegment seg;
  double length = 0.0;
};

// Connects two poses with one quintic holding zero curvature at both ends,
// so junction curvature stays continuous across any tree rewiring. Checks
// the curvature bound and the footprint at the usual sampling density.
std::optional<Edge> connect(const Pose2& from, const Pose2& to, const FreeSpace& fs,
                            const VehicleParams& vp) {
  const Vec2 local = from.to_local(to.position);
  if (local.x < 0.3) return std::nullopt;
  const double dth = wrap_angle(to.heading - from.heading);
  if (std::abs(dth) > 0.45 * kPi) return std::nullopt;

  Edge e;
  e.target = {local.x, local.y, std::tan(dth), 0.0};
  try {
    e.seg = solve_segment<double>(0.0, e.target);
  } catch (const SolveError&) {
    return std::nullopt;
  }
  e.seg.frame = {{from.position.x, from.position.y}, from.heading};

  const double c = std::cos(from.heading), s = std::sin(from.heading);
  for (int j = 0; j < kSamplesPerSegment; ++j) {
    const double x = e.seg.span * j / (kSamplesPerSegment - 1);
    const double d1 = poly_eval_d1(e.seg.coeffs, x);
    const double d2 = poly_eval_d2(e.seg.coeffs, x);
    if (std::abs(curvature_of(d1, d2)) > vp.kappa_max) return std::nullopt;
    const double y = poly_eval(e.seg.coeffs, x);
    const Pose2 pose{from.position.x + c * x - s * y, from.position.y + s * x + c * y,
                     from.heading + std::atan(d1)};
    if (!footprint_in_freespace(fs, pose, vp)) return std::nullopt;
  }
  e.length = arc_length(e.seg);
  return e;
}

struct Node {
  Pose2 pose;
  int parent = -1;
  double cost = 0.0;
  Edge edge;  // from parent
  std::vector<int> children;
};

}  // namespace

PlanResult rrt_star(const PlanningTask& task, const VehicleParams& vehicle,
                    const RrtStarConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  PlanResult out;
  if (!footprint_in_freespace(task.fs, task.q0, vehicle) ||
      !footprint_in_freespace(task.fs, task.qd, vehicle)) {
    out.status = PlanStatus::kInfeasible;
    out.wall_time = elapsed();
    return out;
  }

  const double radius = vehicle.min_turn_radius();
  const auto [lo, hi] = task.fs.bounding_box();
  Rng rng(cfg.seed);

  std::vector<Node> nodes;
  nodes.push_back({task.q0, -1, 0.0, {}, {}});

  int best_goal = -1;  // node whose edge ends exactly at qd
  double best_goal_cost = std::numeric_limits<double>::infinity();

  const auto try_goal = [&](int from) {
    if (dubins_distance(nodes[from].pose, task.qd, radius) > 1.5 * cfg.steer_step)
      return;
    const auto e = connect(nodes[from].pose, task.qd, task.fs, vehicle);
    if (!e) return;
    const double cost = nodes[from].cost + e->length;
    if (cost < best_goal_cost) {
      if (best_goal < 0) {
        nodes.push_back({task.qd, from, cost, *e, {}});
        best_goal = static_cast<int>(nodes.size()) - 1;
        nodes[from].children.push_back(best_goal);
      } else {
        auto& g = nodes[best_goal];
        auto& oldp = nodes[g.parent].children;
        oldp.erase(std::find(oldp.begin(), oldp.end(), best_goal));
        g.parent = from;
        g.cost = cost;
        g.edge = *e;
        nodes[from].children.push_back(best_goal);
      }
      best_goal_cost = cost;
    }
  };

  // depth-first cost refresh after rewiring
  const auto refresh_costs = [&](int root) {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int c : nodes[i].children) {
        nodes[c].cost = nodes[i].cost + nodes[c].edge.length;
        stack.push_back(c);
      }
    }
  };

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (cfg.max_time > 0.0 && (it & 63) == 0 && elapsed() > cfg.max_time) break;
    if (cfg.anytime && cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0)
      out.cost_checkpoints.push_back(best_goal_cost);
    if (!cfg.anytime && best_goal >= 0) break;

    Pose2 sample;
    const bool to_goal = rng.uniform() < cfg.goal_bias;
    if (to_goal) {
      sample = task.qd;
    } else {
      sample = Pose2{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y),
                     rng.uniform(-kPi, kPi)};
    }

    // nearest under the Dubins metric (goal node excluded from expansion)
    int nearest = -1;
    double nearest_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (static_cast<int>(i) == best_goal) continue;
      const double d = dubins_distance(nodes[i].pose, sample, radius);
      if (d < nearest_d) {
        nearest_d = d;
        nearest = static_cast<int>(i);
      }
    }
    if (nearest < 0) continue;

    Pose2 target = sample;
    const Vec2 dv = sample.position - nodes[nearest].pose.position;
    const double chord = norm(dv);
    if (chord > cfg.steer_step)
      target = Pose2{nodes[nearest].pose.position + (cfg.steer_step / chord) * dv,
                     sample.heading};

    // choose the cheapest collision-free parent in the shrinking ball
    const double n = static_cast<double>(nodes.size());
    const double ball = std::min(cfg.max_neighbor_radius,
                                 cfg.neighbor_gamma *
                                     std::cbrt(std::max(1.0, std::log(n + 1.0)) / n));
    int parent = -1;
    Edge parent_edge;
    double parent_cost = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (static_cast<int>(i) == best_goal) continue;
      const bool is_nearest = static_cast<int>(i) == nearest;
      if (!is_nearest && dubins_distance(nodes[i].pose, target, radius) > ball) continue;
      const auto e = connect(nodes[i].pose, target, task.fs, vehicle);
      if (!e) continue;
      const double cost = nodes[i].cost + e->length;
      if (cost < parent_cost) {
        parent_cost = cost;
        parent = static_cast<int>(i);
        parent_edge = *e;
      }
    }
    if (parent < 0) continue;

    nodes.push_back({target, parent, parent_cost, parent_edge, {}});
    const int ni = static_cast<int>(nodes.size()) - 1;
    nodes[parent].children.push_back(ni);

    // rewire the neighborhood through the new node
    for (size_t i = 0; i < nodes.size() - 1; ++i) {
      if (static_cast<int>(i) == best_goal || static_cast<int>(i) == parent) continue;
      if (nodes[i].parent < 0) continue;
      if (dubins_distance(target, nodes[i].pose, radius) > ball) continue;
      const auto e = connect(target, nodes[i].pose, task.fs, vehicle);
      if (!e) continue;
      const double cost = nodes[ni].cost + e->length;
      if (cost + 1e-12 < nodes[i].cost) {
        auto& oldp = nodes[nodes[i].parent].children;
        oldp.erase(std::find(oldp.begin(), oldp.end(), static_cast<int>(i)));
        nodes[i].parent = ni;
        nodes[i].edge = *e;
        nodes[i].cost = cost;
        nodes[ni].children.push_back(static_cast<int>(i));
        refresh_costs(static_cast<int>(i));
        if (best_goal >= 0) best_goal_cost = nodes[best_goal].cost;
      }
    }

    try_goal(ni);
  }

  out.wall_time = elapsed();
  if (best_goal < 0) {
    out.status = PlanStatus::kTimeout;
    return out;
  }

  // walk the tree back to the root
  std::vector<int> chain;
  for (int i = best_goal; i >= 0; i = nodes[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());

  PathSpline path;
  path.q0 = task.q0;
  path.qd = task.qd;
  path.closed = true;
  for (size_t i = 1; i < chain.size(); ++i) {
    path.segments.push_back(nodes[chain[i]].edge.seg);
    if (i + 1 < chain.size()) path.gluing_points.push_back(nodes[chain[i]].edge.target);
  }
  out.status = PlanStatus::kFeasible;
  out.length = nodes[best_goal].cost;
  out.path = std::move(path);
  return out;
}

}  // namespace splineplan
