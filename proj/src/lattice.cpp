#include "splineplan/lattice.hpp"

#include <chrono>
#include <cstring>
#include <queue>
#include <unordered_map>

#include "splineplan/dubins.hpp"
#include "splineplan/io.hpp"

namespace splineplan {

namespace {

LatticePrimitive make_primitive(const std::string& name, const GluingPoint& gp) {
  LatticePrimitive p;
  p.name = name;
  p.target = gp;
  p.seg = solve_segment<double>(0.0, gp);
  p.length = arc_length(p.seg);
  p.end = Pose2{gp.x, gp.y, std::atan(gp.dy)};
  for (int j = 0; j < kSamplesPerSegment; ++j) {
    const double x = p.seg.span * j / (kSamplesPerSegment - 1);
    const double d1 = poly_eval_d1(p.seg.coeffs, x);
    const double d2 = poly_eval_d2(p.seg.coeffs, x);
    p.max_kappa = std::max(p.max_kappa, std::abs(curvature_of(d1, d2)));
  }
  return p;
}

}  // namespace

std::vector<LatticePrimitive> default_lattice_primitives(double kappa_max) {
  // spans sized so the zero-end-curvature quintics stay under kappa_max
  std::vector<LatticePrimitive> out;
  out.push_back(make_primitive("straight", {5.0, 0.0, 0.0, 0.0}));
  out.push_back(make_primitive("offset_left_1", {6.0, 1.0, 0.0, 0.0}));
  out.push_back(make_primitive("offset_right_1", {6.0, -1.0, 0.0, 0.0}));
  out.push_back(make_primitive("offset_left_2", {8.0, 2.0, 0.0, 0.0}));
  out.push_back(make_primitive("offset_right_2", {8.0, -2.0, 0.0, 0.0}));
  const auto turn = [&](const char* name, double radius, double dth) {
    const double x = radius * std::sin(std::abs(dth));
    const double y = radius * (1.0 - std::cos(dth)) * (dth > 0 ? 1.0 : -1.0);
    out.push_back(make_primitive(name, {x, y, std::tan(dth), 0.0}));
  };
  turn("turn_left_22", 9.0, kPi / 8);
  turn("turn_right_22", 9.0, -kPi / 8);
  turn("turn_left_45", 12.5, kPi / 4);
  turn("turn_right_45", 12.5, -kPi / 4);
  for (const auto& p : out)
    if (p.max_kappa > kappa_max)
      throw ConfigError("lattice primitive " + p.name + " violates kappa_max");
  return out;
}

void save_lattice_primitives(const std::string& path,
                             std::span<const LatticePrimitive> prims) {
  Json arr = Json::array();
  for (const auto& p : prims) {
    Json coeffs = Json::array();
    for (double c : p.seg.coeffs) coeffs.push_back(c);
    arr.push_back(Json{{"name", p.name},
                       {"target", Json::array({p.target.x, p.target.y, p.target.dy,
                                               p.target.ddy})},
                       {"coeffs", coeffs},
                       {"span", p.seg.span}});
  }
  write_text_file(path, Json{{"format", "splineplan-primitives"}, {"version", 1},
                             {"primitives", arr}}
                            .dump(2));
}

std::vector<LatticePrimitive> load_lattice_primitives(const std::string& path) {
  const Json j = load_json_file(path);
  if (j.value("format", "") != "splineplan-primitives")
    throw ConfigError("not a primitive file: " + path);
  std::vector<LatticePrimitive> out;
  for (const auto& pj : j.at("primitives")) {
    const auto& t = pj.at("target");
    LatticePrimitive p = make_primitive(
        pj.at("name").get<std::string>(),
        {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>(),
         t.at(3).get<double>()});
    // stored coefficients double as a consistency check of the solve
    for (int i = 0; i < 6; ++i) {
      const double want = pj.at("coeffs").at(i).get<double>();
      if (std::abs(p.seg.coeffs[i] - want) > 1e-9)
        throw ConfigError("primitive file disagrees with the solver: " + p.name);
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

struct LatticeNode {
  Pose2 pose;
  int parent = -1;
  int prim = -1;  // primitive index on the incoming edge
  double g = 0.0;
};

struct QueueItem {
  double f;
  int seq;  // deterministic tie-break
  int node;
  bool operator<(const QueueItem& o) const {
    if (f != o.f) return f > o.f;  // min-heap
    return seq > o.seq;
  }
};

// collision check of a primitive applied at `from`
bool primitive_clear(const LatticePrimitive& p, const Pose2& from, const FreeSpace& fs,
                     const VehicleParams& vp) {
  const double c = std::cos(from.heading), s = std::sin(from.heading);
  for (int j = 0; j < kSamplesPerSegment; ++j) {
    const double x = p.seg.span * j / (kSamplesPerSegment - 1);
    const double y = poly_eval(p.seg.coeffs, x);
    const double d1 = poly_eval_d1(p.seg.coeffs, x);
    const Pose2 pose{from.position.x + c * x - s * y, from.position.y + s * x + c * y,
                     from.heading + std::atan(d1)};
    if (!footprint_in_freespace(fs, pose, vp)) return false;
  }
  return true;
}

// exact quintic join to qd (shared geometry with the RRT* extend)
std::optional<std::pair<QuinticSegment, double>> snap_to_goal(const Pose2& from,
                                                              const Pose2& qd,
                                                              const FreeSpace& fs,
                                                              const VehicleParams& vp) {
  const Vec2 local = from.to_local(qd.position);
  if (local.x < 0.3) return std::nullopt;
  const double dth = wrap_angle(qd.heading - from.heading);
  if (std::abs(dth) > 0.45 * kPi) return std::nullopt;
  QuinticSegment seg;
  try {
    seg = solve_segment<double>(0.0, {local.x, local.y, std::tan(dth), 0.0});
  } catch (const SolveError&) {
    return std::nullopt;
  }
  seg.frame = {{from.position.x, from.position.y}, from.heading};
  const double c = std::cos(from.heading), s = std::sin(from.heading);
  for (int j = 0; j < kSamplesPerSegment; ++j) {
    const double x = seg.span * j / (kSamplesPerSegment - 1);
    const double d1 = poly_eval_d1(seg.coeffs, x);
    const double d2 = poly_eval_d2(seg.coeffs, x);
    if (std::abs(curvature_of(d1, d2)) > vp.kappa_max) return std::nullopt;
    const double y = poly_eval(seg.coeffs, x);
    const Pose2 pose{from.position.x + c * x - s * y, from.position.y + s * x + c * y,
                     from.heading + std::atan(d1)};
    if (!footprint_in_freespace(fs, pose, vp)) return std::nullopt;
  }
  return std::make_pair(seg, arc_length(seg));
}

}  // namespace

PlanResult lattice_astar(const PlanningTask& task, const VehicleParams& vehicle,
                         const LatticeConfig& cfg) {
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

  const std::vector<LatticePrimitive> prims =
      cfg.primitives.empty() ? default_lattice_primitives(vehicle.kappa_max)
                             : cfg.primitives;
  const double radius = vehicle.min_turn_radius();
  const auto heuristic = [&](const Pose2& p) {
    return cfg.heuristic_weight * dubins_distance(p, task.qd, radius);
  };

  // state key anchored at q0's heading
  const auto grid_lo = task.fs.bounding_box().first;
  const auto key_of = [&](const Pose2& p) -> uint64_t {
    if (cfg.exact_states) {
      uint64_t h = 0xcbf29ce484222325ull;
      const auto mix = [&](double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        h = (h ^ bits) * 0x100000001b3ull;
      };
      mix(p.position.x);
      mix(p.position.y);
      mix(p.heading);
      return h;
    }
    const int64_t ix =
        static_cast<int64_t>(std::floor((p.position.x - grid_lo.x) / cfg.grid_resolution));
    const int64_t iy =
        static_cast<int64_t>(std::floor((p.position.y - grid_lo.y) / cfg.grid_resolution));
    const double rel = wrap_angle(p.heading - task.q0.heading);
    int ith = static_cast<int>(std::llround(rel / (2.0 * kPi / cfg.heading_bins)));
    ith = ((ith % cfg.heading_bins) + cfg.heading_bins) % cfg.heading_bins;
    return (static_cast<uint64_t>(ix & 0xffffff) << 40) |
           (static_cast<uint64_t>(iy & 0xffffff) << 16) |
           static_cast<uint64_t>(ith);
  };

  std::vector<LatticeNode> nodes;
  nodes.push_back({task.q0, -1, -1, 0.0});
  std::priority_queue<QueueItem> open;
  open.push({heuristic(task.q0), 0, 0});
  std::unordered_map<uint64_t, double> closed;
  int seq = 1;

  int goal_parent = -1;
  QuinticSegment goal_seg;
  double goal_cost = std::numeric_limits<double>::infinity();

  int expansions = 0;
  bool budget_hit = false;
  while (!open.empty()) {
    if (expansions >= cfg.max_expansions) {
      budget_hit = true;
      break;
    }
    if (cfg.max_time > 0.0 && (expansions & 63) == 0 && elapsed() > cfg.max_time) {
      budget_hit = true;
      break;
    }
    const QueueItem item = open.top();
    open.pop();
    // nothing left in the frontier can beat the goal candidate
    if (item.f >= goal_cost - 1e-12) break;
    const LatticeNode node = nodes[item.node];
    const uint64_t key = key_of(node.pose);
    const auto it = closed.find(key);
    if (it != closed.end() && it->second <= node.g + 1e-12) continue;
    closed[key] = node.g;
    ++expansions;

    // analytic goal join; keep the cheapest candidate, do not stop early
    if (dubins_distance(node.pose, task.qd, radius) <= cfg.snap_radius) {
      if (const auto snap = snap_to_goal(node.pose, task.qd, task.fs, vehicle);
          snap && node.g + snap->second < goal_cost) {
        goal_parent = item.node;
        goal_seg = snap->first;
        goal_cost = node.g + snap->second;
      }
    }

    for (size_t pi = 0; pi < prims.size(); ++pi) {
      const auto& p = prims[pi];
      if (!primitive_clear(p, node.pose, task.fs, vehicle)) continue;
      const double c = std::cos(node.pose.heading), s = std::sin(node.pose.heading);
      const Pose2 end{node.pose.position.x + c * p.end.position.x - s * p.end.position.y,
                      node.pose.position.y + s * p.end.position.x + c * p.end.position.y,
                      node.pose.heading + p.end.heading};
      const double g = node.g + p.length;
      const uint64_t ek = key_of(end);
      const auto cit = closed.find(ek);
      if (cit != closed.end() && cit->second <= g + 1e-12) continue;
      nodes.push_back({end, item.node, static_cast<int>(pi), g});
      open.push({g + heuristic(end), seq++, static_cast<int>(nodes.size()) - 1});
    }
  }

  out.wall_time = elapsed();
  if (goal_parent < 0) {
    out.status = budget_hit ? PlanStatus::kTimeout : PlanStatus::kInfeasible;
    return out;
  }

  std::vector<int> chain;
  for (int i = goal_parent; i >= 0; i = nodes[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());

  PathSpline path;
  path.q0 = task.q0;
  path.qd = task.qd;
  path.closed = true;
  for (size_t i = 1; i < chain.size(); ++i) {
    const auto& n = nodes[chain[i]];
    const auto& parent = nodes[chain[i - 1]];
    QuinticSegment seg = prims[n.prim].seg;
    seg.frame = {{parent.pose.position.x, parent.pose.position.y}, parent.pose.heading};
    path.segments.push_back(seg);
    path.gluing_points.push_back(prims[n.prim].target);
  }
  path.segments.push_back(goal_seg);
  out.status = PlanStatus::kFeasible;
  out.length = goal_cost;
  out.path = std::move(path);
  return out;
}

}  // namespace splineplan
