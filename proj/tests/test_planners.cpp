#include "splineplan/evaluator.hpp"

#include "doctest.h"
#include <cstring>
#include <map>
#include <queue>

#include "splineplan/io.hpp"
#include "test_util.hpp"

using namespace splineplan;
using namespace testutil;

namespace {

PlanningTask open_square_task(double side = 40.0, double separation = 10.0) {
  PlanningTask t;
  t.fs = FreeSpace({Quadrangle({Vec2{-side / 2, -side / 2}, Vec2{side / 2, -side / 2},
                                Vec2{side / 2, side / 2}, Vec2{-side / 2, side / 2}})});
  t.q0 = Pose2{-separation / 2, 0, 0};
  t.qd = Pose2{separation / 2, 0, 0};
  return t;
}

PlanningTask corridor_task(double length, double halfwidth, double separation) {
  PlanningTask t;
  t.fs = FreeSpace({Quadrangle({Vec2{-5, -halfwidth}, Vec2{length, -halfwidth},
                                Vec2{length, halfwidth}, Vec2{-5, halfwidth}})});
  t.q0 = Pose2{0, 0, 0};
  t.qd = Pose2{separation, 0, 0};
  return t;
}

}  // namespace

TEST_CASE("default lattice primitives: count, curvature bound, committed file") {
  const auto prims = default_lattice_primitives(0.22);
  REQUIRE(prims.size() == 9);
  for (const auto& p : prims) {
    CHECK(p.max_kappa <= 0.22);
    CHECK(p.length >= p.seg.span - 1e-9);
  }
  // the committed file stays in sync with the generator
  const auto loaded = load_lattice_primitives(std::string(SOURCE_DIR) + "/data/lattice_primitives.json");
  REQUIRE(loaded.size() == prims.size());
  for (size_t i = 0; i < prims.size(); ++i) {
    CHECK(loaded[i].name == prims[i].name);
    for (int c = 0; c < 6; ++c)
      CHECK(loaded[i].seg.coeffs[c] == doctest::Approx(prims[i].seg.coeffs[c]));
  }
}

TEST_CASE("lattice: straight corridor uses repeated straight primitives") {
  VehicleParams vp;
  const auto task = corridor_task(40.0, 3.0, 20.0);
  LatticeConfig cfg;
  const auto res = lattice_astar(task, vp, cfg);
  REQUIRE(res.status == PlanStatus::kFeasible);
  CHECK(res.length == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(path_feasible(*res.path, task.input(), vp));
  // admissibility: cost is at least the Dubins bound
  CHECK(res.length >= dubins_distance(task.q0, task.qd, vp.min_turn_radius()) - 1e-9);
}

TEST_CASE("lattice: A* cost equals an independent Dijkstra oracle") {
  VehicleParams vp;
  const double snap_radius = 9.0;
  PlanningTask t;
  t.fs = FreeSpace({Quadrangle(
      {Vec2{-5, -4}, Vec2{30, -4}, Vec2{30, 4}, Vec2{-5, 4}})});
  t.q0 = Pose2{0, -1, 0};
  t.qd = Pose2{14, 1, 0};

  // test-side snap rule mirroring the planner contract
  const auto snap_len = [&](const Pose2& from) -> double {
    const Vec2 local = from.to_local(t.qd.position);
    if (local.x < 0.3) return -1.0;
    const double dth = wrap_angle(t.qd.heading - from.heading);
    if (std::abs(dth) > 0.45 * kPi) return -1.0;
    if (dubins_distance(from, t.qd, vp.min_turn_radius()) > snap_radius) return -1.0;
    QuinticSegment seg;
    try {
      seg = solve_segment<double>(0.0, {local.x, local.y, std::tan(dth), 0.0});
    } catch (const SolveError&) {
      return -1.0;
    }
    const double c = std::cos(from.heading), s = std::sin(from.heading);
    for (int j = 0; j < kSamplesPerSegment; ++j) {
      const double x = seg.span * j / (kSamplesPerSegment - 1);
      const double d1 = poly_eval_d1(seg.coeffs, x);
      const double d2 = poly_eval_d2(seg.coeffs, x);
      if (std::abs(curvature_of(d1, d2)) > vp.kappa_max) return -1.0;
      const double y = poly_eval(seg.coeffs, x);
      const Pose2 pose{from.position.x + c * x - s * y,
                       from.position.y + s * x + c * y, from.heading + std::atan(d1)};
      if (!footprint_in_freespace(t.fs, pose, vp)) return -1.0;
    }
    return arc_length(seg);
  };

  // enumerate every primitive sequence up to a cost cap (bounded, exact
  // graph) and run a hand-rolled Dijkstra over it
  const auto prims = default_lattice_primitives(vp.kappa_max);
  const double cost_cap = 19.0;
  struct GNode {
    Pose2 pose;
    double g;
  };
  std::vector<GNode> graph{{t.q0, 0.0}};
  double oracle = std::numeric_limits<double>::infinity();
  std::map<std::tuple<int64_t, int64_t, int64_t>, double> seen;
  const auto key = [](const Pose2& p) {
    const auto q = [](double v) {
      int64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      return bits;
    };
    return std::make_tuple(q(p.position.x), q(p.position.y), q(p.heading));
  };
  std::priority_queue<std::pair<double, size_t>,
                      std::vector<std::pair<double, size_t>>, std::greater<>>
      pq;
  pq.push({0.0, 0});
  seen[key(t.q0)] = 0.0;
  while (!pq.empty()) {
    const auto [g, idx] = pq.top();
    pq.pop();
    const GNode node = graph[idx];
    if (g > node.g + 1e-12) continue;
    if (g >= oracle) break;
    if (const double sl = snap_len(node.pose); sl >= 0.0)
      oracle = std::min(oracle, g + sl);
    for (const auto& p : prims) {
      const double ng = g + p.length;
      if (ng > cost_cap) continue;
      const double c = std::cos(node.pose.heading), s = std::sin(node.pose.heading);
      bool clear = true;
      for (int j = 0; j < kSamplesPerSegment && clear; ++j) {
        const double x = p.seg.span * j / (kSamplesPerSegment - 1);
        const double y = poly_eval(p.seg.coeffs, x);
        const double d1 = poly_eval_d1(p.seg.coeffs, x);
        const Pose2 pose{node.pose.position.x + c * x - s * y,
                         node.pose.position.y + s * x + c * y,
                         node.pose.heading + std::atan(d1)};
        clear = footprint_in_freespace(t.fs, pose, vp);
      }
      if (!clear) continue;
      const Pose2 end{
          node.pose.position.x + c * p.end.position.x - s * p.end.position.y,
          node.pose.position.y + s * p.end.position.x + c * p.end.position.y,
          node.pose.heading + p.end.heading};
      const auto k = key(end);
      const auto it = seen.find(k);
      if (it != seen.end() && it->second <= ng + 1e-12) continue;
      seen[k] = ng;
      graph.push_back({end, ng});
      pq.push({ng, graph.size() - 1});
    }
  }
  REQUIRE(std::isfinite(oracle));

  LatticeConfig astar;
  astar.exact_states = true;
  astar.snap_radius = snap_radius;
  const auto a = lattice_astar(t, vp, astar);
  LatticeConfig dijkstra = astar;
  dijkstra.heuristic_weight = 0.0;
  const auto d = lattice_astar(t, vp, dijkstra);
  REQUIRE(a.status == PlanStatus::kFeasible);
  REQUIRE(d.status == PlanStatus::kFeasible);
  CHECK(a.length == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(d.length == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(path_feasible(*a.path, t.input(), vp));
}

TEST_CASE("lattice: blocked corridor is infeasible") {
  VehicleParams vp;
  const auto task = corridor_task(40.0, 0.6, 20.0);  // narrower than the car
  LatticeConfig cfg;
  cfg.max_expansions = 3000;
  const auto res = lattice_astar(task, vp, cfg);
  CHECK(res.status == PlanStatus::kInfeasible);
}

TEST_CASE("rrt*: immediate rejection when an endpoint footprint collides") {
  VehicleParams vp;
  auto task = corridor_task(40.0, 3.0, 20.0);
  task.q0 = Pose2{0, 2.8, 0};  // footprint pokes out of the corridor
  RrtStarConfig cfg;
  const auto res = rrt_star(task, vp, cfg);
  CHECK(res.status == PlanStatus::kInfeasible);
  CHECK(res.wall_time < 1.0);
}

TEST_CASE("rrt*: open-space trials succeed quickly and validate") {
  VehicleParams vp;
  const auto task = open_square_task();
  int ok = 0;
  for (int seed = 0; seed < 20; ++seed) {
    RrtStarConfig cfg;
    cfg.seed = seed;
    cfg.max_time = 10.0;
    const auto res = rrt_star(task, vp, cfg);
    if (res.status != PlanStatus::kFeasible) continue;
    if (!path_feasible(*res.path, task.input(), vp)) continue;
    CHECK(res.wall_time < 10.0);
    ++ok;
  }
  CHECK(ok >= 16);  // >= 80% of 20 seeded trials
}

TEST_CASE("rrt*: deterministic for a fixed seed") {
  VehicleParams vp;
  const auto task = open_square_task();
  RrtStarConfig cfg;
  cfg.seed = 7;
  const auto a = rrt_star(task, vp, cfg);
  const auto b = rrt_star(task, vp, cfg);
  REQUIRE(a.status == PlanStatus::kFeasible);
  REQUIRE(b.status == PlanStatus::kFeasible);
  REQUIRE(a.path->segments.size() == b.path->segments.size());
  for (size_t i = 0; i < a.path->segments.size(); ++i)
    for (int c = 0; c < 6; ++c)
      CHECK(a.path->segments[i].coeffs[c] == b.path->segments[i].coeffs[c]);
  CHECK(a.length == b.length);
}

TEST_CASE("rrt*: anytime cost checkpoints never increase") {
  VehicleParams vp;
  const auto task = open_square_task(40.0, 16.0);
  RrtStarConfig cfg;
  cfg.seed = 3;
  cfg.anytime = true;
  cfg.max_iterations = 900;
  cfg.checkpoint_every = 100;
  const auto res = rrt_star(task, vp, cfg);
  REQUIRE(res.status == PlanStatus::kFeasible);
  REQUIRE(res.cost_checkpoints.size() >= 3);
  for (size_t i = 1; i < res.cost_checkpoints.size(); ++i)
    CHECK(res.cost_checkpoints[i] <= res.cost_checkpoints[i - 1] + 1e-12);
}

TEST_CASE("evaluate: rows, summary, and relative lengths") {
  VehicleParams vp;
  std::vector<PlanningTask> tasks;
  tasks.push_back(corridor_task(40.0, 3.0, 20.0));
  tasks.push_back(corridor_task(45.0, 3.2, 26.0));
  tasks.push_back(corridor_task(40.0, 0.6, 20.0));  // infeasible corridor

  std::vector<PlannerEntry> planners;
  LatticeConfig lat;
  lat.max_expansions = 5000;
  planners.push_back({"lattice", [&, lat](const PlanningTask& t) {
                        return lattice_astar(t, vp, lat);
                      }});
  RrtStarConfig rrt;
  rrt.seed = 5;
  planners.push_back(
      {"rrtstar", [&, rrt](const PlanningTask& t) { return rrt_star(t, vp, rrt); }});

  EvaluateOptions opts;
  opts.record_wall_time = false;
  const auto report = evaluate(tasks, planners, vp, opts);
  REQUIRE(report.rows.size() == 6);
  REQUIRE(report.summaries.size() == 2);
  for (const auto& s : report.summaries) {
    CHECK(s.tasks == 3);
    CHECK(s.accuracy >= 0.0);
    CHECK(s.accuracy <= 1.0);
    CHECK(s.feasible == 2);  // the narrow corridor defeats both planners
  }
  for (const auto& r : report.rows) {
    if (r.planner == "lattice" && r.status == PlanStatus::kFeasible) {
      CHECK(r.has_length_vs_sl);
      CHECK(r.length_vs_sl == doctest::Approx(100.0));
    }
    CHECK(r.time == 0.0);  // timing off writes zeros
  }

  const std::string csv = eval_rows_csv(report, "config_hash=x seed=1");
  CHECK(csv.find("task_id,planner,status") != std::string::npos);
  const Json summary = eval_summary_json(report);
  CHECK(summary.at("planners").size() == 2);
}

TEST_CASE("heatmap: deterministic cells with sane counts") {
  VehicleParams vp;
  const auto model = PlannerModel::init(2);
  HeatmapSpec spec;
  spec.environment = FreeSpace({Quadrangle(
      {Vec2{-2, -4}, Vec2{40, -4}, Vec2{40, 4}, Vec2{-2, 4}})});
  spec.qd = Pose2{36, 0, 0};
  spec.resolution = 2.0;
  spec.orientation_bins = 8;
  const auto cells = heatmap(spec, model, vp);
  REQUIRE(!cells.empty());
  for (const auto& c : cells) {
    CHECK(c.count >= 0);
    CHECK(c.count <= 8);
    CHECK(c.count == __builtin_popcountll(c.mask));
  }
  const auto cells2 = heatmap(spec, model, vp);
  REQUIRE(cells2.size() == cells.size());
  for (size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].count == cells2[i].count);
    CHECK(cells[i].mask == cells2[i].mask);
  }
}
