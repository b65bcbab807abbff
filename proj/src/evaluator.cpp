#include "splineplan/evaluator.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "splineplan/io.hpp"

namespace splineplan {

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= xs.size();
  return {mean, std::sqrt(var)};
}

}  // namespace

EvalReport evaluate(std::span<const PlanningTask> tasks,
                    std::span<const PlannerEntry> planners,
                    const VehicleParams& vehicle, const EvaluateOptions& opts) {
  EvalReport report;
  std::map<std::pair<int, std::string>, double> sl_lengths;

  for (const auto& planner : planners) {
    for (size_t ti = 0; ti < tasks.size(); ++ti) {
      const auto& task = tasks[ti];
      EvalRow row;
      row.task_id = static_cast<int>(ti);
      row.planner = planner.name;
      const auto t0 = std::chrono::steady_clock::now();
      PlanResult res;
      try {
        res = planner.plan(task);
      } catch (const std::exception&) {
        res.status = PlanStatus::kInfeasible;  // planner crash counts as a miss
      }
      row.time = opts.record_wall_time
                     ? std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                     t0)
                           .count()
                     : 0.0;
      row.status = res.status;
      if (res.status == PlanStatus::kFeasible) {
        if (res.path &&
            path_feasible(*res.path, task.input(), vehicle, opts.validator)) {
          row.length = res.length;
          if (planner.name == "lattice")
            sl_lengths[{row.task_id, "sl"}] = res.length;
        } else {
          row.status = PlanStatus::kInfeasible;  // defensive re-validation
        }
      }
      report.rows.push_back(std::move(row));
    }
  }

  for (auto& row : report.rows) {
    if (row.status != PlanStatus::kFeasible) continue;
    const auto it = sl_lengths.find({row.task_id, "sl"});
    if (it != sl_lengths.end() && it->second > 0.0) {
      row.length_vs_sl = 100.0 * row.length / it->second;
      row.has_length_vs_sl = true;
    }
  }

  for (const auto& planner : planners) {
    PlannerSummary s;
    s.planner = planner.name;
    std::vector<double> times, rels;
    for (const auto& row : report.rows) {
      if (row.planner != planner.name) continue;
      s.tasks += 1;
      if (row.status == PlanStatus::kFeasible) {
        s.feasible += 1;
        times.push_back(row.time);
        if (row.has_length_vs_sl) rels.push_back(row.length_vs_sl);
      }
    }
    s.accuracy = s.tasks ? static_cast<double>(s.feasible) / s.tasks : 0.0;
    std::tie(s.time_mean, s.time_std) = mean_std(times);
    std::tie(s.rel_length_mean, s.rel_length_std) = mean_std(rels);
    s.rel_length_count = static_cast<int>(rels.size());
    report.summaries.push_back(std::move(s));
  }
  return report;
}

std::string eval_rows_csv(const EvalReport& report, const std::string& meta_line) {
  std::ostringstream out;
  out << "# " << meta_line << "\n";
  out << "task_id,planner,status,time_s,length_m,length_vs_sl_pct\n";
  char buf[160];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,%.6f,", r.task_id, r.planner.c_str(),
                  plan_status_name(r.status), r.time);
    out << buf;
    if (r.status == PlanStatus::kFeasible) {
      std::snprintf(buf, sizeof(buf), "%.6f,", r.length);
      out << buf;
    } else {
      out << ",";
    }
    if (r.has_length_vs_sl) {
      std::snprintf(buf, sizeof(buf), "%.4f", r.length_vs_sl);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

Json eval_summary_json(const EvalReport& report) {
  Json planners = Json::array();
  for (const auto& s : report.summaries) {
    planners.push_back(Json{{"planner", s.planner},
                            {"tasks", s.tasks},
                            {"feasible", s.feasible},
                            {"accuracy", s.accuracy},
                            {"time_mean_s", s.time_mean},
                            {"time_std_s", s.time_std},
                            {"length_vs_sl_mean_pct", s.rel_length_mean},
                            {"length_vs_sl_std_pct", s.rel_length_std},
                            {"length_vs_sl_count", s.rel_length_count}});
  }
  return Json{{"planners", planners}};
}

std::vector<HeatmapCell> heatmap(const HeatmapSpec& spec, const PlannerModel& model,
                                 const VehicleParams& vehicle) {
  if (spec.orientation_bins < 1 || spec.orientation_bins > 64)
    throw ConfigError("heatmap orientation bins must be in 1..64");
  std::vector<HeatmapCell> cells;
  const auto [lo, hi] = spec.environment.bounding_box();
  for (double x = lo.x + 0.5 * spec.resolution; x < hi.x; x += spec.resolution) {
    for (double y = lo.y + 0.5 * spec.resolution; y < hi.y; y += spec.resolution) {
      if (!spec.environment.contains({x, y})) continue;
      HeatmapCell cell;
      cell.x = x;
      cell.y = y;
      for (int b = 0; b < spec.orientation_bins; ++b) {
        const double th = -kPi + (2.0 * kPi * b) / spec.orientation_bins;
        const Pose2 q0{x, y, th};
        if (!footprint_in_freespace(spec.environment, q0, vehicle)) continue;
        const TaskInput task{q0, spec.qd, &spec.environment};
        const auto res = rollout<double>(task, model.weights, nullptr);
        if (!res.assembled.final_ok) continue;
        if (!path_feasible(res.assembled.path, task, vehicle)) continue;
        cell.count += 1;
        cell.mask |= (uint64_t{1} << b);
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

std::string heatmap_csv(std::span<const HeatmapCell> cells,
                        const std::string& meta_line) {
  std::ostringstream out;
  out << "# " << meta_line << "\n";
  out << "x,y,count,orientation_mask\n";
  char buf[120];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%d,%llx\n", c.x, c.y, c.count,
                  static_cast<unsigned long long>(c.mask));
    out << buf;
  }
  return out.str();
}

}  // namespace splineplan
