#include "splineplan/scenario.hpp"

#include <algorithm>

namespace splineplan {

const char* kind_name(ManeuverKind k) {
  switch (k) {
    case ManeuverKind::kOvertaking:
      return "overtaking";
    case ManeuverKind::kPerpendicular:
      return "perpendicular_parking";
    case ManeuverKind::kOblique:
      return "oblique_parking";
  }
  return "unknown";
}

ManeuverKind kind_from_name(const std::string& name) {
  if (name == "overtaking") return ManeuverKind::kOvertaking;
  if (name == "perpendicular_parking" || name == "perpendicular")
    return ManeuverKind::kPerpendicular;
  if (name == "oblique_parking" || name == "oblique") return ManeuverKind::kOblique;
  throw ConfigError("unknown maneuver kind: " + name);
}

ScenarioTemplate ScenarioTemplate::defaults(ManeuverKind kind) {
  ScenarioTemplate t;
  t.kind = kind;
  if (kind == ManeuverKind::kOblique) {
    t.bay_angle = 55.0 * kPi / 180.0;
    t.bay_angle_jitter = 25.0 * kPi / 180.0;
    t.bay_depth = 6.8;
  }
  return t;
}

namespace {

constexpr double kSeamOverlap = 0.3;  // meters, quads overlap across seams

Quadrangle axis_rect(double x0, double x1, double y0, double y1) {
  return Quadrangle({Vec2{x0, y0}, Vec2{x1, y0}, Vec2{x1, y1}, Vec2{x0, y1}});
}

double jittered(Rng& rng, double base, double jitter, double floor) {
  return std::max(floor, base + rng.uniform(-jitter, jitter));
}

ScenarioEnv build_overtaking(const ScenarioTemplate& tpl, Rng& rng) {
  ScenarioEnv env;
  const double L = jittered(rng, tpl.road_length, tpl.road_length_jitter, 34.0);
  const double W = jittered(rng, tpl.road_width, tpl.road_width_jitter, 6.6);
  const double x1 = rng.uniform(0.38, 0.47) * L;
  double lo = jittered(rng, tpl.obstacle_length, tpl.obstacle_length_jitter, 3.0);
  lo = std::min(lo, L - x1 - 12.2);  // keep room for the goal region
  double h = jittered(rng, tpl.obstacle_depth, tpl.obstacle_depth_jitter, 2.0);
  h = std::min(h, W - 3.4);  // keep the corridor beside the obstacle drivable
  if (lo < 3.0 || h < 1.6) throw ConfigError("degenerate overtaking layout");

  env.fs = FreeSpace({axis_rect(0, x1, 0, W),
                      axis_rect(x1 - kSeamOverlap, x1 + lo + kSeamOverlap, h, W),
                      axis_rect(x1 + lo, L, 0, W)});
  const double th = 8.0 * kPi / 180.0;
  env.q0_box = {2.5, x1 - 9.5, 1.1, h - 0.15, -th, th};
  env.qd_box = {x1 + lo + 9.5, L - 2.5, 1.1, h - 0.15, -th, th};
  return env;
}

// Parking bay below the road edge; `angle` is measured from the road axis
// (pi/2 = perpendicular). The bay's long axis points down-forward.
ScenarioEnv build_parking(const ScenarioTemplate& tpl, Rng& rng, double angle) {
  ScenarioEnv env;
  const double L = jittered(rng, tpl.road_length, tpl.road_length_jitter, 30.0);
  const double W = jittered(rng, tpl.road_width, tpl.road_width_jitter, 7.2);
  const double bw = jittered(rng, tpl.bay_width, tpl.bay_width_jitter, 3.0);
  const double bd = jittered(rng, tpl.bay_depth, tpl.bay_depth_jitter, 5.8);
  const double xb = rng.uniform(0.55, 0.72) * L;

  const Vec2 d{std::cos(-angle), std::sin(-angle)};  // into the bay
  const Vec2 n{-d.y, d.x};
  const Vec2 mouth{xb, kSeamOverlap};
  const Vec2 a = mouth + (-0.5 * bw) * n;
  const Vec2 b = mouth + (0.5 * bw) * n;
  env.fs = FreeSpace(
      {axis_rect(0, L, 0, W), Quadrangle({a, a + bd * d, b + bd * d, b})});

  env.bay_mouth_x = xb;
  env.bay_angle = angle;
  // guiding point depth along the bay axis: keep the nose clear of the bay
  // end and the tail near the mouth
  env.qd_depth_hi = bd - kSeamOverlap - 3.375 - 0.4;
  env.qd_depth_lo = std::max(1.0, env.qd_depth_hi - 1.2);
  env.qd_heading_jitter = 4.0 * kPi / 180.0;
  if (env.qd_depth_hi <= env.qd_depth_lo)
    throw ConfigError("degenerate parking layout");
  env.q0_box = {std::max(2.5, xb - 19.0), xb - 5.0, 1.3, W - 1.2,
                -10.0 * kPi / 180.0, 10.0 * kPi / 180.0};
  return env;
}

}  // namespace

Pose2 sample_q0(const ScenarioEnv& env, Rng& rng) {
  const auto& b = env.q0_box;
  return env.to_world(Pose2{rng.uniform(b.x_lo, b.x_hi), rng.uniform(b.y_lo, b.y_hi),
                            rng.uniform(b.th_lo, b.th_hi)});
}

Pose2 sample_qd(const ScenarioEnv& env, Rng& rng) {
  if (env.kind == ManeuverKind::kOvertaking) {
    const auto& b = env.qd_box;
    return env.to_world(Pose2{rng.uniform(b.x_lo, b.x_hi), rng.uniform(b.y_lo, b.y_hi),
                              rng.uniform(b.th_lo, b.th_hi)});
  }
  const double t = rng.uniform(env.qd_depth_lo, env.qd_depth_hi);
  const Vec2 d{std::cos(-env.bay_angle), std::sin(-env.bay_angle)};
  const Vec2 p = Vec2{env.bay_mouth_x, kSeamOverlap} + t * d;
  const double th =
      -env.bay_angle + rng.uniform(-env.qd_heading_jitter, env.qd_heading_jitter);
  return env.to_world(Pose2{p.x, p.y, th});
}

ScenarioEnv make_env(const ScenarioTemplate& tpl, Rng& rng, int env_id) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    try {
      ScenarioEnv env;
      switch (tpl.kind) {
        case ManeuverKind::kOvertaking:
          env = build_overtaking(tpl, rng);
          break;
        case ManeuverKind::kPerpendicular:
          env = build_parking(tpl, rng, kPi / 2);
          break;
        case ManeuverKind::kOblique: {
          const double angle =
              tpl.bay_angle + rng.uniform(-tpl.bay_angle_jitter, tpl.bay_angle_jitter);
          env = build_parking(tpl, rng, angle);
          break;
        }
      }
      env.kind = tpl.kind;
      env.env_id = env_id;
      env.world_angle = rng.uniform(-kPi, kPi);
      env.world_shift = {rng.uniform(-15.0, 15.0), rng.uniform(-15.0, 15.0)};
      std::vector<Quadrangle> quads;
      const double c = std::cos(env.world_angle), s = std::sin(env.world_angle);
      for (const auto& q : env.fs.quads) {
        std::array<Vec2, 4> v;
        for (int i = 0; i < 4; ++i) {
          const Vec2 p = q.vertex(i);
          v[i] = {c * p.x - s * p.y + env.world_shift.x,
                  s * p.x + c * p.y + env.world_shift.y};
        }
        quads.push_back(Quadrangle(v));
      }
      env.fs = FreeSpace(quads);
      return env;
    } catch (const ConfigError&) {
      // degenerate jitter outcome; resample
    }
  }
  throw ConfigError("environment instantiation kept producing degenerate geometry");
}

namespace {

struct AdmissionWindow {
  int64_t attempts = 0;
  int64_t admits = 0;
  void check() const {
    if (attempts >= 2000 && admits * 100 < attempts)
      throw ConfigError("task admission rate fell below 1% (" +
                        std::to_string(admits) + "/" + std::to_string(attempts) +
                        "); check scenario geometry");
  }
};

}  // namespace

Dataset generate_dataset(const GenerateConfig& cfg, uint64_t seed) {
  Dataset out;
  Rng master(seed);
  int env_counter = 0;
  AdmissionWindow window;

  const int nkinds = static_cast<int>(cfg.kinds.size());
  if (nkinds == 0) throw ConfigError("generate: need at least one maneuver kind");

  std::vector<std::vector<ScenarioEnv>> train_envs(nkinds);

  const auto admit_pair = [&](const ScenarioEnv& env, Rng& rng, PlanningTask& task) {
    for (int a = 0; a < cfg.max_pair_attempts; ++a) {
      window.attempts += 1;
      window.check();
      const Pose2 q0 = sample_q0(env, rng);
      const Pose2 qd = sample_qd(env, rng);
      if (!footprint_in_freespace(env.fs, q0, cfg.vehicle)) continue;
      if (!footprint_in_freespace(env.fs, qd, cfg.vehicle)) continue;
      if (!dubins_feasible(env.fs, q0, qd, cfg.vehicle, cfg.dubins)) continue;
      task = {env.env_id, env.kind, env.fs, q0, qd};
      window.admits += 1;
      return true;
    }
    return false;
  };

  const auto fill_split = [&](int split, std::vector<PlanningTask>& tasks) {
    for (int k = 0; k < nkinds; ++k) {
      const int quota =
          cfg.counts[split] / nkinds + (k < cfg.counts[split] % nkinds ? 1 : 0);
      if (quota == 0) continue;
      const ScenarioTemplate tpl = ScenarioTemplate::defaults(cfg.kinds[k]);
      const int n_envs = std::max(1, (quota + cfg.pairs_per_env - 1) / cfg.pairs_per_env);

      const auto fresh_env = [&]() {
        Rng env_rng = master.fork(1000 + env_counter);
        return make_env(tpl, env_rng, env_counter++);
      };

      std::vector<ScenarioEnv> local_pool;
      if (split == 0) {
        while (static_cast<int>(train_envs[k].size()) < n_envs)
          train_envs[k].push_back(fresh_env());
      } else if (split == 2) {
        for (int i = 0; i < n_envs; ++i) local_pool.push_back(fresh_env());
      } else {
        const int fresh = train_envs[k].empty()
                              ? n_envs
                              : std::max(1, static_cast<int>(std::round(
                                                n_envs * cfg.val_fresh_env_fraction)));
        for (int i = 0; i < fresh; ++i) local_pool.push_back(fresh_env());
      }

      for (int j = 0; j < quota; ++j) {
        // validation tasks reuse training environments except every fifth
        const bool fresh_source = split == 2 || (split == 1 && (train_envs[k].empty() ||
                                                                 j % 5 == 4));
        std::vector<ScenarioEnv>& source =
            (split == 0) ? train_envs[k] : (fresh_source ? local_pool : train_envs[k]);

        PlanningTask task;
        bool served = false;
        for (int env_try = 0; env_try < cfg.max_env_attempts && !served; ++env_try) {
          ScenarioEnv& env = source[(j + env_try) % source.size()];
          Rng pair_rng =
              master.fork(7000000 + 1000003ull * split + 10007ull * k + 101ull * j +
                          static_cast<uint64_t>(env_try));
          served = admit_pair(env, pair_rng, task);
          if (!served && env_try + 1 >= static_cast<int>(source.size()))
            source[(j + env_try) % source.size()] = fresh_env();
        }
        if (!served)
          throw ConfigError("could not admit a task after redrawing environments");
        tasks.push_back(std::move(task));
      }
    }
  };

  fill_split(0, out.train);
  fill_split(1, out.val);
  fill_split(2, out.test);
  return out;
}

}  // namespace splineplan
