#include "splineplan/io.hpp"

#include <fstream>
#include <sstream>

namespace splineplan {

std::string config_hash(const Json& j) {
  const std::string dump = j.dump();
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json RunMeta::to_json() const {
  return Json{{"config_hash", config_hash}, {"seed", seed}};
}

Json quad_to_json(const Quadrangle& q) {
  Json out = Json::array();
  for (const auto& v : q.vertices()) out.push_back(Json::array({v.x, v.y}));
  return out;
}

Quadrangle quad_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4)
    throw ConfigError("quadrangle: expected 4 [x,y] pairs");
  std::array<Vec2, 4> v;
  for (int i = 0; i < 4; ++i)
    v[i] = {j[i].at(0).get<double>(), j[i].at(1).get<double>()};
  return Quadrangle(v);
}

Json pose_to_json(const Pose2& p) {
  return Json::array({p.position.x, p.position.y, p.heading});
}

Pose2 pose_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("pose: expected [x, y, theta]");
  return Pose2{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json task_to_json(const PlanningTask& t) {
  Json quads = Json::array();
  for (const auto& q : t.fs.quads) quads.push_back(quad_to_json(q));
  return Json{{"env_id", t.env_id},
              {"kind", kind_name(t.kind)},
              {"quads", quads},
              {"q0", pose_to_json(t.q0)},
              {"qd", pose_to_json(t.qd)}};
}

PlanningTask task_from_json(const Json& j) {
  std::vector<Quadrangle> quads;
  for (const auto& q : j.at("quads")) quads.push_back(quad_from_json(q));
  PlanningTask t;
  t.env_id = j.at("env_id").get<int>();
  t.kind = kind_from_name(j.at("kind").get<std::string>());
  t.fs = FreeSpace(std::move(quads));
  t.q0 = pose_from_json(j.at("q0"));
  t.qd = pose_from_json(j.at("qd"));
  return t;
}

void write_tasks_jsonl(const std::string& path, std::span<const PlanningTask> tasks,
                       const RunMeta& meta) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << Json{{"meta", meta.to_json()}, {"count", tasks.size()}}.dump() << "\n";
  for (const auto& t : tasks) out << task_to_json(t).dump() << "\n";
}

std::vector<PlanningTask> read_tasks_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path);
  std::vector<PlanningTask> tasks;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    if (first && j.contains("meta")) {
      first = false;
      continue;
    }
    first = false;
    tasks.push_back(task_from_json(j));
  }
  return tasks;
}

Json path_to_json(const PathSpline& path, const RunMeta& meta) {
  Json gps = Json::array();
  for (const auto& gp : path.gluing_points)
    gps.push_back(Json::array({gp.x, gp.y, gp.dy, gp.ddy}));
  Json segs = Json::array();
  for (const auto& seg : path.segments) {
    Json coeffs = Json::array();
    for (double c : seg.coeffs) coeffs.push_back(c);
    segs.push_back(Json{{"coeffs", coeffs},
                        {"span", seg.span},
                        {"frame", Json::array({seg.frame.position.x,
                                               seg.frame.position.y,
                                               seg.frame.heading})}});
  }
  return Json{{"meta", meta.to_json()},
              {"q0", pose_to_json(path.q0)},
              {"qd", pose_to_json(path.qd)},
              {"gluing_points", gps},
              {"segments", segs},
              {"closed", path.closed}};
}

PathSpline path_from_json(const Json& j) {
  PathSpline p;
  p.q0 = pose_from_json(j.at("q0"));
  p.qd = pose_from_json(j.at("qd"));
  for (const auto& g : j.at("gluing_points"))
    p.gluing_points.push_back(
        {g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>(),
         g.at(3).get<double>()});
  for (const auto& s : j.at("segments")) {
    QuinticSegment seg;
    for (int i = 0; i < 6; ++i) seg.coeffs[i] = s.at("coeffs").at(i).get<double>();
    seg.span = s.at("span").get<double>();
    const auto& f = s.at("frame");
    seg.frame = {{f.at(0).get<double>(), f.at(1).get<double>()}, f.at(2).get<double>()};
    p.segments.push_back(seg);
  }
  p.closed = j.value("closed", true);
  return p;
}

void save_model(const std::string& path, const PlannerModel& model, const RunMeta& meta) {
  Json layers = Json::array();
  for (const auto& l : model_layers())
    layers.push_back(Json{{"name", l.name}, {"in", l.in}, {"out", l.out}});
  Json j{{"format", "splineplan-model"},
         {"version", 1},
         {"meta", meta.to_json()},
         {"layers", layers},
         {"weights", model.weights}};
  write_text_file(path, j.dump());
}

PlannerModel load_model(const std::string& path) {
  const Json j = load_json_file(path);
  if (j.value("format", "") != "splineplan-model")
    throw ConfigError("not a model checkpoint: " + path);
  const auto& layers = j.at("layers");
  const auto specs = model_layers();
  if (layers.size() != specs.size())
    throw ConfigError("checkpoint layer count mismatch in " + path);
  for (size_t i = 0; i < specs.size(); ++i) {
    if (layers[i].at("in").get<int>() != specs[i].in ||
        layers[i].at("out").get<int>() != specs[i].out)
      throw ConfigError("checkpoint shape mismatch at layer " +
                        std::string(specs[i].name));
  }
  PlannerModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  if (!m.valid()) throw ConfigError("checkpoint weight count mismatch in " + path);
  return m;
}

VehicleParams vehicle_from_json(const Json& j) {
  VehicleParams p;
  p.wheelbase = j.value("wheelbase", p.wheelbase);
  p.width = j.value("width", p.width);
  p.rear_overhang = j.value("rear_overhang", p.rear_overhang);
  p.front_length = j.value("front_length", p.front_length);
  p.kappa_max = j.value("kappa_max", p.kappa_max);
  p.check();
  return p;
}

Json vehicle_to_json(const VehicleParams& p) {
  return Json{{"wheelbase", p.wheelbase},
              {"width", p.width},
              {"rear_overhang", p.rear_overhang},
              {"front_length", p.front_length},
              {"kappa_max", p.kappa_max}};
}

Json loss_to_json(const LossBreakdown& b) {
  return Json{{"coll", b.coll},   {"curv", b.curv},
              {"over", b.over},   {"nbal", b.nbal},
              {"len", b.len},     {"total", b.total},
              {"sigma_coll", b.sigma_coll}, {"sigma_len", b.sigma_len}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
}

Json load_json_file(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace splineplan
