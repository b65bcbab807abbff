#include "splineplan/dubins.hpp"

#include <algorithm>

namespace splineplan {

namespace {

double mod2pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

struct Triple {
  double t, p, q;
};

std::optional<Triple> word_lsl(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double p_sq = 2.0 + d * d - 2.0 * std::cos(alpha - beta) + 2.0 * d * (sa - sb);
  if (p_sq < 0.0) return std::nullopt;
  const double th = std::atan2(cb - ca, d + sa - sb);
  return Triple{mod2pi(-alpha + th), std::sqrt(p_sq), mod2pi(beta - th)};
}

std::optional<Triple> word_rsr(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double p_sq = 2.0 + d * d - 2.0 * std::cos(alpha - beta) + 2.0 * d * (sb - sa);
  if (p_sq < 0.0) return std::nullopt;
  const double th = std::atan2(ca - cb, d - sa + sb);
  return Triple{mod2pi(alpha - th), std::sqrt(p_sq), mod2pi(-beta + th)};
}

std::optional<Triple> word_lsr(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double p_sq = -2.0 + d * d + 2.0 * std::cos(alpha - beta) + 2.0 * d * (sa + sb);
  if (p_sq < 0.0) return std::nullopt;
  const double p = std::sqrt(p_sq);
  const double th = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
  return Triple{mod2pi(-alpha + th), p, mod2pi(-mod2pi(beta) + th)};
}

std::optional<Triple> word_rsl(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double p_sq = -2.0 + d * d + 2.0 * std::cos(alpha - beta) - 2.0 * d * (sa + sb);
  if (p_sq < 0.0) return std::nullopt;
  const double p = std::sqrt(p_sq);
  const double th = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
  return Triple{mod2pi(alpha - th), p, mod2pi(beta - th)};
}

std::optional<Triple> word_rlr(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double tmp =
      (6.0 - d * d + 2.0 * std::cos(alpha - beta) + 2.0 * d * (sa - sb)) / 8.0;
  if (std::abs(tmp) > 1.0) return std::nullopt;
  const double p = mod2pi(2.0 * kPi - std::acos(tmp));
  const double t =
      mod2pi(alpha - std::atan2(ca - cb, d - sa + sb) + mod2pi(p / 2.0));
  const double q = mod2pi(alpha - beta - t + mod2pi(p));
  return Triple{t, p, q};
}

std::optional<Triple> word_lrl(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double tmp =
      (6.0 - d * d + 2.0 * std::cos(alpha - beta) + 2.0 * d * (sb - sa)) / 8.0;
  if (std::abs(tmp) > 1.0) return std::nullopt;
  const double p = mod2pi(2.0 * kPi - std::acos(tmp));
  const double t =
      mod2pi(-alpha - std::atan2(ca - cb, d + sa - sb) + mod2pi(p / 2.0));
  const double q = mod2pi(mod2pi(beta) - alpha - t + mod2pi(p));
  return Triple{t, p, q};
}

constexpr char kSegments[6][3] = {
    {'L', 'S', 'L'}, {'L', 'S', 'R'}, {'R', 'S', 'L'},
    {'R', 'S', 'R'}, {'R', 'L', 'R'}, {'L', 'R', 'L'},
};

}  // namespace

const char* dubins_word_name(DubinsWord w) {
  static const char* names[] = {"LSL", "LSR", "RSL", "RSR", "RLR", "LRL"};
  return names[static_cast<int>(w)];
}

std::vector<DubinsPath> dubins_all(const Pose2& q0, const Pose2& q1, double radius) {
  if (radius <= 0.0) throw ConfigError("dubins radius must be positive");
  const Vec2 dv = q1.position - q0.position;
  const double D = norm(dv);
  const double d = D / radius;
  const double phi = (D > 1e-12) ? std::atan2(dv.y, dv.x) : q0.heading;
  const double alpha = mod2pi(q0.heading - phi);
  const double beta = mod2pi(q1.heading - phi);

  std::vector<DubinsPath> out;
  const auto push = [&](DubinsWord w, const std::optional<Triple>& tr) {
    if (!tr) return;
    DubinsPath p;
    p.word = w;
    p.seg = {tr->t, tr->p, tr->q};
    p.radius = radius;
    p.start = q0;
    out.push_back(p);
  };
  push(DubinsWord::kLSL, word_lsl(alpha, beta, d));
  push(DubinsWord::kLSR, word_lsr(alpha, beta, d));
  push(DubinsWord::kRSL, word_rsl(alpha, beta, d));
  push(DubinsWord::kRSR, word_rsr(alpha, beta, d));
  push(DubinsWord::kRLR, word_rlr(alpha, beta, d));
  push(DubinsWord::kLRL, word_lrl(alpha, beta, d));
  std::sort(out.begin(), out.end(),
            [](const DubinsPath& a, const DubinsPath& b) {
              if (a.length() != b.length()) return a.length() < b.length();
              return static_cast<int>(a.word) < static_cast<int>(b.word);
            });
  return out;
}

DubinsPath dubins_shortest(const Pose2& q0, const Pose2& q1, double radius) {
  const auto all = dubins_all(q0, q1, radius);
  if (all.empty()) throw SolveError("no dubins word produced a path");
  return all.front();
}

Pose2 DubinsPath::at(double s) const {
  s = std::clamp(s / radius, 0.0, seg[0] + seg[1] + seg[2]);
  double x = start.position.x / radius, y = start.position.y / radius;
  double th = start.heading;
  const char* types = kSegments[static_cast<int>(word)];
  for (int i = 0; i < 3; ++i) {
    const double len = std::min(s, seg[i]);
    switch (types[i]) {
      case 'L':
        x += std::sin(th + len) - std::sin(th);
        y += -std::cos(th + len) + std::cos(th);
        th += len;
        break;
      case 'R':
        x += -std::sin(th - len) + std::sin(th);
        y += std::cos(th - len) - std::cos(th);
        th -= len;
        break;
      default:  // 'S'
        x += len * std::cos(th);
        y += len * std::sin(th);
        break;
    }
    s -= len;
    if (s <= 0.0) break;
  }
  return Pose2{x * radius, y * radius, th};
}

bool dubins_path_clear(const DubinsPath& path, const FreeSpace& fs,
                       const VehicleParams& params, double resolution) {
  const double L = path.length();
  const int n = std::max(1, static_cast<int>(std::ceil(L / resolution)));
  for (int i = 0; i <= n; ++i) {
    const Pose2 pose = path.at(L * i / n);
    if (!footprint_in_freespace(fs, pose, params)) return false;
  }
  return true;
}

bool dubins_feasible(const FreeSpace& fs, const Pose2& q0, const Pose2& qd,
                     const VehicleParams& params, const DubinsFeasibilityConfig& cfg) {
  const double radius = params.min_turn_radius();
  for (const auto& path : dubins_all(q0, qd, radius))
    if (dubins_path_clear(path, fs, params, cfg.resolution)) return true;

  // Fall back to one intermediate pose on a grid inside the free space,
  // visited in order of the combined Dubins lower bound.
  const auto [lo, hi] = fs.bounding_box();
  struct Via {
    double bound;
    Pose2 pose;
  };
  std::vector<Via> vias;
  const int nth = std::max(1, static_cast<int>(std::round(2.0 * kPi / cfg.via_heading_step)));
  for (double x = lo.x; x <= hi.x; x += cfg.resolution) {
    for (double y = lo.y; y <= hi.y; y += cfg.resolution) {
      if (!fs.contains({x, y})) continue;
      for (int k = 0; k < nth; ++k) {
        const Pose2 v{x, y, -kPi + (2.0 * kPi * k) / nth};
        if (!footprint_in_freespace(fs, v, params)) continue;
        const double bound =
            dubins_distance(q0, v, radius) + dubins_distance(v, qd, radius);
        vias.push_back({bound, v});
      }
    }
  }
  std::sort(vias.begin(), vias.end(),
            [](const Via& a, const Via& b) { return a.bound < b.bound; });
  for (const auto& via : vias) {
    bool first_ok = false;
    for (const auto& leg : dubins_all(q0, via.pose, radius))
      if (dubins_path_clear(leg, fs, params, cfg.resolution)) {
        first_ok = true;
        break;
      }
    if (!first_ok) continue;
    for (const auto& leg : dubins_all(via.pose, qd, radius))
      if (dubins_path_clear(leg, fs, params, cfg.resolution)) return true;
  }
  return false;
}

}  // namespace splineplan
