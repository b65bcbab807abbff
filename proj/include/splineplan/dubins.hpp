#pragma once

#include <optional>
#include <string>
#include <vector>

#include "splineplan/geometry.hpp"
#include "splineplan/vehicle.hpp"

namespace splineplan {

enum class DubinsWord { kLSL, kLSR, kRSL, kRSR, kRLR, kLRL };

const char* dubins_word_name(DubinsWord w);

// One bounded-curvature forward path: three segments, each an arc (L/R) or
// a straight (S). Segment lengths are stored in radius-normalized units.
struct DubinsPath {
  DubinsWord word{};
  std::array<double, 3> seg{};  // normalized lengths, all >= 0
  double radius = 1.0;
  Pose2 start;

  double length() const { return (seg[0] + seg[1] + seg[2]) * radius; }
  Pose2 at(double s) const;  // pose at arc length s in [0, length]
};

// All geometrically valid words between two poses, sorted by length.
std::vector<DubinsPath> dubins_all(const Pose2& q0, const Pose2& q1, double radius);

// Minimal-length path among the six words. Always exists.
DubinsPath dubins_shortest(const Pose2& q0, const Pose2& q1, double radius);

// Distance metric induced by the shortest Dubins path.
inline double dubins_distance(const Pose2& q0, const Pose2& q1, double radius) {
  return dubins_shortest(q0, q1, radius).length();
}

struct DubinsFeasibilityConfig {
  double resolution = 0.4;            // meters, sampling and via-pose grid pitch
  double via_heading_step = kPi / 6;  // 30 degrees
};

// True when the vehicle footprint stays inside the free space along the
// path, sampled every `resolution` meters of arc length.
bool dubins_path_clear(const DubinsPath& path, const FreeSpace& fs,
                       const VehicleParams& params, double resolution);

// Admission oracle: some Dubins word (or a two-word path through one
// intermediate grid pose) connects q0 to qd collision-free.
bool dubins_feasible(const FreeSpace& fs, const Pose2& q0, const Pose2& qd,
                     const VehicleParams& params,
                     const DubinsFeasibilityConfig& cfg = {});

}  // namespace splineplan
