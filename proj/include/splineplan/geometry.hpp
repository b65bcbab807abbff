#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "splineplan/common.hpp"

namespace splineplan {

// Free space may consist of at most this many convex quadrangles.
constexpr int kMaxQuads = 8;

// Convex quadrangle, canonicalized to counter-clockwise vertex order at
// construction. Input may use any cyclic order; non-convex or degenerate
// input is rejected.
class Quadrangle {
 public:
  explicit Quadrangle(const std::array<Vec2, 4>& vertices) : v_(vertices) {
    double area2 = 0.0;
    for (int i = 0; i < 4; ++i) area2 += cross(v_[i], v_[(i + 1) % 4]);
    if (area2 < 0.0) std::swap(v_[1], v_[3]);  // flip CW to CCW, keep v0 first
    if (std::abs(area2) <= 0.0)
      throw ConfigError("quadrangle is degenerate (zero area)");
    for (int i = 0; i < 4; ++i) {
      const Vec2 e0 = v_[(i + 1) % 4] - v_[i];
      const Vec2 e1 = v_[(i + 2) % 4] - v_[(i + 1) % 4];
      if (cross(e0, e1) <= 0.0)
        throw ConfigError("quadrangle is not strictly convex");
    }
  }

  const std::array<Vec2, 4>& vertices() const { return v_; }
  const Vec2& vertex(int i) const { return v_[i]; }

  double area() const {
    double a2 = 0.0;
    for (int i = 0; i < 4; ++i) a2 += cross(v_[i], v_[(i + 1) % 4]);
    return 0.5 * a2;
  }

  // Boundary-inclusive containment. `tol` admits points up to tol meters
  // outside (signed-distance sense).
  bool contains(const Vec2& p, double tol = 0.0) const {
    for (int i = 0; i < 4; ++i) {
      const Vec2 a = v_[i];
      const Vec2 e = v_[(i + 1) % 4] - a;
      if (cross(e, p - a) < -tol * norm(e)) return false;
    }
    return true;
  }

 private:
  std::array<Vec2, 4> v_;
};

inline bool contains(const Quadrangle& q, const Vec2& p, double tol = 0.0) {
  return q.contains(p, tol);
}

// Union of convex quadrangles (the drivable region).
struct FreeSpace {
  std::vector<Quadrangle> quads;

  explicit FreeSpace(std::vector<Quadrangle> qs) : quads(std::move(qs)) {
    if (quads.empty()) throw ConfigError("free space needs at least one quadrangle");
    if (static_cast<int>(quads.size()) > kMaxQuads)
      throw ConfigError("free space exceeds the quadrangle limit");
  }

  bool contains(const Vec2& p, double tol = 0.0) const {
    for (const auto& q : quads)
      if (q.contains(p, tol)) return true;
    return false;
  }

  // Axis-aligned bounding box over all vertices: {min, max}.
  std::pair<Vec2, Vec2> bounding_box() const {
    Vec2 lo = quads[0].vertex(0), hi = lo;
    for (const auto& q : quads)
      for (const auto& v : q.vertices()) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
      }
    return {lo, hi};
  }
};

namespace detail {

// Nearest boundary feature of a set of quadrangles to a point. The branch
// is selected on plain values; ties go to the lowest (quad, edge) index so
// the subgradient is deterministic.
struct NearestFeature {
  double dist2 = 0.0;
  int quad = -1;
  int edge = -1;
  double t = 0.0;  // clamped projection parameter along the edge
};

inline NearestFeature nearest_boundary(const std::vector<Quadrangle>& quads,
                                       const Vec2& p) {
  NearestFeature best;
  best.dist2 = std::numeric_limits<double>::infinity();
  for (int qi = 0; qi < static_cast<int>(quads.size()); ++qi) {
    const auto& v = quads[qi].vertices();
    for (int ei = 0; ei < 4; ++ei) {
      const Vec2 a = v[ei];
      const Vec2 e = v[(ei + 1) % 4] - a;
      double t = dot(p - a, e) / dot(e, e);
      t = std::clamp(t, 0.0, 1.0);
      const Vec2 c = a + t * e;
      const Vec2 d = p - c;
      const double d2 = dot(d, d);
      if (d2 < best.dist2) best = {d2, qi, ei, t};
    }
  }
  return best;
}

}  // namespace detail

// Distance from a point to the free-space union: 0 inside, Euclidean
// distance to the nearest boundary otherwise. For differentiable scalar
// types only the selected nearest-feature branch is recorded.
template <class T>
T dist_to_quads(const std::vector<Quadrangle>& quads, const Vec2T<T>& p) {
  using std::sqrt;
  const Vec2 pv{val(p.x), val(p.y)};
  for (const auto& q : quads)
    if (q.contains(pv)) return T(0.0);

  const auto f = detail::nearest_boundary(quads, pv);
  const auto& verts = quads[f.quad].vertices();
  const Vec2 a = verts[f.edge];
  const Vec2 b = verts[(f.edge + 1) % 4];
  if (f.t <= 0.0) {
    const T dx = p.x - a.x, dy = p.y - a.y;
    return sqrt(dx * dx + dy * dy);
  }
  if (f.t >= 1.0) {
    const T dx = p.x - b.x, dy = p.y - b.y;
    return sqrt(dx * dx + dy * dy);
  }
  const Vec2 e = b - a;
  const double inv_ee = 1.0 / dot(e, e);
  const T t = ((p.x - a.x) * e.x + (p.y - a.y) * e.y) * inv_ee;
  const T cx = a.x + t * e.x, cy = a.y + t * e.y;
  const T dx = p.x - cx, dy = p.y - cy;
  return sqrt(dx * dx + dy * dy);
}

template <class T>
T dist_to_quad(const Quadrangle& q, const Vec2T<T>& p) {
  return dist_to_quads<T>({q}, p);
}

template <class T>
T dist_to_freespace(const FreeSpace& fs, const Vec2T<T>& p) {
  return dist_to_quads<T>(fs.quads, p);
}

}  // namespace splineplan
