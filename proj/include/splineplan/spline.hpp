#pragma once

#include <vector>

#include "splineplan/common.hpp"
#include "splineplan/tape.hpp"

namespace splineplan {

constexpr int kSamplesPerSegment = 128;
constexpr int kDefaultSegments = 7;
constexpr double kMinGluingAdvance = 0.1;  // meters, forward-progress floor

// Gluing point expressed in the local frame of the previous one:
// position, slope dy/dx and second derivative d2y/dx2.
template <class T>
struct GluingPointT {
  T x{};
  T y{};
  T dy{};
  T ddy{};
};
using GluingPoint = GluingPointT<double>;

// One quintic y(x) = sum a_j x^j on [0, span], in the frame's coordinates.
template <class T>
struct QuinticSegmentT {
  std::array<T, 6> coeffs{};
  T span{};
  PoseT<T> frame;
};
using QuinticSegment = QuinticSegmentT<double>;

template <class T>
struct PathSplineT {
  Pose2 q0, qd;
  std::vector<GluingPointT<T>> gluing_points;
  std::vector<QuinticSegmentT<T>> segments;
  bool closed = true;  // final segment reached qd
};
using PathSpline = PathSplineT<double>;

template <class T>
struct PathSample {
  Vec2T<T> position;  // world frame
  T tangent{};        // world tangent angle, radians
  T curvature{};      // 1/meters
};

template <class T>
struct SampledPathT {
  // kSamplesPerSegment samples per segment, equally spaced in local x.
  std::vector<std::vector<PathSample<T>>> segments;
};
using SampledPath = SampledPathT<double>;

// --- polynomial evaluation (Horner) ---

template <class T>
T poly_eval(const std::array<T, 6>& a, const T& x) {
  return ((((a[5] * x + a[4]) * x + a[3]) * x + a[2]) * x + a[1]) * x + a[0];
}
template <class T>
T poly_eval_d1(const std::array<T, 6>& a, const T& x) {
  return (((5.0 * a[5] * x + 4.0 * a[4]) * x + 3.0 * a[3]) * x + 2.0 * a[2]) * x + a[1];
}
template <class T>
T poly_eval_d2(const std::array<T, 6>& a, const T& x) {
  return ((20.0 * a[5] * x + 12.0 * a[4]) * x + 6.0 * a[3]) * x + 2.0 * a[2];
}

template <class T>
T curvature_of(const T& dy, const T& ddy) {
  using std::pow;
  return ddy / pow(1.0 + dy * dy, 1.5);
}

// --- segment solve ---

namespace detail {
template <class T>
std::array<T, 6> solve_coeffs(Tape*, const std::array<T, 36>& A,
                              const std::array<T, 6>& b, double cond_limit) {
  return solve6(A, b, cond_limit);
}
inline std::array<DiffValue, 6> solve_coeffs(Tape* t, const std::array<DiffValue, 36>& A,
                                             const std::array<DiffValue, 6>& b,
                                             double cond_limit) {
  if (!t) throw DiffError("taped segment solve needs a tape", -1);
  return solve6(*t, A, b, cond_limit);
}

template <class T>
Tape* tape_of_scalar(const T&) {
  return nullptr;
}
inline Tape* tape_of_scalar(const DiffValue& x) { return x.tape; }
}  // namespace detail

// Boundary conditions: y(0) = y'(0) = 0, y''(0) = start_curv (the frame is
// tangent-aligned, so the start second derivative equals the incoming
// curvature), and (y, y', y'') at x = gp.x matching the gluing point.
template <class T>
QuinticSegmentT<T> solve_segment(const T& start_curv, const GluingPointT<T>& gp,
                                 double cond_limit = 1e12) {
  if (val(gp.x) <= 0.0) throw SolveError("segment span must be positive");
  const T& x = gp.x;
  const T x2 = x * x;
  const T x3 = x2 * x;
  const T x4 = x3 * x;
  const T x5 = x4 * x;
  const T zero(0.0), one(1.0), two(2.0);
  const std::array<T, 36> A = {
      one,  zero, zero,     zero,      zero,       zero,       //
      zero, one,  zero,     zero,      zero,       zero,       //
      zero, zero, two,      zero,      zero,       zero,       //
      one,  x,    x2,       x3,        x4,         x5,         //
      zero, one,  2.0 * x,  3.0 * x2,  4.0 * x3,   5.0 * x4,   //
      zero, zero, two,      6.0 * x,   12.0 * x2,  20.0 * x3};
  const std::array<T, 6> rhs = {zero, zero, start_curv, gp.y, gp.dy, gp.ddy};

  Tape* tape = detail::tape_of_scalar(gp.x);
  if (!tape) tape = detail::tape_of_scalar(start_curv);
  if (!tape) tape = detail::tape_of_scalar(gp.y);

  QuinticSegmentT<T> seg;
  seg.coeffs = detail::solve_coeffs(tape, A, rhs, cond_limit);
  seg.span = gp.x;
  return seg;
}

// Pose + curvature carried along the chain of local frames.
template <class T>
struct ChainState {
  PoseT<T> frame;
  T curv{};
};

template <class T>
Vec2T<T> frame_to_world(const PoseT<T>& f, const T& x, const T& y) {
  using std::cos;
  using std::sin;
  const T c = cos(f.heading);
  const T s = sin(f.heading);
  return {f.position.x + c * x - s * y, f.position.y + s * x + c * y};
}

// Solves the segment for `gp`, attaches the current frame, and advances the
// chain to the gluing point's world pose (tangent direction becomes the new
// local x axis; curvature carries over exactly).
template <class T>
QuinticSegmentT<T> advance_chain(ChainState<T>& st, const GluingPointT<T>& gp,
                                 double cond_limit = 1e12) {
  using std::atan;
  QuinticSegmentT<T> seg = solve_segment(st.curv, gp, cond_limit);
  seg.frame = st.frame;
  const Vec2T<T> origin = frame_to_world(st.frame, gp.x, gp.y);
  st.frame.heading = st.frame.heading + atan(gp.dy);
  st.frame.position = origin;
  st.curv = curvature_of(gp.dy, gp.ddy);
  return seg;
}

// Final segment: connects the chain state to qd with zero end curvature.
// Throws OvershootError when qd is not ahead of the last gluing point or
// the heading difference reaches +-pi/2.
template <class T>
QuinticSegmentT<T> final_segment(const ChainState<T>& st, const Pose2& qd,
                                 double cond_limit = 1e12) {
  using std::cos;
  using std::sin;
  using std::tan;
  const T c = cos(st.frame.heading);
  const T s = sin(st.frame.heading);
  const T dx = qd.position.x - st.frame.position.x;
  const T dy = qd.position.y - st.frame.position.y;
  const T xl = c * dx + s * dy;
  const T yl = c * dy - s * dx;
  if (val(xl) <= 0.0)
    throw OvershootError("desired state lies behind the last gluing point");
  T dth = qd.heading - st.frame.heading;
  dth = dth - 2.0 * kPi * std::round(val(dth) / (2.0 * kPi));
  if (std::abs(val(dth)) >= 0.5 * kPi - 1e-9)
    throw OvershootError("heading difference to desired state reaches pi/2");
  GluingPointT<T> target{xl, yl, tan(dth), T(0.0)};
  QuinticSegmentT<T> seg = solve_segment(st.curv, target, cond_limit);
  seg.frame = st.frame;
  return seg;
}

template <class T>
struct AssembleResult {
  PathSplineT<T> path;
  PoseT<T> last_gp_world;  // frame pose of the would-be final segment
  bool final_ok = true;
};

// Chains all gluing points from q0 and tries to close the path to qd.
// Never throws on final-segment failure; `final_ok` reports it instead.
template <class T>
AssembleResult<T> assemble_partial(const Pose2& q0,
                                   std::span<const GluingPointT<T>> gps,
                                   const Pose2& qd) {
  AssembleResult<T> out;
  out.path.q0 = q0;
  out.path.qd = qd;
  out.path.gluing_points.assign(gps.begin(), gps.end());
  ChainState<T> st{PoseT<T>{{T(q0.position.x), T(q0.position.y)}, T(q0.heading)},
                   T(0.0)};
  for (const auto& gp : gps) out.path.segments.push_back(advance_chain(st, gp));
  out.last_gp_world = st.frame;
  try {
    out.path.segments.push_back(final_segment(st, qd));
    out.path.closed = true;
  } catch (const OvershootError&) {
    out.path.closed = false;
  } catch (const SolveError&) {
    out.path.closed = false;
  }
  out.final_ok = out.path.closed;
  return out;
}

// Strict variant: N-1 gluing points -> N segments, throwing on failure.
template <class T>
PathSplineT<T> assemble(const Pose2& q0, std::span<const GluingPointT<T>> gps,
                        const Pose2& qd) {
  AssembleResult<T> r;
  r.path.q0 = q0;
  r.path.qd = qd;
  r.path.gluing_points.assign(gps.begin(), gps.end());
  ChainState<T> st{PoseT<T>{{T(q0.position.x), T(q0.position.y)}, T(q0.heading)},
                   T(0.0)};
  for (const auto& gp : gps) r.path.segments.push_back(advance_chain(st, gp));
  r.path.segments.push_back(final_segment(st, qd));  // may throw
  return r.path;
}

inline PathSpline assemble(const Pose2& q0, const std::vector<GluingPoint>& gps,
                           const Pose2& qd) {
  return assemble<double>(q0, std::span<const GluingPoint>(gps), qd);
}

// --- sampling ---

template <class T>
SampledPathT<T> sample(const PathSplineT<T>& path) {
  using std::atan;
  using std::cos;
  using std::sin;
  SampledPathT<T> out;
  out.segments.reserve(path.segments.size());
  for (const auto& seg : path.segments) {
    std::vector<PathSample<T>> samples;
    samples.reserve(kSamplesPerSegment);
    const T c = cos(seg.frame.heading);
    const T s = sin(seg.frame.heading);
    for (int j = 0; j < kSamplesPerSegment; ++j) {
      const T x = seg.span * (static_cast<double>(j) / (kSamplesPerSegment - 1));
      const T y = poly_eval(seg.coeffs, x);
      const T d1 = poly_eval_d1(seg.coeffs, x);
      const T d2 = poly_eval_d2(seg.coeffs, x);
      PathSample<T> ps;
      ps.position = {seg.frame.position.x + c * x - s * y,
                     seg.frame.position.y + s * x + c * y};
      ps.tangent = seg.frame.heading + atan(d1);
      ps.curvature = curvature_of(d1, d2);
      samples.push_back(ps);
    }
    out.segments.push_back(std::move(samples));
  }
  return out;
}

// --- arc length: composite Gauss-Legendre, 32 panels x 5 nodes ---

template <class T>
T arc_length(const QuinticSegmentT<T>& seg) {
  using std::sqrt;
  static constexpr double kNodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                       0.5384693101056831, 0.9061798459386640};
  static constexpr double kWeights[5] = {0.2369268850561891, 0.4786286704993665,
                                         0.5688888888888889, 0.4786286704993665,
                                         0.2369268850561891};
  constexpr int kPanels = 32;
  T total(0.0);
  for (int p = 0; p < kPanels; ++p) {
    for (int k = 0; k < 5; ++k) {
      const double u = (p + 0.5 + 0.5 * kNodes[k]) / kPanels;  // in (0,1)
      const T x = seg.span * u;
      const T d1 = poly_eval_d1(seg.coeffs, x);
      total = total + kWeights[k] * sqrt(1.0 + d1 * d1) * (seg.span * (0.5 / kPanels));
    }
  }
  return total;
}

template <class T>
std::vector<T> segment_lengths(const PathSplineT<T>& path) {
  std::vector<T> out;
  out.reserve(path.segments.size());
  for (const auto& seg : path.segments) out.push_back(arc_length(seg));
  return out;
}

// Junction continuity gaps in the world frame (position, tangent angle,
// curvature), maximized over all junctions. Exposed for validation.
struct JunctionGaps {
  double position = 0.0;  // meters
  double tangent = 0.0;   // radians
  double curvature = 0.0; // 1/meters
};

inline JunctionGaps junction_gaps(const PathSpline& path) {
  JunctionGaps g;
  for (size_t i = 0; i + 1 < path.segments.size(); ++i) {
    const auto& a = path.segments[i];
    const auto& b = path.segments[i + 1];
    const double x = a.span;
    const double y = poly_eval(a.coeffs, x);
    const double d1 = poly_eval_d1(a.coeffs, x);
    const double d2 = poly_eval_d2(a.coeffs, x);
    const Vec2 end_world = frame_to_world(a.frame, x, y);
    g.position = std::max(g.position, norm(end_world - b.frame.position));
    const double tan_end = a.frame.heading + std::atan(d1);
    g.tangent = std::max(g.tangent, std::abs(wrap_angle(tan_end - b.frame.heading)));
    const double curv_end = curvature_of(d1, d2);
    const double curv_next = 2.0 * b.coeffs[2];  // y''(0); frame is tangent-aligned
    g.curvature = std::max(g.curvature, std::abs(curv_end - curv_next));
  }
  return g;
}

}  // namespace splineplan
