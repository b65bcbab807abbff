#include "splineplan/validator.hpp"

namespace splineplan {

namespace {

// Local polynomial evaluation, intentionally not reusing the spline
// module's helpers.
struct Deriv {
  double y, d1, d2;
};

Deriv eval_poly(const std::array<double, 6>& a, double x) {
  double y = 0.0, d1 = 0.0, d2 = 0.0, xp = 1.0;
  for (int j = 0; j < 6; ++j) {
    y += a[j] * xp;
    xp *= x;
  }
  xp = 1.0;
  for (int j = 1; j < 6; ++j) {
    d1 += j * a[j] * xp;
    xp *= x;
  }
  xp = 1.0;
  for (int j = 2; j < 6; ++j) {
    d2 += j * (j - 1) * a[j] * xp;
    xp *= x;
  }
  return {y, d1, d2};
}

}  // namespace

ValidationResult validate_path(const PathSpline& path, const TaskInput& task,
                               const VehicleParams& params,
                               const ValidatorConfig& cfg) {
  ValidationResult res;
  const auto flag = [&](std::string what, int seg, int sample) {
    res.ok = false;
    if (res.violations.size() < 16)
      res.violations.push_back({std::move(what), seg, sample});
  };

  if (path.segments.empty()) {
    flag("path has no segments", -1, -1);
    return res;
  }
  if (!path.closed) flag("path does not reach the desired state", -1, -1);

  const int base = std::max(2, cfg.samples_per_segment);
  const int per_seg = cfg.midpoint_refinement ? 2 * base - 1 : base;

  for (size_t si = 0; si < path.segments.size(); ++si) {
    const auto& seg = path.segments[si];
    if (!(seg.span > 0.0)) {
      flag("segment span is not positive", static_cast<int>(si), -1);
      continue;
    }
    const double c = std::cos(seg.frame.heading), s = std::sin(seg.frame.heading);
    for (int j = 0; j < per_seg; ++j) {
      const double x = seg.span * j / (per_seg - 1);
      const Deriv d = eval_poly(seg.coeffs, x);
      const double kappa = d.d2 / std::pow(1.0 + d.d1 * d.d1, 1.5);
      if (std::abs(kappa) > params.kappa_max + cfg.kappa_tol)
        flag("curvature exceeds kappa_max", static_cast<int>(si), j);

      const Pose2 pose{seg.frame.position.x + c * x - s * d.y,
                       seg.frame.position.y + s * x + c * d.y,
                       seg.frame.heading + std::atan(d.d1)};
      const auto fp = footprint(pose, params);
      for (int k = 0; k < 5; ++k) {
        if (!task.fs->contains(fp[k], cfg.containment_tol)) {
          flag("footprint point " + std::to_string(k) + " leaves free space",
               static_cast<int>(si), j);
          break;
        }
      }
    }
  }

  // endpoint interpolation
  const auto& first = path.segments.front();
  const Deriv d0 = eval_poly(first.coeffs, 0.0);
  const Vec2 start{first.frame.position.x, first.frame.position.y};
  if (norm(start - task.q0.position) > cfg.endpoint_tol ||
      std::abs(wrap_angle(first.frame.heading + std::atan(d0.d1) - task.q0.heading)) >
          cfg.endpoint_tol)
    flag("start does not match q0", 0, 0);

  if (path.closed) {
    const auto& last = path.segments.back();
    const Deriv dn = eval_poly(last.coeffs, last.span);
    const double cl = std::cos(last.frame.heading), sl = std::sin(last.frame.heading);
    const Vec2 end{last.frame.position.x + cl * last.span - sl * dn.y,
                   last.frame.position.y + sl * last.span + cl * dn.y};
    if (norm(end - task.qd.position) > cfg.endpoint_tol ||
        std::abs(wrap_angle(last.frame.heading + std::atan(dn.d1) - task.qd.heading)) >
            cfg.endpoint_tol)
      flag("end does not match qd", static_cast<int>(path.segments.size()) - 1, -1);
  }

  return res;
}

}  // namespace splineplan
