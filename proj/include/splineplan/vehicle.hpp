#pragma once

#include "splineplan/common.hpp"

namespace splineplan {

// Car geometry and kinematic limits. kappa_max is the binding planning
// constraint; the wheelbase only matters for the kinematic ODE and for
// reporting steering angles.
struct VehicleParams {
  double wheelbase = 2.7;       // L, meters
  double width = 1.72;          // W, meters
  double rear_overhang = 0.67;  // L_B, meters
  double front_length = 3.375;  // L_F, meters
  double kappa_max = 0.22;      // 1/meters

  double steering_max() const { return std::atan(kappa_max * wheelbase); }
  double min_turn_radius() const { return 1.0 / kappa_max; }

  void check() const {
    if (wheelbase <= 0 || width <= 0 || rear_overhang <= 0 || front_length <= 0 ||
        kappa_max <= 0)
      throw ConfigError("vehicle parameters must be positive");
  }
};

// q = [beta theta x y]^T
struct VehicleState {
  double steering = 0.0;  // beta, radians
  double heading = 0.0;   // theta, radians
  double x = 0.0;         // meters
  double y = 0.0;         // meters
};

using StateDerivative = std::array<double, 4>;  // [beta_dot, theta_dot, x_dot, y_dot]

// Kinematic bicycle model: theta_dot = (v/L) tan(beta).
inline StateDerivative kinematics(const VehicleState& q, double steering_rate,
                                  double speed, const VehicleParams& params) {
  if (std::abs(q.steering) >= 0.5 * kPi)
    throw ConfigError("steering angle at tangent singularity");
  return {steering_rate, speed / params.wheelbase * std::tan(q.steering),
          speed * std::cos(q.heading), speed * std::sin(q.heading)};
}

inline double curvature_from_steering(double beta, const VehicleParams& params) {
  return std::tan(beta) / params.wheelbase;
}

// Guiding point plus the four body corners, clockwise from front-left.
template <class T>
using FootprintT = std::array<Vec2T<T>, 5>;

using Footprint = FootprintT<double>;

template <class T>
FootprintT<T> footprint(const PoseT<T>& pose, const VehicleParams& params) {
  using std::cos;
  using std::sin;
  const T c = cos(pose.heading);
  const T s = sin(pose.heading);
  const double lf = params.front_length, lb = params.rear_overhang;
  const double hw = 0.5 * params.width;
  const auto corner = [&](double ox, double oy) -> Vec2T<T> {
    return {pose.position.x + c * ox - s * oy, pose.position.y + s * ox + c * oy};
  };
  return {Vec2T<T>{pose.position.x, pose.position.y}, corner(lf, hw),
          corner(lf, -hw), corner(-lb, -hw), corner(-lb, hw)};
}

inline Footprint footprint(const Pose2& pose, const VehicleParams& params) {
  return footprint<double>(PoseT<double>{pose.position, pose.heading}, params);
}

// True when all five characteristic points lie in free space.
template <class FS>
bool footprint_in_freespace(const FS& fs, const Pose2& pose,
                            const VehicleParams& params, double tol = 0.0) {
  for (const auto& p : footprint(pose, params))
    if (!fs.contains(p, tol)) return false;
  return true;
}

}  // namespace splineplan
