#pragma once

#include <span>

#include "splineplan/geometry.hpp"
#include "splineplan/spline.hpp"
#include "splineplan/vehicle.hpp"

namespace splineplan {

enum class TrainPhase { kPretrain, kMain };

struct LossBreakdown {
  double coll = 0.0;
  double curv = 0.0;
  double over = 0.0;
  double nbal = 0.0;
  double len = 0.0;
  double total = 0.0;
  int sigma_coll = 1;
  int sigma_len = 0;
};

template <class T>
struct LossTerms {
  T coll{};
  T curv{};
  T over{};
  T nbal{};
  T len{};
  T total{};
  int sigma_coll = 1;
  int sigma_len = 0;

  LossBreakdown snapshot() const {
    return {val(coll), val(curv), val(over), val(nbal),
            val(len),  val(total), sigma_coll, sigma_len};
  }
};

namespace lossdetail {

// Footprint characteristic point k (0 = guiding point) at a path sample.
template <class T>
Vec2T<T> sample_point(const PathSample<T>& s, int k, const VehicleParams& p) {
  using std::cos;
  using std::sin;
  if (k == 0) return s.position;
  static constexpr double kSign[5][2] = {{0, 0}, {1, 1}, {1, -1}, {-1, -1}, {-1, 1}};
  const double ox = kSign[k][0] > 0 ? p.front_length : -p.rear_overhang;
  const double oy = kSign[k][1] * 0.5 * p.width;
  const T c = cos(s.tangent);
  const T sn = sin(s.tangent);
  return {s.position.x + c * ox - sn * oy, s.position.y + sn * ox + c * oy};
}

inline PathSample<double> sample_values(const PathSample<double>& s) { return s; }
inline PathSample<double> sample_values(const PathSample<DiffValue>& s) {
  return {{s.position.x.v, s.position.y.v}, s.tangent.v, s.curvature.v};
}

}  // namespace lossdetail

// Sum over segments, samples 0..126 and the 5 characteristic points of
// d(F, pi_ijk) weighted by the guiding-point gap to the next sample. Terms
// with zero distance contribute nothing (and carry no gradient).
template <class T>
T collision_loss(const SampledPathT<T>& sp, const FreeSpace& fs,
                 const VehicleParams& params) {
  T total(0.0);
  for (const auto& seg : sp.segments) {
    for (int j = 0; j + 1 < static_cast<int>(seg.size()); ++j) {
      const PathSample<double> sv = lossdetail::sample_values(seg[j]);
      bool gap_ready = false;
      T gap(0.0);
      for (int k = 0; k < 5; ++k) {
        const Vec2 pv = lossdetail::sample_point<double>(sv, k, params);
        if (fs.contains(pv)) continue;
        const Vec2T<T> pt = lossdetail::sample_point<T>(seg[j], k, params);
        const T d = dist_to_freespace<T>(fs, pt);
        if (!gap_ready) {
          const T dx = seg[j + 1].position.x - seg[j].position.x;
          const T dy = seg[j + 1].position.y - seg[j].position.y;
          gap = norm2(dx, dy);
          gap_ready = true;
        }
        total = total + d * gap;
      }
    }
  }
  return total;
}

// Sum over samples 0..126 of max(|kappa| - kappa_max, 0).
template <class T>
T curvature_loss(const SampledPathT<T>& sp, double kappa_max) {
  using std::abs;
  T total(0.0);
  for (const auto& seg : sp.segments) {
    for (int j = 0; j + 1 < static_cast<int>(seg.size()); ++j) {
      if (std::abs(val(seg[j].curvature)) <= kappa_max) continue;
      total = total + (abs(seg[j].curvature) - kappa_max);
    }
  }
  return total;
}

// Three hinge terms: the last gluing point ahead of qd's left half-plane,
// qd behind the last gluing point's right half-plane, and heading
// difference beyond pi/2.
template <class T>
T overshoot_loss(const PoseT<T>& last_gp, const Pose2& qd) {
  using std::abs;
  using std::cos;
  using std::sin;
  T total(0.0);

  const double cd = std::cos(qd.heading), sd = std::sin(qd.heading);
  const T x_p_in_qd =
      cd * (last_gp.position.x - qd.position.x) + sd * (last_gp.position.y - qd.position.y);
  if (val(x_p_in_qd) > 0.0) total = total + x_p_in_qd;

  const T cp = cos(last_gp.heading);
  const T sp = sin(last_gp.heading);
  const T x_qd_in_p =
      cp * (qd.position.x - last_gp.position.x) + sp * (qd.position.y - last_gp.position.y);
  if (val(x_qd_in_p) < 0.0) total = total - x_qd_in_p;

  T dth = qd.heading - last_gp.heading;
  dth = dth - 2.0 * kPi * std::round(val(dth) / (2.0 * kPi));
  if (std::abs(val(dth)) > 0.5 * kPi) total = total + (abs(dth) - 0.5 * kPi);

  return total;
}

// sum_i max(l_i - 1.5 lbar, 0) + max(lbar - 1.5 l_i, 0)
template <class T>
T nonbalanced_loss(std::span<const T> lengths) {
  T mean(0.0);
  for (const auto& l : lengths) mean = mean + l;
  mean = mean * (1.0 / static_cast<double>(lengths.size()));
  T total(0.0);
  for (const auto& l : lengths) {
    const T over = l - 1.5 * mean;
    if (val(over) > 0.0) total = total + over;
    const T under = mean - 1.5 * l;
    if (val(under) > 0.0) total = total + under;
  }
  return total;
}

template <class T>
T length_loss(std::span<const T> lengths) {
  T total(0.0);
  for (const auto& l : lengths) total = total + l;
  return total;
}

// Gate assembly: sigma_coll is 0 only in the pretraining phase; sigma_len
// is 1 exactly when all violation terms are zero (and, for open paths,
// never, since an unclosed path is not feasible).
template <class T>
LossTerms<T> total_loss(const T& coll, const T& curv, const T& over, const T& nbal,
                        const T& len, TrainPhase phase, bool final_ok = true) {
  LossTerms<T> out;
  out.coll = coll;
  out.curv = curv;
  out.over = over;
  out.nbal = nbal;
  out.len = len;
  out.sigma_coll = phase == TrainPhase::kPretrain ? 0 : 1;
  out.sigma_len =
      (val(coll) + val(curv) + val(over) == 0.0 && final_ok) ? 1 : 0;
  T total = curv + over + nbal;
  if (out.sigma_coll) total = total + coll;
  if (out.sigma_len) total = total + len;
  out.total = total;
  return out;
}

// Full evaluation on an assembled (possibly unclosed) path. In the
// pretraining phase the collision term is gated off; its value is still
// reported (computed without gradients) so the sigma_len test matches the
// main phase.
template <class T>
LossTerms<T> evaluate_losses(const AssembleResult<T>& asmres, const FreeSpace& fs,
                             const VehicleParams& params, TrainPhase phase) {
  const SampledPathT<T> sp = sample(asmres.path);
  const std::vector<T> lengths = segment_lengths(asmres.path);

  T coll(0.0);
  if (phase == TrainPhase::kPretrain) {
    SampledPathT<double> spd;
    spd.segments.reserve(sp.segments.size());
    for (const auto& seg : sp.segments) {
      std::vector<PathSample<double>> row;
      row.reserve(seg.size());
      for (const auto& s : seg) row.push_back(lossdetail::sample_values(s));
      spd.segments.push_back(std::move(row));
    }
    coll = T(collision_loss<double>(spd, fs, params));
  } else {
    coll = collision_loss<T>(sp, fs, params);
  }
  const T curv = curvature_loss<T>(sp, params.kappa_max);
  const T over = overshoot_loss<T>(asmres.last_gp_world, asmres.path.qd);
  const T nbal = nonbalanced_loss<T>(std::span<const T>(lengths));
  const T len = length_loss<T>(std::span<const T>(lengths));
  return total_loss<T>(coll, curv, over, nbal, len, phase, asmres.final_ok);
}

}  // namespace splineplan
