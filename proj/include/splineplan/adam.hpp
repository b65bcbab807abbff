#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "splineplan/common.hpp"

namespace splineplan {

// Adam with bias correction. Moments are per-parameter.
struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(size_t n, double learning_rate = 1e-4)
      : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}
};

// Applies one update in place. A non-finite gradient leaves parameters and
// moments untouched and returns false.
inline bool adam_step(AdamState& st, std::vector<double>& params,
                      const std::vector<double>& grads) {
  if (params.size() != st.m.size() || grads.size() != st.m.size())
    throw ConfigError("adam: parameter/gradient shape mismatch");
  for (double g : grads)
    if (!std::isfinite(g)) return false;
  st.step += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g * g;
    const double mhat = st.m[i] / bc1;
    const double vhat = st.v[i] / bc2;
    params[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
  }
  return true;
}

}  // namespace splineplan
