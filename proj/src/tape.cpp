#include "splineplan/tape.hpp"

#include <cstring>

namespace splineplan {

void Tape::backward(const DiffValue& root, std::vector<double>& adj) const {
  adj.assign(val_.size(), 0.0);
  if (root.is_const()) return;
  if (root.tape != this) throw DiffError("root does not belong to this tape", root.id);
  adj[root.id] = 1.0;
  for (int32_t i = root.id; i >= 0; --i) {
    const double a = adj[i];
    if (a == 0.0) continue;
    const uint32_t* p = par_.data() + pbeg_[i];
    const double* ax = aux_.data() + abeg_[i];
    switch (op_[i]) {
      case Op::kLeaf:
        break;
      case Op::kAdd:
        adj[p[0]] += a;
        adj[p[1]] += a;
        break;
      case Op::kSub:
        adj[p[0]] += a;
        adj[p[1]] -= a;
        break;
      case Op::kMul:
        adj[p[0]] += a * val_[p[1]];
        adj[p[1]] += a * val_[p[0]];
        break;
      case Op::kDiv:
        adj[p[0]] += a / val_[p[1]];
        adj[p[1]] -= a * val_[i] / val_[p[1]];
        break;
      case Op::kNeg:
        adj[p[0]] -= a;
        break;
      case Op::kAddC:
        adj[p[0]] += a;
        break;
      case Op::kMulC:
        adj[p[0]] += a * ax[0];
        break;
      case Op::kPowC:
        adj[p[0]] += a * ax[0] * std::pow(val_[p[0]], ax[0] - 1.0);
        break;
      case Op::kSqrt:
        adj[p[0]] += a * 0.5 / val_[i];
        break;
      case Op::kTan:
        adj[p[0]] += a * (1.0 + val_[i] * val_[i]);
        break;
      case Op::kAtan: {
        const double x = val_[p[0]];
        adj[p[0]] += a / (1.0 + x * x);
        break;
      }
      case Op::kAtan2: {
        const double y = val_[p[0]], x = val_[p[1]];
        const double r2 = x * x + y * y;
        adj[p[0]] += a * x / r2;
        adj[p[1]] -= a * y / r2;
        break;
      }
      case Op::kSin:
        adj[p[0]] += a * std::cos(val_[p[0]]);
        break;
      case Op::kCos:
        adj[p[0]] -= a * std::sin(val_[p[0]]);
        break;
      case Op::kTanh:
        adj[p[0]] += a * (1.0 - val_[i] * val_[i]);
        break;
      case Op::kSigmoid:
        adj[p[0]] += a * val_[i] * (1.0 - val_[i]);
        break;
      case Op::kExp:
        adj[p[0]] += a * val_[i];
        break;
      case Op::kAffine: {
        const uint32_t np = pbeg_[i + 1] - pbeg_[i];
        const uint32_t n = (np - 1) / 2;
        adj[p[0]] += a;
        const uint32_t* w = p + 1;
        const uint32_t* x = p + 1 + n;
        for (uint32_t k = 0; k < n; ++k) {
          adj[w[k]] += a * val_[x[k]];
          adj[x[k]] += a * val_[w[k]];
        }
        break;
      }
      case Op::kAffineR: {
        adj[p[0]] += a;
        const uint32_t wb = p[1], xb = p[2], n = p[3];
        const double* wv = val_.data() + wb;
        const double* xv = val_.data() + xb;
        double* wa = adj.data() + wb;
        double* xa = adj.data() + xb;
        for (uint32_t k = 0; k < n; ++k) {
          wa[k] += a * xv[k];
          xa[k] += a * wv[k];
        }
        break;
      }
      case Op::kNorm: {
        const double v = val_[i];
        if (v > 0.0) {
          const uint32_t np = pbeg_[i + 1] - pbeg_[i];
          for (uint32_t k = 0; k < np; ++k) adj[p[k]] += a * val_[p[k]] / v;
        }
        break;
      }
      case Op::kSolveLane: {
        // aux = [lane, row_lane(A^-1) (6), x (6)], parents = [A (36), b (6)]
        const double* row = ax + 1;
        const double* x = ax + 7;
        for (int j = 0; j < 6; ++j) {
          const double bbar = a * row[j];
          adj[p[36 + j]] += bbar;
          for (int k = 0; k < 6; ++k) adj[p[6 * j + k]] -= bbar * x[k];
        }
        break;
      }
    }
  }
}

namespace {

double replay_value(const Tape& t, Op op, const uint32_t* p, uint32_t np,
                    const double* ax, const std::vector<double>& v,
                    double stored) {
  switch (op) {
    case Op::kLeaf:
      return stored;
    case Op::kAdd:
      return v[p[0]] + v[p[1]];
    case Op::kSub:
      return v[p[0]] - v[p[1]];
    case Op::kMul:
      return v[p[0]] * v[p[1]];
    case Op::kDiv:
      return v[p[0]] / v[p[1]];
    case Op::kNeg:
      return -v[p[0]];
    case Op::kAddC:
      return v[p[0]] + ax[0];
    case Op::kMulC:
      return v[p[0]] * ax[0];
    case Op::kPowC:
      return std::pow(v[p[0]], ax[0]);
    case Op::kSqrt:
      return std::sqrt(v[p[0]]);
    case Op::kTan:
      return std::tan(v[p[0]]);
    case Op::kAtan:
      return std::atan(v[p[0]]);
    case Op::kAtan2:
      return std::atan2(v[p[0]], v[p[1]]);
    case Op::kSin:
      return std::sin(v[p[0]]);
    case Op::kCos:
      return std::cos(v[p[0]]);
    case Op::kTanh:
      return std::tanh(v[p[0]]);
    case Op::kSigmoid:
      return sigmoid(v[p[0]]);
    case Op::kExp:
      return std::exp(v[p[0]]);
    case Op::kAffine: {
      const uint32_t n = (np - 1) / 2;
      double acc = v[p[0]];
      for (uint32_t k = 0; k < n; ++k) acc += v[p[1 + k]] * v[p[1 + n + k]];
      return acc;
    }
    case Op::kAffineR: {
      double acc = v[p[0]];
      for (uint32_t k = 0; k < p[3]; ++k) acc += v[p[1] + k] * v[p[2] + k];
      return acc;
    }
    case Op::kNorm: {
      double acc = 0.0;
      for (uint32_t k = 0; k < np; ++k) acc += v[p[k]] * v[p[k]];
      return std::sqrt(acc);
    }
    case Op::kSolveLane: {
      double A[36], b[6], x[6];
      for (int k = 0; k < 36; ++k) A[k] = v[p[k]];
      for (int k = 0; k < 6; ++k) b[k] = v[p[36 + k]];
      lu_solve6(A, b, x, nullptr, nullptr, 0.0 /* no limit */);
      return x[static_cast<int>(ax[0])];
    }
  }
  (void)t;
  return stored;
}

}  // namespace

double Tape::replay_max_dev() const {
  std::vector<double> v(val_.size());
  double worst = 0.0;
  for (size_t i = 0; i < val_.size(); ++i) {
    const uint32_t* p = par_.data() + pbeg_[i];
    const double* ax = aux_.data() + abeg_[i];
    v[i] = replay_value(*this, op_[i], p, pbeg_[i + 1] - pbeg_[i], ax, v, val_[i]);
    worst = std::max(worst, std::abs(v[i] - val_[i]));
  }
  return worst;
}

DiffValue affine(Tape& t, std::span<const DiffValue> w, std::span<const DiffValue> x,
                 const DiffValue& b) {
  const size_t n = w.size();
  if (x.size() != n) throw DiffError("affine operand size mismatch", -1);
  static thread_local std::vector<int32_t> parents;
  parents.clear();
  parents.reserve(2 * n + 1);
  double acc = b.v;
  parents.push_back(detail::ensure_node(b, t).id);
  for (size_t i = 0; i < n; ++i) parents.push_back(detail::ensure_node(w[i], t).id);
  for (size_t i = 0; i < n; ++i) {
    parents.push_back(detail::ensure_node(x[i], t).id);
    acc += w[i].v * x[i].v;
  }
  return t.record_n(Op::kAffine, acc, parents);
}

DiffValue norm(Tape& t, std::span<const DiffValue> xs) {
  static thread_local std::vector<int32_t> parents;
  parents.clear();
  double acc = 0.0;
  for (const auto& x : xs) {
    parents.push_back(detail::ensure_node(x, t).id);
    acc += x.v * x.v;
  }
  return t.record_n(Op::kNorm, std::sqrt(acc), parents);
}

void lu_solve6(const double* A, const double* b, double* x, double* A_inv,
               double* cond, double cond_limit) {
  constexpr int n = 6;
  double lu[n * n];
  std::memcpy(lu, A, sizeof(lu));
  int piv[n];
  for (int i = 0; i < n; ++i) piv[i] = i;

  for (int col = 0; col < n; ++col) {
    int best = col;
    double bestabs = std::abs(lu[piv[col] * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double m = std::abs(lu[piv[r] * n + col]);
      if (m > bestabs) {
        bestabs = m;
        best = r;
      }
    }
    if (bestabs < 1e-300) throw SolveError("singular 6x6 system");
    std::swap(piv[col], piv[best]);
    const double pivot = lu[piv[col] * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = lu[piv[r] * n + col] / pivot;
      lu[piv[r] * n + col] = f;
      for (int c = col + 1; c < n; ++c) lu[piv[r] * n + c] -= f * lu[piv[col] * n + c];
    }
  }

  const auto solve_one = [&](const double* rhs, double* out) {
    double y[n];
    for (int r = 0; r < n; ++r) {
      double acc = rhs[piv[r]];
      for (int c = 0; c < r; ++c) acc -= lu[piv[r] * n + c] * y[c];
      y[r] = acc;
    }
    for (int r = n - 1; r >= 0; --r) {
      double acc = y[r];
      for (int c = r + 1; c < n; ++c) acc -= lu[piv[r] * n + c] * out[c];
      out[r] = acc / lu[piv[r] * n + r];
    }
  };

  if (x) solve_one(b, x);

  if (A_inv || cond || cond_limit > 0.0) {
    double inv[n * n];
    double e[n] = {0, 0, 0, 0, 0, 0};
    double colbuf[n];
    for (int c = 0; c < n; ++c) {
      e[c] = 1.0;
      solve_one(e, colbuf);
      e[c] = 0.0;
      for (int r = 0; r < n; ++r) inv[r * n + c] = colbuf[r];
    }
    double norm_a = 0.0, norm_inv = 0.0;
    for (int c = 0; c < n; ++c) {
      double sa = 0.0, si = 0.0;
      for (int r = 0; r < n; ++r) {
        sa += std::abs(A[r * n + c]);
        si += std::abs(inv[r * n + c]);
      }
      norm_a = std::max(norm_a, sa);
      norm_inv = std::max(norm_inv, si);
    }
    const double k1 = norm_a * norm_inv;
    if (cond) *cond = k1;
    if (cond_limit > 0.0 && k1 > cond_limit)
      throw SolveError("ill-conditioned 6x6 system (x span too small?)", k1);
    if (A_inv) std::memcpy(A_inv, inv, sizeof(inv));
  }
}

std::array<double, 6> solve6(const std::array<double, 36>& A,
                             const std::array<double, 6>& b, double cond_limit) {
  std::array<double, 6> x{};
  lu_solve6(A.data(), b.data(), x.data(), nullptr, nullptr, cond_limit);
  return x;
}

std::array<DiffValue, 6> solve6(Tape& t, const std::array<DiffValue, 36>& A,
                                const std::array<DiffValue, 6>& b,
                                double cond_limit) {
  double av[36], bv[6], x[6], inv[36];
  std::array<int32_t, 42> parents{};
  for (int k = 0; k < 36; ++k) {
    av[k] = A[k].v;
    parents[k] = detail::ensure_node(A[k], t).id;
  }
  for (int k = 0; k < 6; ++k) {
    bv[k] = b[k].v;
    parents[36 + k] = detail::ensure_node(b[k], t).id;
  }
  lu_solve6(av, bv, x, inv, nullptr, cond_limit);

  std::array<DiffValue, 6> out;
  double aux[13];
  for (int k = 0; k < 6; ++k) aux[7 + k] = x[k];
  for (int lane = 0; lane < 6; ++lane) {
    aux[0] = lane;
    for (int j = 0; j < 6; ++j) aux[1 + j] = inv[lane * 6 + j];
    out[lane] = t.record_n(Op::kSolveLane, x[lane], parents, aux);
  }
  return out;
}

}  // namespace splineplan
