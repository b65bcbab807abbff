#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splineplan/common.hpp"

namespace splineplan {

// Reverse-mode autodiff over a scalar graph. Records are append-only and
// topologically ordered; local partials are recomputed in the backward
// sweep from stored node values, so records carry only parent ids (plus a
// small aux payload where needed). Gradients accumulate in reverse node
// order, which makes backward deterministic.
enum class Op : uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kAddC,   // x + c, aux = c
  kMulC,   // x * c, aux = c
  kPowC,   // x ^ c, aux = c
  kSqrt,
  kTan,
  kAtan,
  kAtan2,  // parents = [y, x]
  kSin,
  kCos,
  kTanh,
  kSigmoid,
  kExp,
  kAffine,    // b + sum_i w_i * x_i, parents = [b, w..., x...]
  kAffineR,   // same, contiguous operands: parents = [b, w_base, x_base, n]
  kNorm,      // sqrt(sum x_i^2), n parents
  kSolveLane  // component `aux[0]` of solving the 6x6 system A x = rhs
};

class Tape;

// Scalar with an optional handle into a tape. id < 0 marks a constant that
// lives outside any tape and contributes no gradient.
struct DiffValue {
  double v = 0.0;
  int32_t id = -1;
  Tape* tape = nullptr;

  DiffValue() = default;
  DiffValue(double value) : v(value) {}  // NOLINT: implicit constant lift
  DiffValue(double value, int32_t node, Tape* t) : v(value), id(node), tape(t) {}
  bool is_const() const { return id < 0; }
};

inline double val(const DiffValue& x) { return x.v; }

struct DiffError : std::runtime_error {
  int32_t node = -1;
  DiffError(const std::string& what, int32_t n)
      : std::runtime_error(what + " (node " + std::to_string(n) + ")"), node(n) {}
};

class Tape {
 public:
  DiffValue input(double v) {
    const int32_t id = new_node(v, Op::kLeaf);
    pbeg_.push_back(static_cast<uint32_t>(par_.size()));
    abeg_.push_back(static_cast<uint32_t>(aux_.size()));
    return {v, id, this};
  }

  // Registers a contiguous block of leaves; returns the id of the first.
  int32_t input_block(std::span<const double> vs) {
    const int32_t base = static_cast<int32_t>(val_.size());
    val_.insert(val_.end(), vs.begin(), vs.end());
    op_.insert(op_.end(), vs.size(), Op::kLeaf);
    pbeg_.insert(pbeg_.end(), vs.size(), static_cast<uint32_t>(par_.size()));
    abeg_.insert(abeg_.end(), vs.size(), static_cast<uint32_t>(aux_.size()));
    return base;
  }

  // b + sum_k w[w_base+k] * x[x_base+k] over contiguous node ranges.
  DiffValue affine_range(int32_t b_id, int32_t w_base, int32_t x_base, int n) {
    double acc = val_[b_id];
    const double* w = val_.data() + w_base;
    const double* x = val_.data() + x_base;
    for (int k = 0; k < n; ++k) acc += w[k] * x[k];
    const int32_t id = new_node(acc, Op::kAffineR);
    par_.push_back(static_cast<uint32_t>(b_id));
    par_.push_back(static_cast<uint32_t>(w_base));
    par_.push_back(static_cast<uint32_t>(x_base));
    par_.push_back(static_cast<uint32_t>(n));
    pbeg_.push_back(static_cast<uint32_t>(par_.size()));
    abeg_.push_back(static_cast<uint32_t>(aux_.size()));
    return {acc, id, this};
  }

  size_t size() const { return val_.size(); }
  double value(int32_t id) const { return val_[id]; }

  void clear() {
    val_.clear();
    op_.clear();
    par_.clear();
    aux_.clear();
    pbeg_.assign(1, 0);
    abeg_.assign(1, 0);
  }

  // Adjoints of `root` w.r.t. every node, indexed by node id. A constant
  // root yields all zeros.
  void backward(const DiffValue& root, std::vector<double>& adj) const;

  std::vector<double> gradient(const DiffValue& root) const {
    std::vector<double> adj;
    backward(root, adj);
    return adj;
  }

  // Recomputes every node from its record; returns the largest absolute
  // deviation from the stored values (0 when the replay is exact).
  double replay_max_dev() const;

  Tape() { clear(); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // --- record construction (used by the operator overloads) ---

  DiffValue record1(Op op, double v, int32_t p0) {
    const int32_t id = new_node(v, op);
    par_.push_back(static_cast<uint32_t>(p0));
    pbeg_.push_back(static_cast<uint32_t>(par_.size()));
    abeg_.push_back(static_cast<uint32_t>(aux_.size()));
    return {v, id, this};
  }
  DiffValue record1aux(Op op, double v, int32_t p0, double aux) {
    const int32_t id = new_node(v, op);
    par_.push_back(static_cast<uint32_t>(p0));
    pbeg_.push_back(static_cast<uint32_t>(par_.size()));
    aux_.push_back(aux);
    abeg_.push_back(static_cast<uint32_t>(aux_.size()));
    return {v, id, this};
  }
  DiffValue record2(Op op, double v, int32_t p0, int32_t p1) {
    const int32_t id = new_node(v, op);
    par_.push_back(static_cast<uint32_t>(p0));
    par_.push_back(static_cast<uint32_t>(p1));
    pbeg_.push_back(static_cast<uint32_t>(par_.size()));
    abeg_.push_back(static_cast<uint32_t>(aux_.size()));
    return {v, id, this};
  }
  DiffValue record_n(Op op, double v, std::span<const int32_t> parents,
                     std::span<const double> aux = {}) {
    const int32_t id = new_node(v, op);
    for (int32_t p : parents) par_.push_back(static_cast<uint32_t>(p));
    pbeg_.push_back(static_cast<uint32_t>(par_.size()));
    for (double a : aux) aux_.push_back(a);
    abeg_.push_back(static_cast<uint32_t>(aux_.size()));
    return {v, id, this};
  }

 private:
  int32_t new_node(double v, Op op) {
    val_.push_back(v);
    op_.push_back(op);
    return static_cast<int32_t>(val_.size()) - 1;
  }

  std::vector<double> val_;
  std::vector<Op> op_;
  std::vector<uint32_t> pbeg_;  // size()+1 prefix offsets into par_
  std::vector<uint32_t> par_;
  std::vector<uint32_t> abeg_;  // size()+1 prefix offsets into aux_
  std::vector<double> aux_;
};

namespace detail {
// Picks the tape shared by the operands; both-constant cases are folded
// before this is reached.
inline Tape* tape_of(const DiffValue& a, const DiffValue& b) {
  if (a.tape && b.tape && a.tape != b.tape)
    throw DiffError("operands live on different tapes", a.id);
  return a.tape ? a.tape : b.tape;
}
inline DiffValue ensure_node(const DiffValue& x, Tape& t) {
  return x.is_const() ? t.input(x.v) : x;
}
}  // namespace detail

// --- arithmetic ---

inline DiffValue operator+(const DiffValue& a, const DiffValue& b) {
  if (a.is_const() && b.is_const()) return {a.v + b.v};
  if (a.is_const()) return b.tape->record1aux(Op::kAddC, a.v + b.v, b.id, a.v);
  if (b.is_const()) return a.tape->record1aux(Op::kAddC, a.v + b.v, a.id, b.v);
  return detail::tape_of(a, b)->record2(Op::kAdd, a.v + b.v, a.id, b.id);
}

inline DiffValue operator-(const DiffValue& a) {
  if (a.is_const()) return {-a.v};
  return a.tape->record1(Op::kNeg, -a.v, a.id);
}

inline DiffValue operator-(const DiffValue& a, const DiffValue& b) {
  if (a.is_const() && b.is_const()) return {a.v - b.v};
  if (b.is_const()) return a.tape->record1aux(Op::kAddC, a.v - b.v, a.id, -b.v);
  if (a.is_const()) {
    const DiffValue nb = -b;
    return b.tape->record1aux(Op::kAddC, a.v - b.v, nb.id, a.v);
  }
  return detail::tape_of(a, b)->record2(Op::kSub, a.v - b.v, a.id, b.id);
}

inline DiffValue operator*(const DiffValue& a, const DiffValue& b) {
  if (a.is_const() && b.is_const()) return {a.v * b.v};
  if (a.is_const()) return b.tape->record1aux(Op::kMulC, a.v * b.v, b.id, a.v);
  if (b.is_const()) return a.tape->record1aux(Op::kMulC, a.v * b.v, a.id, b.v);
  return detail::tape_of(a, b)->record2(Op::kMul, a.v * b.v, a.id, b.id);
}

inline DiffValue operator/(const DiffValue& a, const DiffValue& b) {
  if (b.v == 0.0) throw DiffError("division by zero", b.id);
  if (a.is_const() && b.is_const()) return {a.v / b.v};
  if (b.is_const()) {
    const double inv = 1.0 / b.v;  // value matches what replay recomputes
    return a.tape->record1aux(Op::kMulC, a.v * inv, a.id, inv);
  }
  Tape& t = *b.tape;
  const DiffValue an = detail::ensure_node(a, t);
  return t.record2(Op::kDiv, an.v / b.v, an.id, b.id);
}

inline DiffValue operator+(const DiffValue& a, double c) { return a + DiffValue(c); }
inline DiffValue operator+(double c, const DiffValue& a) { return DiffValue(c) + a; }
inline DiffValue operator-(const DiffValue& a, double c) { return a - DiffValue(c); }
inline DiffValue operator-(double c, const DiffValue& a) { return DiffValue(c) - a; }
inline DiffValue operator*(const DiffValue& a, double c) { return a * DiffValue(c); }
inline DiffValue operator*(double c, const DiffValue& a) { return DiffValue(c) * a; }
inline DiffValue operator/(const DiffValue& a, double c) { return a / DiffValue(c); }
inline DiffValue operator/(double c, const DiffValue& a) { return DiffValue(c) / a; }

// --- elementwise functions ---

inline DiffValue sqrt(const DiffValue& a) {
  if (a.v < 0.0) throw DiffError("sqrt of negative value", a.id);
  if (a.is_const()) return {std::sqrt(a.v)};
  return a.tape->record1(Op::kSqrt, std::sqrt(a.v), a.id);
}
inline DiffValue tan(const DiffValue& a) {
  if (a.is_const()) return {std::tan(a.v)};
  return a.tape->record1(Op::kTan, std::tan(a.v), a.id);
}
inline DiffValue atan(const DiffValue& a) {
  if (a.is_const()) return {std::atan(a.v)};
  return a.tape->record1(Op::kAtan, std::atan(a.v), a.id);
}
inline DiffValue atan2(const DiffValue& y, const DiffValue& x) {
  if (y.is_const() && x.is_const()) return {std::atan2(y.v, x.v)};
  Tape& t = *detail::tape_of(y, x);
  const DiffValue yn = detail::ensure_node(y, t);
  const DiffValue xn = detail::ensure_node(x, t);
  return t.record2(Op::kAtan2, std::atan2(yn.v, xn.v), yn.id, xn.id);
}
inline DiffValue sin(const DiffValue& a) {
  if (a.is_const()) return {std::sin(a.v)};
  return a.tape->record1(Op::kSin, std::sin(a.v), a.id);
}
inline DiffValue cos(const DiffValue& a) {
  if (a.is_const()) return {std::cos(a.v)};
  return a.tape->record1(Op::kCos, std::cos(a.v), a.id);
}
inline DiffValue tanh(const DiffValue& a) {
  if (a.is_const()) return {std::tanh(a.v)};
  return a.tape->record1(Op::kTanh, std::tanh(a.v), a.id);
}
inline DiffValue sigmoid(const DiffValue& a) {
  if (a.is_const()) return {sigmoid(a.v)};
  return a.tape->record1(Op::kSigmoid, sigmoid(a.v), a.id);
}
inline DiffValue exp(const DiffValue& a) {
  if (a.is_const()) return {std::exp(a.v)};
  return a.tape->record1(Op::kExp, std::exp(a.v), a.id);
}
inline DiffValue pow(const DiffValue& a, double c) {
  const double v = std::pow(a.v, c);
  if (!std::isfinite(v)) throw DiffError("pow produced a non-finite value", a.id);
  if (a.is_const()) return {v};
  return a.tape->record1aux(Op::kPowC, v, a.id, c);
}

// Branch-selecting max/min/abs: the selected input is returned as-is, so
// the gradient flows through exactly that branch. Ties pick the first
// argument, which keeps subgradients deterministic.
inline DiffValue max(const DiffValue& a, const DiffValue& b) {
  return a.v >= b.v ? a : b;
}
inline DiffValue min(const DiffValue& a, const DiffValue& b) {
  return a.v <= b.v ? a : b;
}
inline DiffValue abs(const DiffValue& a) { return a.v >= 0.0 ? a : -a; }

// --- fused n-ary ops ---

// b + sum_i w_i x_i. All operands must live on `t`; constants are lifted.
DiffValue affine(Tape& t, std::span<const DiffValue> w, std::span<const DiffValue> x,
                 const DiffValue& b);

// Euclidean norm of the inputs.
DiffValue norm(Tape& t, std::span<const DiffValue> xs);

inline DiffValue norm2(const DiffValue& dx, const DiffValue& dy) {
  return sqrt(dx * dx + dy * dy);
}
inline double norm2(double dx, double dy) { return std::sqrt(dx * dx + dy * dy); }

// --- 6x6 linear solve (adjoint rule) ---

// Plain kernel: solves A x = b, optionally reporting A^-1 and the 1-norm
// condition estimate. Throws SolveError on singular or ill-conditioned
// systems (cond > cond_limit).
void lu_solve6(const double* A, const double* b, double* x, double* A_inv,
               double* cond, double cond_limit = 1e12);

std::array<double, 6> solve6(const std::array<double, 36>& A,
                             const std::array<double, 6>& b,
                             double cond_limit = 1e12);

// Tape variant: records one lane per solution component; backward applies
// b_bar = A^-T x_bar and A_bar = -b_bar x^T.
std::array<DiffValue, 6> solve6(Tape& t, const std::array<DiffValue, 36>& A,
                                const std::array<DiffValue, 6>& b,
                                double cond_limit = 1e12);

}  // namespace splineplan
