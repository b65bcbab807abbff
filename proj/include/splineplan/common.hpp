#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace splineplan {

constexpr double kPi = 3.14159265358979323846;

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

template <class T>
struct Vec2T {
  T x{};
  T y{};
};

using Vec2 = Vec2T<double>;

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a.x, s * a.y}; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(a.x * a.x + a.y * a.y); }

template <class T>
struct PoseT {
  Vec2T<T> position;
  T heading{};  // radians
};

// World pose; heading kept in (-pi, pi].
struct Pose2 {
  Vec2 position;
  double heading = 0.0;

  Pose2() = default;
  Pose2(double x, double y, double th) : position{x, y}, heading(wrap_angle(th)) {}
  Pose2(const Vec2& p, double th) : position(p), heading(wrap_angle(th)) {}

  // Expresses a world point in this pose's local frame.
  Vec2 to_local(const Vec2& p) const {
    const double c = std::cos(heading), s = std::sin(heading);
    const Vec2 d = p - position;
    return {c * d.x + s * d.y, -s * d.x + c * d.y};
  }
  Vec2 to_world(const Vec2& p) const {
    const double c = std::cos(heading), s = std::sin(heading);
    return {position.x + c * p.x - s * p.y, position.y + s * p.x + c * p.y};
  }
};

// Error taxonomy: configuration/input problems vs numeric failures the
// planners must be able to tell apart.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolveError : std::runtime_error {
  double condition = 0.0;
  explicit SolveError(const std::string& what, double cond = 0.0)
      : std::runtime_error(what), condition(cond) {}
};
struct OvershootError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic PRNG. Distributions are hand-rolled on top of the raw
// 64-bit stream so outputs do not depend on the standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : s_(splitmix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  uint64_t next_u64() {
    // xorshift128+ seeded via splitmix64
    uint64_t x = s_[0];
    const uint64_t y = s_[1];
    s_[0] = y;
    x ^= x << 23;
    s_[1] = x ^ y ^ (x >> 17) ^ (y >> 26);
    return s_[1] + y;
  }

  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }  // [0,1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }
  double normal() {  // Box-Muller, one value per call
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Derives an independent stream, e.g. one per task index.
  Rng fork(uint64_t salt) const {
    return Rng(s_[0] ^ (0x632be59bd9b4e019ull * (salt + 1)) ^ s_[1]);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = next_u64() % i;
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::array<uint64_t, 2> splitmix(uint64_t seed) {
    std::array<uint64_t, 2> out{};
    for (auto& v : out) {
      seed += 0x9e3779b97f4a7c15ull;
      uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      v = z ^ (z >> 31);
    }
    if (out[0] == 0 && out[1] == 0) out[0] = 1;
    return out;
  }

  std::array<uint64_t, 2> s_;
};

inline double val(double x) { return x; }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace splineplan
