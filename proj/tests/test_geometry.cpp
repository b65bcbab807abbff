#include "splineplan/geometry.hpp"

#include "doctest.h"
#include "splineplan/tape.hpp"
#include "test_util.hpp"

using namespace splineplan;
using namespace testutil;

TEST_CASE("quadrangle construction canonicalizes to CCW and rejects bad input") {
  const Quadrangle ccw({Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}});
  const Quadrangle cw({Vec2{0, 0}, Vec2{0, 1}, Vec2{1, 1}, Vec2{1, 0}});
  CHECK(ccw.area() == doctest::Approx(1.0));
  CHECK(cw.area() == doctest::Approx(1.0));
  CHECK(cw.vertex(0).x == 0.0);  // first vertex preserved

  CHECK_THROWS_AS(Quadrangle({Vec2{0, 0}, Vec2{1, 0}, Vec2{2, 0}, Vec2{0, 1}}),
                  ConfigError);  // collinear
  CHECK_THROWS_AS(Quadrangle({Vec2{0, 0}, Vec2{2, 0}, Vec2{0.4, 0.4}, Vec2{0, 2}}),
                  ConfigError);  // non-convex
}

TEST_CASE("containment includes the boundary") {
  const auto q = unit_square();
  CHECK(contains(q, {0.5, 0.5}));
  CHECK_FALSE(contains(q, {2.0, 0.5}));
  CHECK(contains(q, {1.0, 0.5}));
}

TEST_CASE("distance to quadrangle matches hand values") {
  const auto q = unit_square();
  CHECK(dist_to_quad<double>(q, {0.5, 0.5}) == 0.0);
  CHECK(dist_to_quad<double>(q, {2.0, 0.5}) == doctest::Approx(1.0));
  CHECK(dist_to_quad<double>(q, {2.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("freespace distance basics") {
  const Quadrangle a = unit_square();
  const Quadrangle b({Vec2{1, 0}, Vec2{2, 0}, Vec2{2, 1}, Vec2{1, 1}});
  const FreeSpace fs({a, b});
  CHECK(dist_to_freespace<double>(fs, {1.5, 0.5}) == 0.0);
  const FreeSpace one({a});
  CHECK(dist_to_freespace<double>(one, {-1.0, 0.5}) == doctest::Approx(1.0));
}

TEST_CASE("freespace distance agrees with dense boundary-sampling oracle") {
  Rng rng(42);
  std::vector<Quadrangle> quads;
  for (int i = 0; i < 3; ++i)
    quads.push_back(random_quad(rng, {rng.uniform(-4, 4), rng.uniform(-4, 4)},
                                rng.uniform(1.0, 3.0)));
  const FreeSpace fs(quads);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p{rng.uniform(-8, 8), rng.uniform(-8, 8)};
    const double got = dist_to_freespace<double>(fs, p);
    const double want = dist_oracle(quads, p);
    CHECK(std::abs(got - want) < 1e-3);
    // also equals the min over per-quad distances
    double per_quad = std::numeric_limits<double>::infinity();
    for (const auto& q : quads) per_quad = std::min(per_quad, dist_to_quad<double>(q, p));
    CHECK(got == doctest::Approx(per_quad).epsilon(1e-12));
  }
}

TEST_CASE("zero distance iff contained in some quad") {
  Rng rng(7);
  std::vector<Quadrangle> quads;
  for (int i = 0; i < 3; ++i)
    quads.push_back(random_quad(rng, {rng.uniform(-3, 3), rng.uniform(-3, 3)}, 2.0));
  const FreeSpace fs(quads);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p{rng.uniform(-6, 6), rng.uniform(-6, 6)};
    const bool inside = fs.contains(p);
    const double d = dist_to_freespace<double>(fs, p);
    CHECK((d == 0.0) == inside);
  }
}

TEST_CASE("dist_to_quad is 1-Lipschitz") {
  Rng rng(11);
  const auto q = random_quad(rng, {0, 0}, 2.0);
  for (int i = 0; i < 300; ++i) {
    const Vec2 p1{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Vec2 p2{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double d1 = dist_to_quad<double>(q, p1);
    const double d2 = dist_to_quad<double>(q, p2);
    CHECK(std::abs(d1 - d2) <= norm(p1 - p2) + 1e-12);
  }
}

TEST_CASE("dist_to_quad invariant under joint rigid transform") {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const auto q = random_quad(rng, {rng.uniform(-2, 2), rng.uniform(-2, 2)}, 1.5);
    const Vec2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Rigid t = random_rigid(rng);
    const double d0 = dist_to_quad<double>(q, p);
    const double d1 = dist_to_quad<double>(t.apply(q), t.apply(p));
    CHECK(std::abs(d0 - d1) < 1e-9);
  }
}

TEST_CASE("distance gradient matches finite differences at generic points") {
  Rng rng(17);
  const auto q = random_quad(rng, {0, 0}, 2.0);
  int checked = 0;
  for (int i = 0; i < 400 && checked < 50; ++i) {
    const Vec2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double d = dist_to_quad<double>(q, p);
    if (d < 1e-3) continue;
    // skip near-degenerate branch ties: compare the two closest features
    std::vector<double> feature_d;
    for (int e = 0; e < 4; ++e) {
      const Vec2 a = q.vertex(e), b = q.vertex((e + 1) % 4);
      const Vec2 ab = b - a;
      const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
      feature_d.push_back(norm(p - (a + t * ab)));
    }
    std::sort(feature_d.begin(), feature_d.end());
    if (feature_d[1] - feature_d[0] < 1e-3) continue;
    ++checked;

    Tape tape;
    const Vec2T<DiffValue> pd{tape.input(p.x), tape.input(p.y)};
    const DiffValue dist = dist_to_quad<DiffValue>(q, pd);
    std::vector<double> adj;
    tape.backward(dist, adj);
    const auto fd = fd_gradient(
        [&](const std::vector<double>& x) {
          return dist_to_quad<double>(q, {x[0], x[1]});
        },
        {p.x, p.y});
    CHECK(close_rel(adj[pd.x.id], fd[0], 1e-4, 1e-7));
    CHECK(close_rel(adj[pd.y.id], fd[1], 1e-4, 1e-7));
  }
  CHECK(checked == 50);
}

TEST_CASE("freespace validation limits") {
  CHECK_THROWS_AS(FreeSpace({}), ConfigError);
}
