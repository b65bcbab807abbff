#include "splineplan/tape.hpp"

#include "doctest.h"
#include "splineplan/adam.hpp"
#include "test_util.hpp"

using namespace splineplan;
using namespace testutil;

TEST_CASE("basic forward values and gradients") {
  Tape t;
  SUBCASE("product") {
    const DiffValue x = t.input(2.0), y = t.input(3.0);
    const DiffValue z = x * y;
    CHECK(z.v == 6.0);
    auto adj = t.gradient(z);
    CHECK(adj[x.id] == 3.0);
    CHECK(adj[y.id] == 2.0);
  }
  SUBCASE("square at 3") {
    const DiffValue x = t.input(3.0);
    const DiffValue f = x * x;
    CHECK(t.gradient(f)[x.id] == 6.0);
  }
  SUBCASE("tanh at 0") {
    const DiffValue x = t.input(0.0);
    CHECK(t.gradient(tanh(x))[x.id] == 1.0);
  }
}

TEST_CASE("max/min/abs use branch-selection subgradients with ties to first") {
  Tape t;
  const DiffValue a = t.input(2.0), b = t.input(2.0);
  const DiffValue m = max(a, b);
  auto adj = t.gradient(m);
  CHECK(adj[a.id] == 1.0);  // tie goes to the first argument
  CHECK(adj[b.id] == 0.0);

  const DiffValue c = t.input(-1.5);
  auto adj2 = t.gradient(abs(c));
  CHECK(adj2[c.id] == -1.0);

  const DiffValue d = t.input(5.0);
  const DiffValue mn = min(d, DiffValue(1.0));
  CHECK(mn.is_const());  // constant branch selected, no gradient path
}

TEST_CASE("errors carry node provenance") {
  Tape t;
  const DiffValue x = t.input(-4.0);
  CHECK_THROWS_AS((void)sqrt(x), DiffError);
  const DiffValue z = t.input(0.0);
  CHECK_THROWS_AS((void)(DiffValue(1.0) / z), DiffError);
}

TEST_CASE("all elementwise ops match finite differences") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> x0 = {rng.uniform(0.3, 2.0), rng.uniform(-1.2, -0.2),
                                    rng.uniform(0.2, 1.2)};
    const auto f = [](const auto& make, const std::vector<double>& in) {
      auto a = make(in[0]), b = make(in[1]), c = make(in[2]);
      auto r = a * b + a / c - b * 3.5 + sin(a) * cos(b) + tan(c * 0.3) +
               exp(b) + sqrt(a) + pow(a, 1.5) + tanh(b) + sigmoid(a - 1.0) +
               atan(b) + atan2(b, a) + (2.0 - a) + 1.0 / c;
      return r;
    };
    Tape t;
    const DiffValue out = f([&](double v) { return t.input(v); }, x0);
    std::vector<double> adj;
    t.backward(out, adj);
    const auto fd = fd_gradient(
        [&](const std::vector<double>& in) {
          return f([](double v) { return v; }, in);
        },
        x0);
    for (int i = 0; i < 3; ++i) CHECK(close_rel(adj[i], fd[i], 1e-4, 1e-6));
    CHECK(t.replay_max_dev() == 0.0);
  }
}

TEST_CASE("affine and norm ops match finite differences") {
  Rng rng(31);
  constexpr int n = 7;
  std::vector<double> x0;
  for (int i = 0; i < 2 * n + 1; ++i) x0.push_back(rng.uniform(-1, 1));
  const auto eval = [&](const std::vector<double>& in) {
    double acc = in[2 * n];
    for (int i = 0; i < n; ++i) acc += in[i] * in[n + i];
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm += in[i] * in[i];
    return acc + std::sqrt(nrm);
  };
  Tape t;
  std::vector<DiffValue> w, x;
  for (int i = 0; i < n; ++i) w.push_back(t.input(x0[i]));
  for (int i = 0; i < n; ++i) x.push_back(t.input(x0[n + i]));
  const DiffValue b = t.input(x0[2 * n]);
  const DiffValue out = affine(t, w, x, b) + norm(t, w);
  CHECK(out.v == doctest::Approx(eval(x0)));
  std::vector<double> adj;
  t.backward(out, adj);
  const auto fd = fd_gradient(eval, x0);
  for (int i = 0; i < 2 * n + 1; ++i) CHECK(close_rel(adj[i], fd[i], 1e-4, 1e-6));
}

TEST_CASE("6x6 solve adjoint matches finite differences") {
  Rng rng(37);
  std::vector<double> x0;
  for (int i = 0; i < 42; ++i) x0.push_back(rng.uniform(-2, 2));
  // keep the matrix comfortably nonsingular
  for (int i = 0; i < 6; ++i) x0[i * 6 + i] += 6.0;

  const auto eval = [](const std::vector<double>& in) {
    std::array<double, 36> A;
    std::array<double, 6> b;
    std::copy_n(in.begin(), 36, A.begin());
    std::copy_n(in.begin() + 36, 6, b.begin());
    const auto x = solve6(A, b);
    double acc = 0.0;
    for (int i = 0; i < 6; ++i) acc += (i + 1) * x[i] * x[i];
    return acc;
  };

  Tape t;
  std::array<DiffValue, 36> A;
  std::array<DiffValue, 6> b;
  for (int i = 0; i < 36; ++i) A[i] = t.input(x0[i]);
  for (int i = 0; i < 6; ++i) b[i] = t.input(x0[36 + i]);
  const auto x = solve6(t, A, b);
  DiffValue out(0.0);
  for (int i = 0; i < 6; ++i) out = out + double(i + 1) * x[i] * x[i];
  std::vector<double> adj;
  t.backward(out, adj);
  const auto fd = fd_gradient(eval, x0);
  for (int i = 0; i < 42; ++i) CHECK(close_rel(adj[i], fd[i], 1e-4, 1e-6));
  CHECK(t.replay_max_dev() == 0.0);
}

TEST_CASE("solve6 rejects singular and ill-conditioned systems") {
  std::array<double, 36> A{};
  std::array<double, 6> b{};
  CHECK_THROWS_AS((void)solve6(A, b), SolveError);
  for (int i = 0; i < 6; ++i) A[i * 6 + i] = (i == 5) ? 1e-14 : 1.0;
  b[0] = 1.0;
  CHECK_THROWS_AS((void)solve6(A, b, 1e12), SolveError);
}

TEST_CASE("backward is deterministic, bitwise") {
  const auto run = [] {
    Tape t;
    Rng rng(77);
    std::vector<DiffValue> xs;
    for (int i = 0; i < 64; ++i) xs.push_back(t.input(rng.uniform(-1, 1)));
    DiffValue acc(0.0);
    for (int i = 0; i < 64; ++i) acc = acc + sin(xs[i]) * xs[(i + 7) % 64];
    return t.gradient(acc);
  };
  const auto g1 = run(), g2 = run();
  REQUIRE(g1.size() == g2.size());
  for (size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);
}

TEST_CASE("adam optimizer") {
  SUBCASE("first step moves by about lr in the gradient sign direction") {
    AdamState st(1, 0.1);
    std::vector<double> p{0.0};
    CHECK(adam_step(st, p, {0.5}));
    CHECK(p[0] == doctest::Approx(-0.1).epsilon(1e-6));
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    AdamState st(2, 0.1);
    std::vector<double> p{1.0, -2.0};
    CHECK(adam_step(st, p, {0.0, 0.0}));
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);
  }
  SUBCASE("non-finite gradient skips the update") {
    AdamState st(1, 0.1);
    std::vector<double> p{1.0};
    CHECK_FALSE(adam_step(st, p, {std::numeric_limits<double>::quiet_NaN()}));
    CHECK(p[0] == 1.0);
    CHECK(st.step == 0);
  }
  SUBCASE("minimizes (w-3)^2 from 0 within 100 steps at lr 0.1") {
    AdamState st(1, 0.1);
    std::vector<double> w{0.0};
    for (int i = 0; i < 100; ++i) {
      const double g = 2.0 * (w[0] - 3.0);
      adam_step(st, w, {g});
    }
    CHECK(std::abs(w[0] - 3.0) < 0.05);
  }
}

TEST_CASE("tape replay reproduces forward values exactly") {
  Tape t;
  Rng rng(99);
  std::vector<DiffValue> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(t.input(rng.uniform(0.1, 2.0)));
  DiffValue acc(1.0);
  for (auto& x : xs) acc = acc * sigmoid(x) + sqrt(x) - tanh(acc * 0.25);
  CHECK(t.replay_max_dev() == 0.0);
}
