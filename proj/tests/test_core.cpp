#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kfpso/core.hpp"

using namespace kfpso;

TEST_CASE("mix64 is the SplitMix64 finalizer") {
  // First SplitMix64 output for state 0, a widely published constant.
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("rng streams are keyed by seed and stream id") {
  RngStream a(1, 0), b(1, 0), c(1, 1), d(2, 0);
  const auto a0 = a.next_u64();
  CHECK(a0 == b.next_u64());
  CHECK(a0 != c.next_u64());
  CHECK(a0 != d.next_u64());

  // Frozen so that a change to seeding shows up as a test failure.
  RngStream g(1, 0);
  CHECK(g.next_u64() == 14536455954668880700ULL);
  CHECK(g.next_u64() == 3870256024693021210ULL);
}

TEST_CASE("the engine is the standard mt19937_64") {
  // 10000th output of a default-constructed engine, fixed by the standard.
  std::mt19937_64 e;
  e.discard(9999);
  CHECK(e() == 9981545732273789042ULL);
}

TEST_CASE("fork depends on key and tag only") {
  RngStream fresh(1, 0);
  RngStream used(1, 0);
  for (int i = 0; i < 17; ++i) used.uniform();
  auto f1 = fresh.fork(5);
  auto f2 = used.fork(5);
  CHECK(f1.next_u64() == f2.next_u64());
  CHECK(RngStream(1, 0).fork(5).next_u64() == 15179676727803149884ULL);
  CHECK(RngStream(1, 0).fork(5).next_u64() != RngStream(1, 0).fork(6).next_u64());
}

TEST_CASE("uniform draws stay in range") {
  RngStream r(9, 3);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));

  for (int i = 0; i < 1000; ++i) {
    const double v = r.uniform(-3.0, 5.0);
    REQUIRE(v >= -3.0);
    REQUIRE(v < 5.0);
  }
}

TEST_CASE("uniform_int is inclusive and roughly flat") {
  RngStream r(4, 4);
  std::vector<int> counts(29, 0);
  const int n = 29000;
  for (int i = 0; i < n; ++i) {
    const auto v = r.uniform_int(2, 30);
    REQUIRE(v >= 2);
    REQUIRE(v <= 30);
    ++counts[static_cast<std::size_t>(v - 2)];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  // 28 degrees of freedom; 99.9th percentile is about 56.9.
  CHECK(chi2 < 56.9);
  CHECK(r.uniform_int(7, 7) == 7);
  CHECK_THROWS(r.uniform_int(3, 2));
}

TEST_CASE("search space validation") {
  CHECK_THROWS_AS(SearchSpace(Vector(0), Vector(0)), Error);
  CHECK_THROWS_AS(SearchSpace(Vector::Zero(2), Vector::Ones(3)), Error);
  CHECK_THROWS_AS(SearchSpace::cube(2, 1.0, 1.0), Error);
  CHECK_THROWS_AS(SearchSpace::cube(2, 1.0, -1.0), Error);
  CHECK_THROWS_AS(SearchSpace::cube(1, 0.0, INFINITY), Error);

  const auto s = SearchSpace::cube(3, -2.0, 4.0);
  CHECK(s.dim() == 3);
  CHECK(s.center().isApproxToConstant(1.0));
  CHECK(s.width().isApproxToConstant(6.0));
  CHECK(s.contains(Vector::Constant(3, 4.0)));
  CHECK_FALSE(s.strictly_contains(Vector::Constant(3, 4.0)));
  CHECK(s.strictly_contains(Vector::Zero(3)));
  CHECK_FALSE(s.contains(Vector::Zero(2)));
}

TEST_CASE("clamp_to_bounds") {
  const auto s = SearchSpace::cube(3, -1.0, 1.0);
  Vector x(3);
  x << -5.0, 0.25, 7.0;
  const Vector c = clamp_to_bounds(x, s);
  CHECK(c[0] == -1.0);
  CHECK(c[1] == 0.25);
  CHECK(c[2] == 1.0);

  RngStream r(5, 5);
  for (int i = 0; i < 200; ++i) {
    Vector y(3);
    for (Index d = 0; d < 3; ++d) y[d] = r.uniform(-10.0, 10.0);
    const Vector z = clamp_to_bounds(y, s);
    REQUIRE(s.contains(z));
    // Idempotent.
    REQUIRE(clamp_to_bounds(z, s) == z);
  }
  CHECK_THROWS_AS(clamp_to_bounds(Vector::Zero(2), s), Error);
}

TEST_CASE("init_swarm draws inside the box") {
  const auto s = SearchSpace(Vector::Constant(4, -1.0), Vector::Constant(4, 3.0));
  RngStream r(11, 0);
  const Swarm sw = init_swarm(s, 50, r);
  CHECK(sw.size() == 50);
  CHECK(sw.dim() == 4);
  CHECK(sw.iteration == 0);
  for (Index i = 0; i < sw.size(); ++i) {
    REQUIRE(s.contains(sw.positions.row(i).transpose()));
    REQUIRE((sw.velocities.row(i).array().abs() <= 2.0).all());
    REQUIRE(std::isinf(sw.personal_best_fitness[i]));
  }
  CHECK(sw.personal_best == sw.positions);

  RngStream again(11, 0);
  CHECK(init_swarm(s, 50, again).positions == sw.positions);

  RngStream bad(1, 1);
  CHECK_THROWS_WITH_AS(init_swarm(s, 1, bad), doctest::Contains("swarm too small"), Error);
}

TEST_CASE("update_bests keeps best fitness monotone") {
  const auto s = SearchSpace::cube(2, -1.0, 1.0);
  RngStream r(2, 2);
  Swarm sw = init_swarm(s, 6, r);
  double last_global = -INFINITY;
  Vector last_personal = sw.personal_best_fitness;
  for (int t = 0; t < 30; ++t) {
    Vector f(6);
    for (Index i = 0; i < 6; ++i) {
      sw.positions.row(i) << r.uniform(-1, 1), r.uniform(-1, 1);
      f[i] = -sw.positions.row(i).squaredNorm();
    }
    sw.update_bests(f);
    REQUIRE(sw.global_best_fitness >= last_global);
    REQUIRE((sw.personal_best_fitness.array() >= last_personal.array()).all());
    REQUIRE(sw.global_best_fitness == sw.personal_best_fitness.maxCoeff());
    last_global = sw.global_best_fitness;
    last_personal = sw.personal_best_fitness;
  }
  CHECK(-sw.global_best.squaredNorm() == sw.global_best_fitness);
  CHECK_THROWS_AS(sw.update_bests(Vector::Zero(5)), Error);
}

TEST_CASE("spread around global best") {
  Swarm sw;
  sw.positions.resize(3, 2);
  sw.positions << 0, 0, 3, 4, 1, 0;
  sw.velocities = PointMatrix::Zero(3, 2);
  sw.personal_best = sw.positions;
  sw.personal_best_fitness = Vector::Zero(3);
  sw.global_best = Vector::Zero(2);
  CHECK(sw.spread_around_global_best() == doctest::Approx(5.0));
  const Particle p = sw.particle(1);
  CHECK(p.position[0] == 3.0);
}
