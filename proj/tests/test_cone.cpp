#include <doctest.h>

#include <cmath>
#include <random>

#include "polyharm/cone.hpp"
#include "polyharm/random.hpp"

using namespace polyharm;

namespace {

const TargetSpace kS2 = TargetSpace::sphere(2);

TargetPoint s2(double x, double y, double z) {
  const double v[3] = {x, y, z};
  return TargetPoint::vector(v);
}

TargetPoint random_s2(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  double x = g(rng), y = g(rng), z = g(rng);
  const double n = std::sqrt(x * x + y * y + z * z);
  return s2(x / n, y / n, z / n);
}

}  // namespace

TEST_CASE("cone distance") {
  const TargetPoint p = s2(1, 0, 0), q = s2(0, 1, 0);
  CHECK(cone_distance(kS2, {p, 1}, {q, 1}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cone_distance(kS2, {p, 1}, {q, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cone_distance(kS2, {p, 0.7}, {q, 0}) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(cone_distance(kS2, {p, 2}, {p, 3}) == doctest::Approx(1.0).epsilon(1e-15));
  // Bases further apart than pi meet through the apex.
  CHECK(cone_distance(kS2, {p, 1}, {s2(-1, 0, 0), 2}) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("cone apex points are equal regardless of base") {
  CHECK(cone_equal({s2(1, 0, 0), 0}, {s2(0, 0, 1), 0}));
  CHECK_FALSE(cone_equal({s2(1, 0, 0), 1}, {s2(0, 0, 1), 1}));
}

TEST_CASE("cone interpolation") {
  const TargetPoint p = s2(1, 0, 0), q = s2(0, 1, 0);
  const ConePoint a{p, 1}, b{q, 1};
  CHECK(cone_equal(cone_interpolate(kS2, a, b, 0.0), a));
  const ConePoint ray = cone_interpolate(kS2, {p, 1}, {p, 3}, 0.5);
  CHECK(ray.height == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(distance(kS2, ray.base, p) < 1e-15);

  // Unrolled sector: (1, 0) and (0, 1) have midpoint (1/2, 1/2).
  const ConePoint m = cone_interpolate(kS2, a, b, 0.5);
  CHECK(m.height == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(distance(kS2, m.base, s2(std::sqrt(0.5), std::sqrt(0.5), 0)) < 1e-14);
  CHECK(cone_distance(kS2, a, m) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(cone_distance(kS2, m, b) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("property: cone geodesics realize distances") {
  auto rng = make_rng(21, 0, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0), h(0.0, 2.0);
  for (int k = 0; k < 5000; ++k) {
    const ConePoint a{random_s2(rng), h(rng)}, b{random_s2(rng), h(rng)};
    const double t = u(rng), d = cone_distance(kS2, a, b);
    const ConePoint m = cone_interpolate(kS2, a, b, t);
    CHECK(std::abs(cone_distance(kS2, a, m) - t * d) < 1e-10);
    CHECK(std::abs(cone_distance(kS2, m, b) - (1 - t) * d) < 1e-10);
  }
}

TEST_CASE("projection to the unit section") {
  const TargetPoint p = s2(0, 0, 1);
  const ConePoint pr = project_unit({p, 2});
  CHECK(pr.height == 1.0);
  CHECK(distance(kS2, pr.base, p) == 0.0);
  CHECK(cone_equal(project_unit(pr), pr));
}

TEST_CASE("property: lifted distance band and small-angle limit") {
  auto rng = make_rng(22, 0, 0);
  for (int k = 0; k < 20000; ++k) {
    const TargetPoint p = random_s2(rng), q = random_s2(rng);
    const double d = distance(kS2, p, q);
    const double big = cone_distance(kS2, lift(p), lift(q));
    CHECK(std::abs(big * big - lifted_distance_sq(d)) < 1e-12);
    if (d < kPi / 2 && d > 1e-6) {
      const double r = big * big / (d * d);
      CHECK(r >= 0.5);
      CHECK(r <= 1.0 + 1e-12);
    }
    if (d < 0.5) CHECK(d * d * (1 - d * d) <= big * big + 1e-15);
  }
  for (double d : {1e-2, 1e-3, 1e-4}) {
    CHECK(lifted_distance_sq(d) / (d * d) == doctest::Approx(1.0).epsilon(d * d));
  }
}

TEST_CASE("property: projection lower bound") {
  auto rng = make_rng(23, 0, 0);
  std::uniform_real_distribution<double> h(0.5, 2.0);
  for (int k = 0; k < 20000; ++k) {
    const ConePoint a{random_s2(rng), h(rng)}, b{random_s2(rng), h(rng)};
    const double lhs = std::pow(cone_distance(kS2, a, b), 2);
    const double rhs = a.height * b.height *
                       std::pow(cone_distance(kS2, project_unit(a), project_unit(b)), 2);
    CHECK(lhs >= rhs - 1e-12);
  }
}
