#include <doctest.h>

#include <cmath>
#include <random>

#include "polyharm/random.hpp"
#include "polyharm/targets.hpp"

using namespace polyharm;

namespace {

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

// Point at geodesic distance t from the north pole in direction angle a.
TargetPoint polar(double t, double a) {
  return s2(std::sin(t) * std::cos(a), std::sin(t) * std::sin(a), std::cos(t));
}

}  // namespace

TEST_CASE("sphere distance") {
  const TargetSpace s = TargetSpace::sphere(2);
  CHECK(distance(s, s2(1, 0, 0), s2(0, 1, 0)) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(distance(s, s2(1, 0, 0), s2(1, 0, 0)) == 0.0);
  CHECK(distance(s, s2(1, 0, 0), s2(-1, 0, 0)) == doctest::Approx(kPi).epsilon(1e-15));
  // Tiny separations keep full relative precision.
  const double eps = 1e-9;
  CHECK(distance(s, s2(1, 0, 0), s2(std::cos(eps), std::sin(eps), 0)) ==
        doctest::Approx(eps).epsilon(1e-12));
}

TEST_CASE("tree distance passes through the branch point") {
  const TargetSpace t = TargetSpace::star(3, 1.0);
  CHECK(distance(t, TargetPoint::on_edge(0, 0.3), TargetPoint::on_edge(1, 0.4)) ==
        doctest::Approx(0.7).epsilon(1e-15));
  CHECK(distance(t, TargetPoint::on_edge(2, 0.3), TargetPoint::on_edge(2, 0.9)) ==
        doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("arc distance and validation") {
  const TargetSpace a = TargetSpace::arc(1.5);
  CHECK(distance(a, TargetPoint::scalar(0.2), TargetPoint::scalar(1.1)) == doctest::Approx(0.9));
  CHECK_THROWS_AS(a.validate(TargetPoint::scalar(1.6)), Error);
  CHECK_THROWS_AS(TargetSpace::arc(4.0), Error);
}

TEST_CASE("sphere interpolation") {
  const TargetSpace s = TargetSpace::sphere(2);
  const TargetPoint p = s2(1, 0, 0), q = s2(0, 1, 0);
  CHECK(interpolate(s, p, q, 0.0) == p);
  CHECK(distance(s, interpolate(s, p, q, 1.0), q) < 1e-15);
  const TargetPoint m = interpolate(s, p, q, 0.5);
  CHECK(m.x[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(m.x[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(std::abs(m.x[2]) < 1e-15);
  const TargetPoint third = interpolate(s, p, q, 1.0 / 3.0);
  CHECK(third.x[0] == doctest::Approx(std::cos(kPi / 6)).epsilon(1e-14));
  CHECK(third.x[1] == doctest::Approx(std::sin(kPi / 6)).epsilon(1e-14));
}

TEST_CASE("property: geodesics realize distances and stay on the sphere") {
  const TargetSpace s = TargetSpace::sphere(2);
  auto rng = make_rng(11, 0, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const TargetPoint p = random_s2(rng), q = random_s2(rng);
    const double d = distance(s, p, q);
    if (d > 3.0) continue;
    const double t = u(rng);
    const TargetPoint m = interpolate(s, p, q, t);
    const double n = std::hypot(m.x[0], m.x[1], m.x[2]);
    CHECK(std::abs(n - 1.0) < 1e-12);
    CHECK(std::abs(distance(s, p, m) - t * d) < 1e-12);
    CHECK(std::abs(distance(s, m, q) - (1 - t) * d) < 1e-12);
  }
}

TEST_CASE("property: tree geodesics realize distances") {
  const TargetSpace t = TargetSpace::star(3, 1.0);
  auto rng = make_rng(12, 0, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> e(0, 2);
  for (int k = 0; k < 2000; ++k) {
    const TargetPoint p = TargetPoint::on_edge(e(rng), u(rng)), q = TargetPoint::on_edge(e(rng), u(rng));
    const double s = u(rng), d = distance(t, p, q);
    const TargetPoint m = interpolate(t, p, q, s);
    CHECK(std::abs(distance(t, p, m) - s * d) < 1e-12);
    CHECK(std::abs(distance(t, m, q) - (1 - s) * d) < 1e-12);
  }
}

TEST_CASE("Frechet mean: trivial cases") {
  const TargetSpace s = TargetSpace::sphere(2);
  const TargetPoint p = s2(1, 0, 0), q = s2(std::cos(1.0), std::sin(1.0), 0);
  const TargetPoint one[] = {p};
  const double w1[] = {3.0};
  CHECK(distance(s, frechet_mean(s, one, w1), p) < 1e-12);
  const TargetPoint two[] = {p, q};
  const double w2[] = {1.0, 1.0};
  CHECK(distance(s, frechet_mean(s, two, w2), interpolate(s, p, q, 0.5)) < 1e-8);
}

TEST_CASE("Frechet mean of a symmetric triangle matches a grid search") {
  const TargetSpace s = TargetSpace::sphere(2);
  const TargetPoint pts[] = {polar(0.2, 0.0), polar(0.2, 2 * kPi / 3), polar(0.2, 4 * kPi / 3)};
  const double w[] = {1.0, 1.0, 1.0};
  const TargetPoint m = frechet_mean(s, pts, w);
  CHECK(distance(s, m, s2(0, 0, 1)) < 1e-8);

  // Unequal weights: compare against brute-force minimization over a
  // 0.001-spaced grid of the cap.
  const double w2[] = {1.0, 2.0, 0.5};
  const TargetPoint m2 = frechet_mean(s, pts, w2);
  double best = 1e300;
  TargetPoint arg;
  for (int i = -200; i <= 200; ++i) {
    for (int j = -200; j <= 200; ++j) {
      const double x = 0.001 * i, y = 0.001 * j;
      const double r = std::hypot(x, y);
      const TargetPoint g = r == 0 ? s2(0, 0, 1) : polar(r, std::atan2(y, x));
      const double f = weighted_objective(s, g, pts, w2);
      if (f < best) {
        best = f;
        arg = g;
      }
    }
  }
  CHECK(distance(s, m2, arg) < 2e-3);
  CHECK(weighted_objective(s, m2, pts, w2) <= best + 1e-12);
}

TEST_CASE("Frechet mean on a tree is the exact minimizer") {
  const TargetSpace t = TargetSpace::star(3, 1.0);
  const TargetPoint pts[] = {TargetPoint::on_edge(0, 0.5), TargetPoint::on_edge(1, 0.5),
                             TargetPoint::on_edge(2, 0.9)};
  const double w[] = {1.0, 1.0, 1.0};
  // The branch point minimizes: moving down any leg gains at most 1 and loses 2.
  const TargetPoint m = frechet_mean(t, pts, w);
  CHECK(distance(t, m, t.tree_node_point(0)) < 1e-12);
  const double w2[] = {1.0, 1.0, 4.0};
  // Weighted mean along leg 2: (4 * 0.9 - 0.5 - 0.5) / 6.
  const TargetPoint m2 = frechet_mean(t, pts, w2);
  CHECK(distance(t, m2, TargetPoint::on_edge(2, 2.6 / 6.0)) < 1e-12);
}

TEST_CASE("ball projection") {
  const TargetSpace s = TargetSpace::sphere(2);
  BallConstraint ball{s2(0, 0, 1), 0.5};
  const TargetPoint inside = polar(0.3, 1.0);
  CHECK(project_to_ball(s, inside, ball) == inside);
  const TargetPoint p = project_to_ball(s, s2(1, 0, 0), ball);
  CHECK(distance(s, p, polar(0.5, 0.0)) < 1e-14);

  // Sampled: projection does not increase distances.
  ball.radius = 0.7;
  auto rng = make_rng(13, 0, 0);
  std::uniform_real_distribution<double> a(0.0, 2 * kPi);
  for (int k = 0; k < 1000; ++k) {
    const TargetPoint x = polar(1.2, a(rng)), y = polar(1.2, a(rng));
    CHECK(distance(s, project_to_ball(s, x, ball), project_to_ball(s, y, ball)) <=
          distance(s, x, y) + 1e-14);
  }
}

TEST_CASE("ball radius bound") {
  BallConstraint ball{TargetPoint::scalar(0.0), 1.0};
  CHECK_THROWS_WITH_AS(ball.validate(), doctest::Contains("pi/4"), Error);
  ball.radius = 0.7;
  CHECK_NOTHROW(ball.validate());
}
