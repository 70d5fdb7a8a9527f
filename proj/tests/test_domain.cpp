#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "polyharm/domain.hpp"
#include "polyharm/mesh_io.hpp"
#include "polyharm/random.hpp"

using namespace polyharm;

TEST_CASE("book models") {
  const LocalModel half = LocalModel::book(1);
  CHECK(half.wedge_count() == 1);
  CHECK(half.ray_class_size(half.ray_class(0, 0)) == 1);  // free ray: boundary model
  const LocalModel plane = LocalModel::book(2);
  CHECK(plane.total_angle() == doctest::Approx(2 * kPi));
  CHECK(plane.admissible());
  const LocalModel three = LocalModel::book(3);
  CHECK(three.admissible());
  CHECK(three.ray_class_count() == 2);
  CHECK(three.ray_class_size(three.ray_class(0, 0)) == 3);
}

TEST_CASE("cone models") {
  for (double theta : {1.5 * kPi, 2 * kPi, 3 * kPi, 4 * kPi}) {
    const LocalModel c = LocalModel::cone(theta);
    CHECK(c.wedge_count() == static_cast<int>(std::ceil(theta / (kPi / 2) - 1e-12)));
    CHECK(c.total_angle() == doctest::Approx(theta).epsilon(1e-14));
    CHECK(c.admissible());
  }
  // Across the vertex of a 4 pi cone opposite directions are 2 pi apart, so
  // the distance goes through the apex.
  const LocalModel c = LocalModel::cone(4 * kPi);
  const ModelPoint a{0, 1.0, 0.1}, b{4, 1.0, 0.1};
  CHECK(c.distance(a, b) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("metric fields") {
  const LocalModel m = LocalModel::cone(2 * kPi);
  const Point3 origin{0, 0, 0};
  const MetricField c = MetricField::conformal(2, 0.1);
  const Mat g0 = c.at(m, 0, origin);
  CHECK((g0 - Mat::Identity(2, 2)).norm() == 0.0);
  CHECK((MetricField::euclidean(2).at(m, 1, Point3{0.3, 0.2, 0}) - Mat::Identity(2, 2)).norm() == 0.0);

  // Sampled Lipschitz audit of the components against |x - y|.
  auto rng = make_rng(31, 0, 0);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const Point3 x{u(rng), u(rng), 0}, y{u(rng), u(rng), 0};
    const double dxy = std::hypot(x[0] - y[0], x[1] - y[1]);
    if (dxy < 1e-6) continue;
    const Mat d = c.at(m, 0, x) - c.at(m, 0, y);
    worst = std::max(worst, d.cwiseAbs().maxCoeff() / dxy);
  }
  CHECK(worst <= 0.1 * 2 + 1e-12);
}

TEST_CASE("flat disk mesh audit") {
  const Mesh mesh = triangulate(LocalModel::cone(2 * kPi), 1.0, 0.1, 1.5);
  const MeshAudit a = audit_mesh(mesh);
  CHECK(a.ok());
  CHECK(a.min_volume > 0.0);
  CHECK(a.min_edge_ratio >= 1.0 / 3.0);
  CHECK(a.max_edge_ratio <= 2.0);
  CHECK(mesh.simplex_count() > 0.5 / (0.1 * 0.1));
  CHECK(origin_angle(mesh) == doctest::Approx(2 * kPi).epsilon(1e-12));
  double area = 0.0;
  for (int s = 0; s < mesh.simplex_count(); ++s) area += mesh.simplex_volume(s);
  CHECK(area == doctest::Approx(kPi).epsilon(0.01));
}

TEST_CASE("cone of angle 4 pi has total vertex angle 4 pi") {
  const Mesh mesh = triangulate(LocalModel::cone(4 * kPi), 1.0, 0.1, 1.5);
  CHECK(audit_mesh(mesh).ok());
  CHECK(origin_angle(mesh) == doctest::Approx(4 * kPi).epsilon(1e-12));
}

TEST_CASE("book spine vertices are shared by all pages") {
  const Mesh mesh = triangulate(LocalModel::book(3), 1.0, 0.1, 1.5);
  CHECK(audit_mesh(mesh).ok());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (mesh.vertices()[v].ray_class < 0) continue;
    std::set<int> pages;
    for (int s : mesh.stars()[v]) pages.insert(mesh.simplices()[s].wedge);
    CHECK(pages.size() == 3);
  }
}

TEST_CASE("three-dimensional products") {
  const Mesh mesh = triangulate(LocalModel::book(3, 3), 1.0, 0.2, 1.5);
  const MeshAudit a = audit_mesh(mesh);
  CHECK(a.orphan_vertices == 0);
  CHECK(a.degenerate_simplices == 0);
}

TEST_CASE("sphere measures") {
  SphereOptions opts;
  opts.angular_samples = 10000;
  const MetricField flat = MetricField::euclidean(2);
  {
    const Mesh mesh = triangulate(LocalModel::cone(2 * kPi), 1.0, 0.05, 1.5);
    const PointLocator loc(mesh);
    const BallSphere b = ball_and_sphere(mesh, flat, loc, ModelPoint{}, 0.5, opts);
    CHECK(b.sphere_measure == doctest::Approx(kPi).epsilon(1e-6));
    double vol = 0.0;
    for (int s = 0; s < mesh.simplex_count(); ++s) vol += b.fraction[s] * mesh.simplex_volume(s);
    CHECK(vol == doctest::Approx(kPi * 0.25).epsilon(2e-3));
  }
  {
    const Mesh mesh = triangulate(LocalModel::cone(4 * kPi), 1.0, 0.05, 1.5);
    const BallSphere b = ball_and_sphere(mesh, flat, PointLocator(mesh), ModelPoint{}, 0.5, opts);
    CHECK(b.sphere_measure == doctest::Approx(2.0 * kPi).epsilon(1e-6));
  }
  {
    const Mesh mesh = triangulate(LocalModel::book(3), 1.0, 0.05, 1.5);
    const BallSphere b = ball_and_sphere(mesh, flat, PointLocator(mesh), ModelPoint{}, 0.5, opts);
    CHECK(b.sphere_measure == doctest::Approx(1.5 * kPi).epsilon(1e-6));
  }
}

TEST_CASE("triangle-disk intersection area") {
  const Point3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
  CHECK(triangle_disk_area(a, b, c, Point3{0, 0, 0}, 10.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(triangle_disk_area(a, b, c, Point3{0, 0, 0}, 0.5) == doctest::Approx(kPi / 16).epsilon(1e-13));
  // Monte Carlo oracle for an off-center disk.
  const Point3 center{0.4, 0.2, 0};
  const double rho = 0.35;
  auto rng = make_rng(32, 0, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long hits = 0;
  const long n = 400000;
  for (long k = 0; k < n; ++k) {
    const double x = u(rng), y = u(rng);
    if (x + y <= 1.0 && std::hypot(x - center[0], y - center[1]) <= rho) ++hits;
  }
  CHECK(triangle_disk_area(a, b, c, center, rho) == doctest::Approx(double(hits) / n).epsilon(0.01));
}

TEST_CASE("mesh text round trip is byte identical") {
  const Mesh mesh = triangulate(LocalModel::book(3), 1.0, 0.1, 1.5);
  const std::string text = mesh_to_text(mesh);
  CHECK(mesh_to_text(mesh_from_text(text)) == text);
  CHECK_THROWS_AS(mesh_from_text("garbage"), Error);
}

TEST_CASE("point location") {
  const Mesh mesh = triangulate(LocalModel::cone(3 * kPi), 1.0, 0.05, 1.5);
  const PointLocator loc(mesh);
  auto rng = make_rng(33, 0, 0);
  std::uniform_real_distribution<double> r(0.0, 0.95), f(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const int w = static_cast<int>(f(rng) * mesh.model().wedge_count()) % mesh.model().wedge_count();
    const ModelPoint p{w, r(rng), f(rng) * mesh.model().wedges()[w].angle, 0.0};
    const Location l = loc.locate(p);
    REQUIRE(l.simplex >= 0);
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
      CHECK(l.bary[i] >= -1e-9);
      sum += l.bary[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}
