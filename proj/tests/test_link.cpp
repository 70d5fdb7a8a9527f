#include <doctest.h>

#include <cmath>

#include "polyharm/link.hpp"

using namespace polyharm;

TEST_CASE("links of model points") {
  const MetricField flat = MetricField::euclidean(2);
  const LinkGraph plane = extract_link(LocalModel::cone(2 * kPi), flat);
  CHECK(plane.total_length() == doctest::Approx(2 * kPi).epsilon(1e-10));
  const LinkGraph cone = extract_link(LocalModel::cone(4 * kPi), flat);
  CHECK(cone.total_length() == doctest::Approx(4 * kPi).epsilon(1e-10));
  CHECK_NOTHROW(cone.validate());

  const LinkGraph book = extract_link(LocalModel::book(3), flat);
  CHECK(book.vertex_count == 2);
  REQUIRE(book.edges.size() == 3);
  for (const LinkEdge& e : book.edges) {
    CHECK(e.a != e.b);
    CHECK(e.length == doctest::Approx(kPi).epsilon(1e-10));
  }
  // A spine point away from the origin has the same link.
  const LinkGraph spine = extract_link(LocalModel::book(3), flat, ModelPoint{0, 0.5, 0.0});
  CHECK(spine.vertex_count == 2);
  CHECK(spine.total_length() == doctest::Approx(3 * kPi).epsilon(1e-10));
  // Interior points have a circle.
  const LinkGraph inner = extract_link(LocalModel::book(3), flat, ModelPoint{1, 0.5, 1.0});
  CHECK(inner.total_length() == doctest::Approx(2 * kPi).epsilon(1e-10));

  CHECK_THROWS_AS(extract_link(LocalModel::book(3, 3), MetricField::euclidean(3)), Error);
}

TEST_CASE("anisotropic metric changes the link length") {
  Mat a(2, 2);
  a << 4.0, 0.0, 0.0, 1.0;
  const LinkGraph g = extract_link(LocalModel::cone(2 * kPi), MetricField::anisotropic(a));
  // Ellipse with semi-axes 2 and 1: perimeter 9.688448220547675...
  CHECK(g.total_length() == doctest::Approx(9.688448220547675).epsilon(1e-8));
}

TEST_CASE("first eigenvalue of circles") {
  for (double len : {kPi, 2 * kPi, 4 * kPi, 3 * kPi}) {
    const EigenResult r = lambda1_real(circle_link(len));
    const double exact = std::pow(2 * kPi / len, 2);
    INFO("length " << len);
    CHECK(std::abs(r.lambda1 - exact) < 1e-4 * std::max(1.0, exact));
    CHECK(r.lambda1 >= exact);  // conforming elements give upper bounds
    REQUIRE(r.trend.size() >= 2);
    for (std::size_t i = 1; i < r.trend.size(); ++i) CHECK(r.trend[i] <= r.trend[i - 1]);
  }
}

TEST_CASE("first eigenvalue of the three-page book link") {
  const LinkGraph book = extract_link(LocalModel::book(3), MetricField::euclidean(2));
  CHECK(lambda1_real(book).lambda1 == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("tripod-valued maps do no worse than real-valued maps") {
  EigenOptions o;
  o.subdivision = 32;
  o.restarts = 20;
  for (const LinkGraph& g : {circle_link(2 * kPi), circle_link(4 * kPi),
                             extract_link(LocalModel::book(3), MetricField::euclidean(2))}) {
    const EigenResult t = lambda1_tripod(g, o);
    CHECK(t.lambda1 <= t.real_reference + 1e-9);
    CHECK(t.lambda1 > 0.0);
    CHECK(t.legs.size() == t.samples.size());
  }
  const EigenResult circle = lambda1_tripod(circle_link(2 * kPi), o);
  CHECK(circle.lambda1 <= 1.0);
}

TEST_CASE("tripod minimization is reproducible") {
  EigenOptions o;
  o.subdivision = 16;
  o.restarts = 10;
  o.seed = 5;
  const EigenResult a = lambda1_tripod(circle_link(3 * kPi), o), b = lambda1_tripod(circle_link(3 * kPi), o);
  CHECK(a.lambda1 == b.lambda1);
  CHECK(a.samples == b.samples);
}

TEST_CASE("predicted exponent") {
  CHECK(predicted_exponent(1.0, 2, 0).alpha == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(predicted_exponent(1.0, 2, 0).lipschitz);
  CHECK(predicted_exponent(0.25, 2, 0).alpha == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(predicted_exponent(0.25, 2, 0).lipschitz);
  CHECK(predicted_exponent(2.0, 3, 0).alpha == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(predicted_exponent(4.0 / 9.0, 2, 0).alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("invalid links") {
  LinkGraph g;
  g.vertex_count = 2;
  g.edges = {{0, 0, 1.0}};
  CHECK_THROWS_AS(g.validate(), Error);  // vertex 1 is unreachable
  CHECK_THROWS_AS(circle_link(-1.0).validate(), Error);
}
