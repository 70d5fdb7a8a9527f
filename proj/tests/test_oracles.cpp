#include <doctest.h>

#include <cmath>

#include "polyharm/oracles.hpp"

using namespace polyharm;

namespace {

const TargetSpace kS2 = TargetSpace::sphere(2);

TargetPoint s2(double x, double y, double z) {
  const double v[3] = {x, y, z};
  return TargetPoint::vector(v);
}

}  // namespace

TEST_CASE("comparison triangles reproduce side lengths") {
  auto check = [](double a, double b, double c) {
    const auto t = comparison_triangle(a, b, c);
    CHECK(distance(kS2, t[0], t[1]) == doctest::Approx(a).epsilon(1e-10));
    CHECK(distance(kS2, t[1], t[2]) == doctest::Approx(b).epsilon(1e-10));
    CHECK(distance(kS2, t[2], t[0]) == doctest::Approx(c).epsilon(1e-10));
  };
  check(kPi / 2, kPi / 2, kPi / 2);
  check(0.3, 0.4, 0.5);
  check(0.3, 0.4, 0.7);  // degenerate: collinear on a great circle
}

TEST_CASE("comparison condition is tight on the model sphere") {
  const TargetPoint p = s2(1, 0, 0), q = s2(0, 1, 0);
  const TargetPoint r = s2(0, std::sqrt(0.5), std::sqrt(0.5));
  CHECK(check_cat1_condition(kS2, p, q, r, 0.0, 0.0) == 0.0);
  for (double t : {0.1, 0.5, 0.9}) {
    for (double s : {0.2, 0.7}) CHECK(std::abs(check_cat1_condition(kS2, p, q, r, t, s)) < 1e-10);
  }
}

TEST_CASE("degenerate inequalities") {
  const TargetPoint p = s2(0, 0, 1);
  CHECK(check_quadrilateral(p, p, p, p, 0.01, 1e-3) == doctest::Approx(0.01 * 1e-6));
  const TargetPoint q = s2(std::sin(0.2), 0, std::cos(0.2));
  CHECK(check_midpoint_convexity(p, q, q) == doctest::Approx(0.0).epsilon(1e-15));
  const TargetPoint s = s2(0, std::sin(0.3), std::cos(0.3));
  CHECK(std::abs(check_interpolation_estimate(p, q, s, 0.0, 0.0)) < 1e-12);
}

TEST_CASE("midpoint convexity on the perpendicular bisector") {
  // Q and R at distance 0.4, P at distance 0.6 from both.
  const auto t = comparison_triangle(0.6, 0.4, 0.6);
  CHECK(check_midpoint_convexity(t[0], t[1], t[2]) >= 0.0);
}

TEST_CASE("oracle runs at reduced sample counts") {
  OracleOptions o;
  o.samples = 5000;
  for (const OracleReport& r : run_all_oracles(o)) {
    INFO(r.lemma);
    CHECK(r.samples == 5000);
    CHECK(r.pass());
  }
  CHECK(run_quadrilateral_oracle(0.01, 1e-3, o).pass());
}

TEST_CASE("adversarial shift is detected") {
  OracleOptions o;
  o.samples = 2000;
  o.adversarial = true;
  long total = 0;
  for (const OracleReport& r : run_all_oracles(o)) total += r.violations;
  CHECK(total > 0);
  CHECK_FALSE(run_cat1_oracle(kS2, o).pass());
}

TEST_CASE("zero samples is a vacuous pass") {
  OracleOptions o;
  o.samples = 0;
  for (const OracleReport& r : run_all_oracles(o)) {
    CHECK(r.vacuous());
    CHECK(r.pass());
  }
}

TEST_CASE("oracle reports are reproducible from the seed") {
  OracleOptions o;
  o.samples = 3000;
  o.seed = 7;
  const auto a = run_all_oracles(o), b = run_all_oracles(o);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(oracle_csv_row(a[i]) == oracle_csv_row(b[i]));
}

TEST_CASE("quadrilateral sweep thresholds") {
  OracleOptions o;
  o.samples = 2000;
  const auto sweeps = sweep_quadrilateral({0.001, 0.1}, {0.1, 0.01, 0.001}, o);
  REQUIRE(sweeps.size() == 2);
  CHECK(sweeps[0].violations.size() == 3);
  CHECK(sweeps[1].threshold >= sweeps[0].threshold);
}

TEST_CASE("scale families decay at third order") {
  const std::vector<double> h{0.1, 0.05, 0.025};
  for (EstimateFamily f : {EstimateFamily::estimate_equal_eta, EstimateFamily::estimate_linear_gap,
                           EstimateFamily::tri1_linear}) {
    const ScaleFamilyReport r = run_scale_family(f, h, 500, 3);
    INFO(to_string(f));
    CHECK(r.slope >= 2.8);
  }
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4}, {3, 24, 192}) == doctest::Approx(3.0).epsilon(1e-12));
}
