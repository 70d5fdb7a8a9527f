#include "polyharm/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polyharm/cone.hpp"
#include "polyharm/csv.hpp"
#include "polyharm/random.hpp"

namespace polyharm {

namespace {

using Vec3 = std::array<double, 3>;

const TargetSpace& s2() {
  static const TargetSpace space = TargetSpace::sphere(2);
  return space;
}

TargetPoint point3(double x, double y, double z) {
  const double v[3] = {x, y, z};
  return TargetPoint::vector(v);
}

double d(const TargetPoint& a, const TargetPoint& b) { return distance(s2(), a, b); }
double sq(double v) { return v * v; }

TargetPoint random_sphere_point(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (;;) {
    const double x = g(rng), y = g(rng), z = g(rng);
    const double n = std::sqrt(x * x + y * y + z * z);
    if (n > 1e-8) return point3(x / n, y / n, z / n);
  }
}

// Orthonormal tangent frame at a unit vector.
std::pair<Vec3, Vec3> tangent_frame(const TargetPoint& p) {
  const Vec3 a{p.x[0], p.x[1], p.x[2]};
  const Vec3 helper = std::abs(a[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e1{helper[1] * a[2] - helper[2] * a[1], helper[2] * a[0] - helper[0] * a[2],
          helper[0] * a[1] - helper[1] * a[0]};
  const double n = std::sqrt(sq(e1[0]) + sq(e1[1]) + sq(e1[2]));
  for (double& c : e1) c /= n;
  const Vec3 e2{a[1] * e1[2] - a[2] * e1[1], a[2] * e1[0] - a[0] * e1[2],
                a[0] * e1[1] - a[1] * e1[0]};
  return {e1, e2};
}

// Point at geodesic distance rho from p in direction angle phi.
TargetPoint offset_point(const TargetPoint& p, double rho, double phi) {
  const auto [e1, e2] = tangent_frame(p);
  std::array<double, kMaxTargetCoords> v{};
  for (int i = 0; i < 3; ++i) v[i] = rho * (std::cos(phi) * e1[i] + std::sin(phi) * e2[i]);
  return sphere::exp(3, p, v);
}

// Uniform (by area) point in the geodesic disk of radius rho about p.
TargetPoint random_in_cap(std::mt19937_64& rng, const TargetPoint& p, double rho) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double c = 1.0 - u(rng) * (1.0 - std::cos(rho));
  return offset_point(p, std::acos(std::clamp(c, -1.0, 1.0)), 2.0 * kPi * u(rng));
}

TargetPoint random_tree_point(std::mt19937_64& rng, const TargetSpace& tree) {
  std::uniform_int_distribution<int> edge(0, tree.tree_edge_count() - 1);
  const int e = edge(rng);
  std::uniform_real_distribution<double> off(0.0, tree.tree_edge(e).length);
  return TargetPoint::on_edge(e, off(rng));
}

std::string describe_params(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) out << ';';
    out << k << '=' << fmt(v);
    first = false;
  }
  return out.str();
}

double shift(const OracleOptions& o) { return o.adversarial ? o.adversarial_shift : 0.0; }

}  // namespace

void OracleReport::record(double margin) {
  if (samples == 0 || margin < worst_margin) worst_margin = margin;
  ++samples;
  if (margin < -kViolationTol) ++violations;
}

std::array<TargetPoint, 3> comparison_triangle(double d_pq, double d_qr, double d_rp) {
  const double c = d_pq, a = d_qr, b = d_rp;
  const double slack = 1e-12;
  if (!(a >= 0.0 && b >= 0.0 && c >= 0.0)) throw Error("side lengths must be nonnegative");
  if (a > b + c + slack || b > a + c + slack || c > a + b + slack) {
    throw Error("side lengths violate the triangle inequality");
  }
  if (!(a + b + c < 2.0 * kPi)) throw Error("perimeter must be less than 2 pi");
  const TargetPoint p = point3(1.0, 0.0, 0.0);
  const TargetPoint q = point3(std::cos(c), std::sin(c), 0.0);
  // Half-angle formula for the angle at P; stays accurate for thin triangles.
  const double s = 0.5 * (a + b + c);
  const double num = std::max(0.0, std::sin(s - b)) * std::max(0.0, std::sin(s - c));
  const double den = std::max(0.0, std::sin(s)) * std::max(0.0, std::sin(s - a));
  double angle;
  if (c == 0.0 || b == 0.0) {
    angle = 0.0;
  } else if (den == 0.0) {
    angle = num == 0.0 ? 0.0 : kPi;
  } else {
    angle = 2.0 * std::atan2(std::sqrt(num), std::sqrt(den));
  }
  const TargetPoint r =
      point3(std::cos(b), std::sin(b) * std::cos(angle), std::sin(b) * std::sin(angle));
  return {p, q, r};
}

double check_cat1_condition(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                            const TargetPoint& r, double t, double s) {
  const double d_pq = distance(space, p, q);
  const double d_qr = distance(space, q, r);
  const double d_rp = distance(space, r, p);
  if (!(d_pq + d_qr + d_rp < 2.0 * kPi)) throw Error("triangle perimeter must be less than 2 pi");
  const auto tri = comparison_triangle(d_pq, d_qr, d_rp);
  const TargetPoint pt = interpolate(space, p, q, t);
  const TargetPoint rs = interpolate(space, r, q, s);
  const TargetPoint cpt = interpolate(s2(), tri[0], tri[1], t);
  const TargetPoint crs = interpolate(s2(), tri[2], tri[1], s);
  return distance(s2(), cpt, crs) - distance(space, pt, rs);
}

double check_quadrilateral(const TargetPoint& p, const TargetPoint& q, const TargetPoint& r,
                           const TargetPoint& s, double eps0, double delta0) {
  const double pq = d(p, q), qr = d(q, r), rs = d(r, s), sp = d(s, p);
  if (std::max({pq, qr, rs, sp}) > delta0 * (1.0 + 1e-12)) {
    throw Error("quadrilateral sides exceed delta0");
  }
  return sq(pq) + sq(qr) + sq(rs) + sq(sp) + eps0 * sq(delta0) - sq(d(p, r)) - sq(d(q, s));
}

double check_interpolation_estimate(const TargetPoint& p, const TargetPoint& q,
                                    const TargetPoint& s, double eta, double eta_prime) {
  const double d_qs = d(q, s), d_qp = d(q, p), d_ps = d(p, s);
  const double ratio = d_qs == 0.0 ? sq(1.0 - eta)
                                   : sq(std::sin((1.0 - eta) * d_qs) / std::sin(d_qs));
  const double gap = d_qs - d_qp;
  const double rhs =
      ratio * (sq(d_ps) - sq(gap)) + sq((1.0 - eta) * gap + (eta_prime - eta) * d_qs);
  const TargetPoint pe = interpolate(s2(), p, q, eta_prime);
  const TargetPoint se = interpolate(s2(), s, q, eta);
  return rhs - sq(d(pe, se));
}

double check_tri1_estimate(const TargetPoint& p, const TargetPoint& q, const TargetPoint& s,
                           double eta, double eta_prime) {
  const double d_qs = d(q, s), d_qp = d(q, p), d_ps = d(p, s);
  const double rhs = (1.0 - 2.0 * eta + eta * sq(d_qs)) * sq(d_ps) -
                     2.0 * (eta - eta_prime) * (d_qs - d_qp) * d_qs +
                     sq(eta_prime - eta) * sq(d_qs);
  const TargetPoint pe = interpolate(s2(), p, q, eta_prime);
  const TargetPoint se = interpolate(s2(), s, q, eta);
  return rhs - sq(d(pe, se));
}

double check_midpoint_convexity(const TargetPoint& p, const TargetPoint& q, const TargetPoint& r) {
  const double d_pq = d(p, q), d_pr = d(p, r);
  if (!(d_pq < kPi / 2.0 && d_pr < kPi / 2.0)) {
    throw Error("midpoint convexity needs d(P,Q), d(P,R) < pi/2");
  }
  const TargetPoint mid = interpolate(s2(), q, r, 0.5);
  const double d_mp = d(mid, p);
  return 0.5 * (sq(d_pr) + sq(d_pq)) - sq(d_mp) - 0.125 * std::cos(d_mp) * sq(d(q, r));
}

OracleReport run_cat1_oracle(const TargetSpace& space, const OracleOptions& options) {
  const bool tree = space.kind() == TargetSpace::Kind::tree;
  if (!tree && space.kind() != TargetSpace::Kind::sphere) {
    throw Error("CAT(1) oracle runs on the sphere or a tree");
  }
  if (!tree && space.dimension() != 2) throw Error("CAT(1) oracle samples S^2");
  OracleReport rep;
  rep.lemma = tree ? "cat1_condition_tripod" : "cat1_condition_sphere";
  rep.seed = options.seed;
  rep.params = tree ? "space=" + space.describe() : "space=sphere(2)";
  const std::uint64_t stream = tree ? kStreamCat1Tree : kStreamCat1Sphere;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (long i = 0; i < options.samples; ++i) {
    auto rng = make_rng(options.seed, stream, static_cast<std::uint64_t>(i));
    TargetPoint p, q, r;
    for (;;) {
      if (tree) {
        p = random_tree_point(rng, space);
        q = random_tree_point(rng, space);
        r = random_tree_point(rng, space);
        break;
      }
      p = random_sphere_point(rng);
      q = random_sphere_point(rng);
      r = random_sphere_point(rng);
      const double a = d(p, q), b = d(q, r), c = d(r, p);
      const double cap = kPi - 1e-6;
      if (a < cap && b < cap && c < cap && a + b + c < 2.0 * kPi - 1e-6) break;
    }
    const double t = u(rng), s = u(rng);
    rep.record(check_cat1_condition(space, p, q, r, t, s) - shift(options));
  }
  return rep;
}

OracleReport run_quadrilateral_oracle(double eps0, double delta0, const OracleOptions& options) {
  OracleReport rep;
  rep.lemma = "quadrilateral";
  rep.seed = options.seed;
  rep.params = describe_params({{"eps0", eps0}, {"delta0", delta0}});
  for (long i = 0; i < options.samples; ++i) {
    auto rng = make_rng(options.seed, kStreamQuadrilateral, static_cast<std::uint64_t>(i));
    const TargetPoint center = random_sphere_point(rng);
    // Four points in a disk of radius delta0/2 have all pairwise distances <= delta0.
    const TargetPoint p = random_in_cap(rng, center, 0.5 * delta0);
    const TargetPoint q = random_in_cap(rng, center, 0.5 * delta0);
    const TargetPoint r = random_in_cap(rng, center, 0.5 * delta0);
    const TargetPoint s = random_in_cap(rng, center, 0.5 * delta0);
    rep.record(check_quadrilateral(p, q, r, s, eps0, delta0) - shift(options));
  }
  return rep;
}

std::vector<QuadrilateralSweep> sweep_quadrilateral(const std::vector<double>& eps0_grid,
                                                    const std::vector<double>& delta0_grid,
                                                    const OracleOptions& options) {
  std::vector<double> deltas = delta0_grid;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  std::vector<QuadrilateralSweep> out;
  for (double eps0 : eps0_grid) {
    QuadrilateralSweep sw;
    sw.eps0 = eps0;
    sw.delta0 = deltas;
    for (double delta0 : deltas) {
      sw.violations.push_back(run_quadrilateral_oracle(eps0, delta0, options).violations);
    }
    for (std::size_t k = deltas.size(); k-- > 0;) {
      if (sw.violations[k] != 0) break;
      sw.threshold = deltas[k];
    }
    out.push_back(std::move(sw));
  }
  return out;
}

OracleReport run_midpoint_oracle(const OracleOptions& options) {
  OracleReport rep;
  rep.lemma = "midpoint_convexity";
  rep.seed = options.seed;
  rep.params = "space=sphere(2);cap=pi/2";
  for (long i = 0; i < options.samples; ++i) {
    auto rng = make_rng(options.seed, kStreamMidpoint, static_cast<std::uint64_t>(i));
    TargetPoint p, q, r;
    for (;;) {
      p = random_sphere_point(rng);
      q = random_in_cap(rng, p, kPi / 2.0);
      r = random_in_cap(rng, p, kPi / 2.0);
      if (d(p, q) < kPi / 2.0 && d(p, r) < kPi / 2.0 && d(q, r) < kPi - 1e-6) break;
    }
    rep.record(check_midpoint_convexity(p, q, r) - shift(options));
  }
  return rep;
}

std::vector<OracleReport> run_cone_oracles(const OracleOptions& options) {
  OracleReport band, small, proj;
  band.lemma = "cone_lift_band";
  band.params = "d<pi/2;0.5*d^2<=D^2<=d^2";
  small.lemma = "cone_small_angle";
  small.params = "d^2(1-d^2)<=D^2";
  proj.lemma = "cone_projection";
  proj.params = "heights in [0.5,2];D^2>=st*D^2(proj)";
  band.seed = small.seed = proj.seed = options.seed;
  std::uniform_real_distribution<double> height(0.5, 2.0);
  for (long i = 0; i < options.samples; ++i) {
    auto rng = make_rng(options.seed, kStreamConeBounds, static_cast<std::uint64_t>(i));
    const TargetPoint p = random_sphere_point(rng);
    const TargetPoint q = random_in_cap(rng, p, kPi / 2.0);
    const double dd = d(p, q);
    const double lifted = sq(cone_distance(s2(), lift(p), lift(q)));
    const double sh = shift(options);
    const double band_margin =
        dd < kPi / 2.0 ? std::min(lifted - 0.5 * sq(dd), sq(dd) - lifted) : 0.0;
    band.record(band_margin - sh);
    small.record(lifted - sq(dd) * (1.0 - sq(dd)) - sh);
    const TargetPoint r = random_sphere_point(rng);
    const double t = height(rng), s = height(rng);
    const ConePoint a{p, t}, b{r, s};
    const double full = sq(cone_distance(s2(), a, b));
    const double unit = sq(cone_distance(s2(), project_unit(a), project_unit(b)));
    proj.record(full - s * t * unit - sh);
  }
  return {band, small, proj};
}

std::string to_string(EstimateFamily family) {
  switch (family) {
    case EstimateFamily::estimate_equal_eta: return "estimate_equal_eta";
    case EstimateFamily::estimate_linear_gap: return "estimate_linear_gap";
    case EstimateFamily::tri1_linear: return "tri1_linear";
  }
  return "unknown";
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw Error("log-log fit needs distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

ScaleFamilyReport run_scale_family(EstimateFamily family, const std::vector<double>& h,
                                   long shapes, std::uint64_t seed) {
  ScaleFamilyReport rep;
  rep.family = family;
  rep.h = h;
  rep.shapes = shapes;
  rep.envelope.assign(h.size(), 0.0);
  rep.worst_margin.assign(h.size(), std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (long i = 0; i < shapes; ++i) {
    // One normalized shape per index, rescaled to every diameter h.
    auto rng = make_rng(seed, kStreamEstimate, static_cast<std::uint64_t>(i));
    const TargetPoint q = random_sphere_point(rng);
    const double rp = std::sqrt(u(rng)), ap = 2.0 * kPi * u(rng);
    const double rs = std::sqrt(u(rng)), as = 2.0 * kPi * u(rng);
    const double eta0 = 0.1 + 0.8 * u(rng);
    const double kappa = 2.0 * u(rng) - 1.0;
    const double a = u(rng), b = u(rng);
    for (std::size_t k = 0; k < h.size(); ++k) {
      const TargetPoint p = offset_point(q, rp * h[k], ap);
      const TargetPoint s = offset_point(q, rs * h[k], as);
      double margin = 0.0;
      switch (family) {
        case EstimateFamily::estimate_equal_eta:
          margin = check_interpolation_estimate(p, q, s, eta0, eta0);
          break;
        case EstimateFamily::estimate_linear_gap:
          margin = check_interpolation_estimate(p, q, s, eta0, eta0 + kappa * h[k]);
          break;
        case EstimateFamily::tri1_linear:
          margin = check_tri1_estimate(p, q, s, a * h[k], b * h[k]);
          break;
      }
      rep.envelope[k] = std::max(rep.envelope[k], std::abs(margin));
      rep.worst_margin[k] = std::min(rep.worst_margin[k], margin);
      rep.cubic_constant = std::max(rep.cubic_constant, -margin / (h[k] * h[k] * h[k]));
    }
  }
  rep.slope = loglog_slope(rep.h, rep.envelope);
  return rep;
}

std::vector<OracleReport> run_all_oracles(const OracleOptions& options) {
  std::vector<OracleReport> out;
  out.push_back(run_cat1_oracle(TargetSpace::sphere(2), options));
  out.push_back(run_cat1_oracle(TargetSpace::star(3, 1.0), options));
  out.push_back(run_quadrilateral_oracle(0.01, 1e-3, options));
  out.push_back(run_midpoint_oracle(options));
  for (auto& r : run_cone_oracles(options)) out.push_back(std::move(r));
  if (options.adversarial) {
    for (auto& r : out) r.params += ";adversarial_shift=" + fmt(options.adversarial_shift);
  }
  return out;
}

std::string oracle_csv_header() { return "lemma,samples,violations,worst_margin,params,seed"; }

std::string oracle_csv_row(const OracleReport& r) {
  return r.lemma + "," + std::to_string(r.samples) + "," + std::to_string(r.violations) + "," +
         fmt(r.worst_margin) + "," + r.params + "," + std::to_string(r.seed);
}

}  // namespace polyharm
