#include "polyharm/link.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include "polyharm/random.hpp"

namespace polyharm {

namespace {

constexpr int kLegs = 3;

// Length of the unit-circle arc phi in [a, b] of a wedge frame under constant g.
double arc_length(const Mat& g, double a, double b) {
  constexpr int kIntervals = 1024;  // composite Simpson
  const double step = (b - a) / kIntervals;
  auto speed = [&](double phi) {
    Vec t(2);
    t << -std::sin(phi), std::cos(phi);
    return std::sqrt(t.dot(g.topLeftCorner(2, 2) * t));
  };
  double total = speed(a) + speed(b);
  for (int i = 1; i < kIntervals; ++i) total += (i % 2 ? 4.0 : 2.0) * speed(a + i * step);
  return total * step / 3.0;
}

struct Discrete {
  int nodes = 0;
  std::vector<std::array<int, 2>> elems;
  std::vector<double> h;
};

// Each edge is cut into counts[e] elements; graph vertices come first.
Discrete discretize(const LinkGraph& link, const std::vector<int>& counts) {
  Discrete d;
  d.nodes = link.vertex_count;
  for (std::size_t e = 0; e < link.edges.size(); ++e) {
    const LinkEdge& edge = link.edges[e];
    const int m = counts[e];
    const double h = edge.length / m;
    int prev = edge.a;
    for (int k = 1; k < m; ++k) {
      const int node = d.nodes++;
      d.elems.push_back({prev, node});
      d.h.push_back(h);
      prev = node;
    }
    d.elems.push_back({prev, edge.b});
    d.h.push_back(h);
  }
  return d;
}

std::vector<double> lumped_mass(const Discrete& d) {
  std::vector<double> m(d.nodes, 0.0);
  for (std::size_t k = 0; k < d.elems.size(); ++k) {
    m[d.elems[k][0]] += 0.5 * d.h[k];
    m[d.elems[k][1]] += 0.5 * d.h[k];
  }
  return m;
}

struct RealEigen {
  double lambda = 0.0;
  Eigen::VectorXd v;
  bool converged = false;
};

// Shift-invert inverse iteration on K v = lambda M v in the M-orthogonal
// complement of the constants.
RealEigen real_eigen(const Discrete& d, bool lumped, double tol, std::uint64_t seed) {
  using Sp = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> kt, mt;
  for (std::size_t k = 0; k < d.elems.size(); ++k) {
    const int a = d.elems[k][0], b = d.elems[k][1];
    const double h = d.h[k];
    kt.emplace_back(a, a, 1.0 / h);
    kt.emplace_back(b, b, 1.0 / h);
    kt.emplace_back(a, b, -1.0 / h);
    kt.emplace_back(b, a, -1.0 / h);
    if (lumped) {
      mt.emplace_back(a, a, 0.5 * h);
      mt.emplace_back(b, b, 0.5 * h);
    } else {
      mt.emplace_back(a, a, h / 3.0);
      mt.emplace_back(b, b, h / 3.0);
      mt.emplace_back(a, b, h / 6.0);
      mt.emplace_back(b, a, h / 6.0);
    }
  }
  Sp k(d.nodes, d.nodes), m(d.nodes, d.nodes);
  k.setFromTriplets(kt.begin(), kt.end());
  m.setFromTriplets(mt.begin(), mt.end());
  const Sp shifted = k + m;
  Eigen::SimplicialLDLT<Sp> solver(shifted);
  if (solver.info() != Eigen::Success) throw Error("link Laplacian factorization failed");

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d.nodes);
  const Eigen::VectorXd m1 = m * ones;
  const double mass = ones.dot(m1);
  auto project = [&](Eigen::VectorXd& v) {
    v -= (m1.dot(v) / mass) * ones;
    v /= std::sqrt(v.dot(m * v));
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(d.nodes);
  for (int i = 0; i < d.nodes; ++i) v[i] = normal(rng);
  project(v);
  RealEigen out;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXd w = solver.solve(m * v);
    project(w);
    v = w;
    const double lambda = v.dot(k * v);  // v is M-normalized
    out.lambda = lambda;
    if (std::abs(prev - lambda) <= tol * lambda) {
      out.converged = true;
      break;
    }
    prev = lambda;
  }
  out.v = v;
  return out;
}

std::vector<int> finest_counts(const LinkGraph& link, int subdivision, int levels) {
  const int scale = 1 << levels;
  std::vector<int> base;
  for (const LinkEdge& e : link.edges) {
    base.push_back(std::max(4, static_cast<int>(std::ceil(e.length * subdivision / scale))));
  }
  return base;  // coarsest counts; level j uses base * 2^j
}

std::vector<int> level_counts(const std::vector<int>& base, int j) {
  std::vector<int> out(base);
  for (int& c : out) c <<= j;
  return out;
}

// Maps into a tripod: node i sits on leg[i] at distance t[i] from the center.
class TripodQuotient {
 public:
  TripodQuotient(const Discrete& d, std::vector<int> leg, std::vector<double> t)
      : mass_(lumped_mass(d)), leg_(std::move(leg)), t_(std::move(t)), adj_(d.nodes) {
    for (std::size_t k = 0; k < d.elems.size(); ++k) {
      const int a = d.elems[k][0], b = d.elems[k][1];
      adj_[a].push_back({b, 1.0 / d.h[k]});
      adj_[b].push_back({a, 1.0 / d.h[k]});
      energy_ += dist2(a, b) / d.h[k];
    }
    resync();
  }

  double quotient() const {
    const double v = variance();
    return v > 0.0 ? energy_ / v : std::numeric_limits<double>::infinity();
  }

  // Moves node i to the best of the per-leg stationary points of the
  // quotient with the center frozen, if that lowers the true quotient.
  void relax(int i) {
    const auto [q_leg, q] = center();
    const double current = quotient();
    const double local_old = local_energy(i, leg_[i], t_[i]);
    add(i, -1.0);
    const double e_rest = energy_ - local_old;
    const double m = mass_[i];
    double vrest = sum_t2_ - 2.0 * q * (leg_sum(q_leg) - (sum_t_ - leg_sum(q_leg))) +
                   total_mass() * q * q;
    if (q == 0.0) vrest = sum_t2_;
    int best_leg = leg_[i];
    double best_t = t_[i], best = current;
    for (int l = 0; l < kLegs; ++l) {
      double a = 0.0, b = 0.0, c = e_rest;
      for (const auto& [j, w] : adj_[i]) {
        const double sgn = (leg_[j] == l || t_[j] == 0.0) ? -1.0 : 1.0;
        a += w;
        b += 2.0 * sgn * w * t_[j];
        c += w * t_[j] * t_[j];
      }
      const double s = (q == 0.0 || q_leg == l) ? -q : q;
      const double c0 = m * s * s + vrest;
      const double a2 = 2.0 * a * m * s - b * m;
      const double a1 = 2.0 * a * c0 - 2.0 * c * m;
      const double a0 = b * c0 - 2.0 * c * m * s;
      double roots[3] = {0.0, -1.0, -1.0};
      if (std::abs(a2) > 1e-300) {
        const double disc = a1 * a1 - 4.0 * a2 * a0;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double qq = -0.5 * (a1 + (a1 >= 0.0 ? sq : -sq));
          roots[1] = qq / a2;
          if (qq != 0.0) roots[2] = a0 / qq;
        }
      } else if (a1 != 0.0) {
        roots[1] = -a0 / a1;
      }
      for (double r : roots) {
        if (!(r >= 0.0) || !std::isfinite(r)) continue;
        const double value = trial(i, l, r, e_rest);
        if (value < best * (1.0 - 1e-15)) {
          best = value;
          best_leg = l;
          best_t = r;
        }
      }
    }
    leg_[i] = best_leg;
    t_[i] = best_t;
    add(i, +1.0);
    energy_ = e_rest + local_energy(i, best_leg, best_t);
  }

  /// Recomputes the running sums, which accumulate roundoff over a sweep.
  void resync() {
    leg_sum_.fill(0.0);
    sum_t_ = sum_t2_ = mass_total_ = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i) add(static_cast<int>(i), +1.0);
  }

  const std::vector<int>& legs() const { return leg_; }
  const std::vector<double>& offsets() const { return t_; }

 private:
  std::vector<double> mass_;
  std::vector<int> leg_;
  std::vector<double> t_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
  double energy_ = 0.0;
  std::array<double, kLegs> leg_sum_{};
  double sum_t_ = 0.0, sum_t2_ = 0.0, mass_total_ = 0.0;

  double leg_sum(int l) const { return l < 0 ? 0.0 : leg_sum_[l]; }
  double total_mass() const { return mass_total_; }

  static double d2(int la, double ta, int lb, double tb) {
    const double d = (la == lb || ta == 0.0 || tb == 0.0) ? ta - tb : ta + tb;
    return d * d;
  }
  double dist2(int a, int b) const { return d2(leg_[a], t_[a], leg_[b], t_[b]); }

  double local_energy(int i, int l, double t) const {
    double e = 0.0;
    for (const auto& [j, w] : adj_[i]) {
      if (j != i) e += w * d2(l, t, leg_[j], t_[j]);
    }
    return e;
  }

  void add(int i, double sign) {
    const double mt = mass_[i] * t_[i];
    leg_sum_[leg_[i]] += sign * mt;
    sum_t_ += sign * mt;
    sum_t2_ += sign * mt * t_[i];
    mass_total_ += sign * mass_[i];
  }

  // Center of mass (leg, offset); leg -1 at the branch point.
  std::pair<int, double> center() const {
    for (int l = 0; l < kLegs; ++l) {
      const double excess = leg_sum_[l] - (sum_t_ - leg_sum_[l]);
      if (excess > 0.0) return {l, excess / mass_total_};
    }
    return {-1, 0.0};
  }

  double variance() const {
    const double q = center().second;
    return std::max(0.0, sum_t2_ - mass_total_ * q * q);
  }

  double trial(int i, int l, double t, double e_rest) const {
    // Node i is removed from the sums; evaluate without touching them.
    std::array<double, kLegs> legs = leg_sum_;
    const double mt = mass_[i] * t;
    legs[l] += mt;
    const double total = sum_t_ + mt, mass = mass_total_ + mass_[i];
    double q = 0.0;
    for (int k = 0; k < kLegs; ++k) {
      const double excess = legs[k] - (total - legs[k]);
      if (excess > 0.0) q = excess / mass;
    }
    const double v = sum_t2_ + mt * t - mass * q * q;
    return v > 0.0 ? (e_rest + local_energy(i, l, t)) / v
                   : std::numeric_limits<double>::infinity();
  }
};

struct TripodRun {
  double lambda;
  std::vector<int> legs;
  std::vector<double> t;
  bool converged;
};

TripodRun run_tripod(const Discrete& d, std::vector<int> leg, std::vector<double> t,
                     const EigenOptions& options) {
  TripodQuotient q(d, std::move(leg), std::move(t));
  double prev = q.quotient();
  bool converged = false;
  for (long sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (int i = 0; i < d.nodes; ++i) q.relax(i);
    q.resync();
    const double now = q.quotient();
    if (prev - now <= options.tol * now) {
      converged = true;
      prev = now;
      break;
    }
    prev = now;
  }
  return {prev, q.legs(), q.offsets(), converged};
}

TripodRun tripod_from_real(const Discrete& d, const EigenOptions& options) {
  const RealEigen re = real_eigen(d, true, 1e-14, options.seed);
  std::vector<int> leg(d.nodes);
  std::vector<double> t(d.nodes);
  for (int i = 0; i < d.nodes; ++i) {
    leg[i] = re.v[i] >= 0.0 ? 0 : 1;
    t[i] = std::abs(re.v[i]);
  }
  return run_tripod(d, std::move(leg), std::move(t), options);
}

// Node ids along each edge from its first to its last vertex, matching discretize.
std::vector<std::vector<int>> edge_paths(const LinkGraph& link, const std::vector<int>& counts) {
  std::vector<std::vector<int>> out;
  int next = link.vertex_count;
  for (std::size_t e = 0; e < link.edges.size(); ++e) {
    std::vector<int> path{link.edges[e].a};
    for (int k = 1; k < counts[e]; ++k) path.push_back(next++);
    path.push_back(link.edges[e].b);
    out.push_back(std::move(path));
  }
  return out;
}

// Geodesic midpoint in the tripod.
std::pair<int, double> tripod_midpoint(int la, double ta, int lb, double tb) {
  if (la == lb || ta == 0.0 || tb == 0.0) return {ta >= tb ? la : lb, 0.5 * (ta + tb)};
  return ta >= tb ? std::pair{la, 0.5 * (ta - tb)} : std::pair{lb, 0.5 * (tb - ta)};
}

// Random map on the coarsest level, relaxed and refined level by level.
TripodRun cascade_restart(const LinkGraph& link, const std::vector<int>& base, int levels,
                          std::mt19937_64& rng, const EigenOptions& options) {
  std::uniform_int_distribution<int> pick(0, kLegs - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Discrete d = discretize(link, base);
  std::vector<int> leg(d.nodes);
  std::vector<double> t(d.nodes);
  for (int i = 0; i < d.nodes; ++i) {
    leg[i] = pick(rng);
    t[i] = u(rng);
  }
  TripodRun run = run_tripod(d, std::move(leg), std::move(t), options);
  for (int j = 1; j <= levels; ++j) {
    const auto coarse = edge_paths(link, level_counts(base, j - 1));
    const auto fine = edge_paths(link, level_counts(base, j));
    d = discretize(link, level_counts(base, j));
    leg.assign(d.nodes, 0);
    t.assign(d.nodes, 0.0);
    for (std::size_t e = 0; e < fine.size(); ++e) {
      for (std::size_t k = 0; k < fine[e].size(); ++k) {
        const int a = coarse[e][k / 2];
        if (k % 2 == 0) {
          leg[fine[e][k]] = run.legs[a];
          t[fine[e][k]] = run.t[a];
        } else {
          const int b = coarse[e][k / 2 + 1];
          std::tie(leg[fine[e][k]], t[fine[e][k]]) =
              tripod_midpoint(run.legs[a], run.t[a], run.legs[b], run.t[b]);
        }
      }
    }
    run = run_tripod(d, std::move(leg), std::move(t), options);
  }
  return run;
}

}  // namespace

double LinkGraph::total_length() const {
  double s = 0.0;
  for (const LinkEdge& e : edges) s += e.length;
  return s;
}

void LinkGraph::validate() const {
  if (vertex_count < 1 || edges.empty()) throw Error("link graph is empty");
  std::vector<int> parent(vertex_count);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const LinkEdge& e : edges) {
    if (!(e.length > 0.0)) throw Error("link edge lengths must be positive");
    if (e.a < 0 || e.b < 0 || e.a >= vertex_count || e.b >= vertex_count) {
      throw Error("link edge refers to a missing vertex");
    }
    parent[find(e.a)] = find(e.b);
  }
  for (int v = 0; v < vertex_count; ++v) {
    if (find(v) != find(0)) throw Error("link graph is not connected");
  }
}

LinkGraph circle_link(double length) {
  LinkGraph g;
  g.vertex_count = 1;
  g.edges.push_back({0, 0, length});
  std::ostringstream out;
  out << "circle(" << length << ")";
  g.description = out.str();
  g.validate();
  return g;
}

LinkGraph extract_link(const LocalModel& model, const MetricField& field, const ModelPoint& x) {
  if (model.dimension() != 2) {
    throw Error("links of n = 3 models are spherical 2-complexes and are not supported");
  }
  model.check_point(x);
  LinkGraph g;
  std::ostringstream desc;
  if (x.rho == 0.0) {
    g.vertex_count = model.ray_class_count();
    for (int w = 0; w < model.wedge_count(); ++w) {
      const Mat gx = metric_eval(field, model, w, {0.0, 0.0, 0.0}).g;
      g.edges.push_back({model.ray_class(w, 0), model.ray_class(w, 1),
                         arc_length(gx, 0.0, model.wedges()[w].angle)});
    }
    desc << "link of " << model.describe() << " at the origin";
  } else {
    const double a = model.wedges()[x.wedge].angle;
    const int side = x.phi <= 0.0 ? 0 : (x.phi >= a ? 1 : -1);
    if (side < 0) {
      const Mat gx = metric_eval(field, model, x.wedge, model.cartesian(x)).g;
      g.vertex_count = 1;
      g.edges.push_back({0, 0, arc_length(gx, 0.0, 2.0 * kPi)});
      desc << "link of an interior point of " << model.describe();
    } else {
      // Vertices: outward (0) and inward (1) ray directions.
      g.vertex_count = 2;
      const int cls = model.ray_class(x.wedge, side);
      for (int w = 0; w < model.wedge_count(); ++w) {
        for (int s = 0; s < 2; ++s) {
          if (model.ray_class(w, s) != cls) continue;
          const double aw = model.wedges()[w].angle;
          const double phi = s == 0 ? 0.0 : aw;
          const ModelPoint p{w, x.rho, phi, 0.0};
          const Mat gx = metric_eval(field, model, w, model.cartesian(p)).g;
          const double from = s == 0 ? 0.0 : aw - kPi;
          g.edges.push_back({0, 1, arc_length(gx, from, from + kPi)});
        }
      }
      desc << "link of a ray point of " << model.describe();
    }
  }
  g.description = desc.str();
  g.validate();
  return g;
}

std::string to_string(LinkTarget target) {
  return target == LinkTarget::real ? "real" : "tripod";
}

EigenResult lambda1_real(const LinkGraph& link, const EigenOptions& options) {
  link.validate();
  if (options.subdivision < 16) throw Error("subdivision must be at least 16 per unit length");
  const std::vector<int> base = finest_counts(link, options.subdivision, options.trend_levels);
  EigenResult out;
  out.target = LinkTarget::real;
  out.subdivision = options.subdivision;
  for (int j = 0; j <= options.trend_levels; ++j) {
    const Discrete d = discretize(link, level_counts(base, j));
    const RealEigen re = real_eigen(d, false, 1e-14, options.seed);
    out.trend_subdivision.push_back(options.subdivision >> (options.trend_levels - j));
    out.trend.push_back(re.lambda);
    if (j == options.trend_levels) {
      out.lambda1 = re.lambda;
      out.converged = re.converged;
      out.samples.assign(re.v.data(), re.v.data() + re.v.size());
    }
  }
  return out;
}

EigenResult lambda1_tripod(const LinkGraph& link, const EigenOptions& options) {
  link.validate();
  if (options.subdivision < 16) throw Error("subdivision must be at least 16 per unit length");
  const std::vector<int> base = finest_counts(link, options.subdivision, options.trend_levels);
  EigenResult out;
  out.target = LinkTarget::tripod;
  out.subdivision = options.subdivision;
  for (int j = 0; j < options.trend_levels; ++j) {
    const Discrete d = discretize(link, level_counts(base, j));
    out.trend_subdivision.push_back(options.subdivision >> (options.trend_levels - j));
    out.trend.push_back(tripod_from_real(d, options).lambda);
  }
  const Discrete d = discretize(link, level_counts(base, options.trend_levels));
  out.real_reference = real_eigen(d, true, 1e-14, options.seed).lambda;
  TripodRun best = tripod_from_real(d, options);
  double lo = best.lambda, hi = best.lambda;
  for (int r = 0; r < options.restarts; ++r) {
    std::mt19937_64 rng = make_rng(options.seed, kStreamTreeRestarts, static_cast<std::uint64_t>(r));
    TripodRun run = cascade_restart(link, base, options.trend_levels, rng, options);
    lo = std::min(lo, run.lambda);
    hi = std::max(hi, run.lambda);
    if (run.lambda < best.lambda) best = std::move(run);
  }
  out.lambda1 = best.lambda;
  out.converged = best.converged;
  out.samples = best.t;
  out.legs = best.legs;
  out.spread = hi - lo;
  out.restarts = options.restarts;
  out.trend_subdivision.push_back(options.subdivision);
  out.trend.push_back(best.lambda);
  return out;
}

EigenResult lambda1(const LinkGraph& link, LinkTarget target, const EigenOptions& options) {
  return target == LinkTarget::real ? lambda1_real(link, options) : lambda1_tripod(link, options);
}

ExponentPrediction predicted_exponent(double beta, int n, int k) {
  if (!(beta >= 0.0)) throw Error("eigenvalue bound must be nonnegative");
  const double b = n - k - 2;
  ExponentPrediction p;
  p.alpha = 0.5 * (-b + std::sqrt(b * b + 4.0 * beta));
  p.lipschitz = beta >= n - k - 1;
  return p;
}

}  // namespace polyharm
