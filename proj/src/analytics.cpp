#include "polyharm/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "polyharm/random.hpp"

namespace polyharm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double radial(const ModelPoint& p) { return std::hypot(p.rho, p.z); }

ModelPoint origin() { return ModelPoint{}; }


// Index of the radius closest to 2 * radii[j] (within 1%), or -1.
int octave_above(std::span<const double> radii, int j) {
  for (int k = j + 1; k < static_cast<int>(radii.size()); ++k) {
    if (std::abs(radii[k] / radii[j] - 2.0) < 0.02) return k;
  }
  return -1;
}

// Uniform direction from the axis point `base`: wedge chosen by angle.
ModelPoint direction_from_axis(const LocalModel& model, const ModelPoint& base, double delta,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double pick = u(rng) * model.total_angle();
  int w = 0;
  while (w + 1 < model.wedge_count() && pick > model.wedges()[w].angle) {
    pick -= model.wedges()[w].angle;
    ++w;
  }
  const double phi = std::clamp(pick, 0.0, model.wedges()[w].angle);
  if (model.dimension() == 2) return ModelPoint{w, delta, phi, 0.0};
  const double c = 2.0 * u(rng) - 1.0;
  return ModelPoint{w, delta * std::sqrt(std::max(0.0, 1.0 - c * c)), phi, base.z + delta * c};
}

// Point at intrinsic distance delta from x in a random direction. Steps that
// leave x's wedge are rejected, except from the axis where every wedge is
// reachable.
std::optional<ModelPoint> step(const LocalModel& model, const ModelPoint& x, double delta,
                               std::mt19937_64& rng) {
  if (x.rho == 0.0) return direction_from_axis(model, x, delta, rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Point3 c = model.cartesian(x);
  double dx, dy, dz = 0.0;
  const double psi = 2.0 * kPi * u(rng);
  if (model.dimension() == 2) {
    dx = std::cos(psi);
    dy = std::sin(psi);
  } else {
    dz = 2.0 * u(rng) - 1.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - dz * dz));
    dx = s * std::cos(psi);
    dy = s * std::sin(psi);
  }
  const double px = c[0] + delta * dx, py = c[1] + delta * dy;
  const double phi = std::atan2(py, px);
  if (phi < 0.0 || phi > model.wedges()[x.wedge].angle) return std::nullopt;
  return ModelPoint{x.wedge, std::hypot(px, py), phi, c[2] + delta * dz};
}

// Uniform point of the model ball B(0, reach).
ModelPoint uniform_point(const LocalModel& model, double reach, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    ModelPoint p = direction_from_axis(model, origin(), 1.0, rng);
    if (model.dimension() == 2) {
      p.rho = reach * std::sqrt(u(rng));
      return p;
    }
    const double rho = reach * std::sqrt(u(rng)), z = reach * (2.0 * u(rng) - 1.0);
    if (rho * rho + z * z <= reach * reach) {
      p.rho = rho;
      p.z = z;
      return p;
    }
  }
}

}  // namespace

MapAnalysis::MapAnalysis(const EnergyModel& model, const TargetSpace& space,
                         std::vector<TargetPoint> values, std::optional<BallConstraint> ball,
                         SphereOptions sphere)
    : model_(&model), space_(space), values_(std::move(values)), ball_(std::move(ball)),
      sphere_(sphere), energy_(simplex_energies(model, space, values_)),
      locator_(model.mesh()) {}

TargetPoint MapAnalysis::value_at(const ModelPoint& p) const {
  return evaluate_pl(space_, mesh(), values_, locator_.locate(p));
}

BallSphere MapAnalysis::ball_sphere(const ModelPoint& center, double sigma) const {
  return ball_and_sphere(mesh(), field(), locator_, center, sigma, sphere_);
}

std::vector<double> log_radii(double sigma_max, int octaves, int per_octave) {
  if (!(sigma_max > 0.0) || octaves < 1 || per_octave < 1) {
    throw Error("log_radii needs sigma_max > 0, octaves >= 1 and per_octave >= 1");
  }
  std::vector<double> out;
  for (int j = octaves * per_octave; j >= 0; --j) {
    out.push_back(sigma_max * std::exp2(-static_cast<double>(j) / per_octave));
  }
  return out;
}

std::vector<double> energy_profile(const MapAnalysis& map, const ModelPoint& center,
                                   std::span<const double> radii) {
  std::vector<double> out;
  out.reserve(radii.size());
  for (double sigma : radii) {
    const BallSphere bs = map.ball_sphere(center, sigma);
    double e = 0.0;
    for (std::size_t s = 0; s < bs.fraction.size(); ++s) {
      if (bs.fraction[s] > 0.0) e += bs.fraction[s] * map.simplex_energy()[s];
    }
    out.push_back(e);
  }
  return out;
}

namespace {

struct SphereValues {
  std::vector<TargetPoint> values;
  std::vector<double> weights;
};

SphereValues sphere_values(const MapAnalysis& map, const BallSphere& bs) {
  SphereValues out;
  out.values.reserve(bs.sphere.size());
  out.weights.reserve(bs.sphere.size());
  for (const SphereSample& smp : bs.sphere) {
    out.values.push_back(evaluate_pl(map.space(), map.mesh(), map.values(), smp.loc));
    out.weights.push_back(smp.weight);
  }
  return out;
}

double moment_of(const TargetSpace& space, const SphereValues& sv, const TargetPoint& q) {
  double total = 0.0;
  for (std::size_t i = 0; i < sv.values.size(); ++i) {
    const double d = distance(space, sv.values[i], q);
    total += sv.weights[i] * d * d;
  }
  return total;
}

Moment optimal_from(const MapAnalysis& map, const SphereValues& sv) {
  Moment m;
  const bool constant = std::all_of(sv.values.begin(), sv.values.end(), [&](const TargetPoint& v) {
    return distance(map.space(), v, sv.values.front()) == 0.0;
  });
  if (constant) {
    m.center = sv.values.front();
    m.constant = true;
    return m;
  }
  m.center = frechet_mean(map.space(), sv.values, sv.weights, FrechetOptions{1e-13, 10000},
                          map.ball());
  m.value = moment_of(map.space(), sv, m.center);
  return m;
}

}  // namespace

double boundary_moment(const MapAnalysis& map, const ModelPoint& center, double sigma,
                       const TargetPoint& q) {
  map.space().validate(q);
  return moment_of(map.space(), sphere_values(map, map.ball_sphere(center, sigma)), q);
}

Moment optimal_moment(const MapAnalysis& map, const ModelPoint& center, double sigma) {
  return optimal_from(map, sphere_values(map, map.ball_sphere(center, sigma)));
}

RadialProfile radial_profile(const MapAnalysis& map, const ModelPoint& center,
                             std::span<const double> radii) {
  if (radii.empty()) throw Error("radial profile needs at least one radius");
  for (std::size_t j = 1; j < radii.size(); ++j) {
    if (!(radii[j] > radii[j - 1])) throw Error("profile radii must be strictly increasing");
  }
  RadialProfile out;
  out.center = center;
  for (double sigma : radii) {
    const BallSphere bs = map.ball_sphere(center, sigma);
    double e = 0.0;
    for (std::size_t s = 0; s < bs.fraction.size(); ++s) {
      if (bs.fraction[s] > 0.0) e += bs.fraction[s] * map.simplex_energy()[s];
    }
    const Moment m = optimal_from(map, sphere_values(map, bs));
    out.sigma.push_back(sigma);
    out.energy.push_back(e);
    out.moment.push_back(m.value);
    out.q.push_back(m.center);
    out.alpha.push_back(m.constant ? kInf : sigma * e / m.value);
  }
  return out;
}

OrderEstimate order_profile(const RadialProfile& profile) {
  OrderEstimate out;
  out.alpha = profile.alpha;
  if (profile.sigma.empty()) throw Error("empty radial profile");
  out.infinite = std::any_of(out.alpha.begin(), out.alpha.end(),
                             [](double a) { return std::isinf(a); });
  out.alpha_min_sigma = out.alpha.front();
  const int j1 = octave_above(profile.sigma, 0);
  const int j2 = j1 < 0 ? -1 : octave_above(profile.sigma, j1);
  if (j2 < 0) throw Error("order extrapolation needs two octaves of radii");
  if (out.infinite) {
    out.extrapolated = kInf;
    out.uncertainty = kInf;
    return out;
  }
  const double a0 = out.alpha[0], a1 = out.alpha[j1], a2 = out.alpha[j2];
  out.extrapolated = a0 + (a0 - a1);
  out.uncertainty = std::max(std::abs(a0 - a1), std::abs(a1 - a2));
  return out;
}

MonotonicityResult monotonicity_check(const RadialProfile& profile, double exponent,
                                      double tolerance) {
  MonotonicityResult out;
  out.exponent = exponent;
  out.tolerance = tolerance;
  const int m = static_cast<int>(profile.sigma.size());
  for (int j = 0; j < m; ++j) {
    const int k = octave_above(profile.sigma, j);
    if (k < 0) continue;
    const double rj = profile.energy[j] / std::pow(profile.sigma[j], exponent);
    const double rk = profile.energy[k] / std::pow(profile.sigma[k], exponent);
    ++out.octaves;
    if (rj > 0.0) out.worst_violation = std::max(out.worst_violation, 1.0 - rk / rj);
  }
  return out;
}

std::string to_string(PairPolicy policy) {
  return policy == PairPolicy::anchored ? "anchored" : "random";
}

HolderFit holder_fit(const MapAnalysis& map, const ModelPoint& center, double radius,
                     const HolderOptions& options) {
  const Mesh& mesh = map.mesh();
  const LocalModel& model = mesh.model();
  model.check_point(center);
  if (options.pairs < 1000) throw Error("a Holder fit needs at least 1000 sample pairs");
  if (options.bins < 3) throw Error("a Holder fit needs at least 3 bins");
  if (!(radius > 0.0) || radial(center) + radius > (1.0 - options.collar) * mesh.radius()) {
    throw Error("Holder fit region must avoid the outer collar of the mesh ball");
  }

  const double lo = radius * 1e-3;
  const double log_lo = std::log(lo), log_hi = std::log(radius);
  const TargetPoint f_center = map.value_at(center);

  struct Pair {
    double sep, dist;
  };
  std::vector<Pair> pairs;
  pairs.reserve(options.pairs);
  const long max_attempts = 50 * options.pairs;
  for (long i = 0; i < max_attempts && static_cast<long>(pairs.size()) < options.pairs; ++i) {
    std::mt19937_64 rng = make_rng(options.seed, kStreamHolderPairs, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelPoint x = center;
    if (options.policy == PairPolicy::random) {
      x = uniform_point(model, radial(center) + radius, rng);
      if (model.distance(center, x) > radius) continue;
    }
    const double delta = std::exp(log_lo + (log_hi - log_lo) * u(rng));
    const std::optional<ModelPoint> y = step(model, x, delta, rng);
    if (!y || model.distance(center, *y) > radius) continue;
    const double sep = model.distance(x, *y);
    const double cell = mesh.local_size(std::max(radial(x), radial(*y)));
    if (sep < options.min_separation_cells * cell) continue;
    const TargetPoint fx = options.policy == PairPolicy::anchored ? f_center : map.value_at(x);
    pairs.push_back({sep, distance(map.space(), fx, map.value_at(*y))});
  }

  HolderFit fit;
  fit.policy = options.policy;
  fit.pairs = static_cast<long>(pairs.size());
  if (pairs.size() < 1000) throw Error("too few admissible pairs for a Holder fit");
  double smin = kInf, smax = 0.0;
  for (const Pair& p : pairs) {
    smin = std::min(smin, p.sep);
    smax = std::max(smax, p.sep);
  }
  const double a = std::log(smin), b = std::log(smax);
  std::vector<int> best(options.bins, -1);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    int bin = b > a ? static_cast<int>((std::log(pairs[i].sep) - a) / (b - a) * options.bins) : 0;
    bin = std::clamp(bin, 0, options.bins - 1);
    if (best[bin] < 0 || pairs[i].dist > pairs[best[bin]].dist) best[bin] = static_cast<int>(i);
  }
  std::vector<double> lx, ly;
  for (int k : best) {
    if (k >= 0 && pairs[k].dist > 0.0) {
      lx.push_back(std::log(pairs[k].sep));
      ly.push_back(std::log(pairs[k].dist));
    }
  }
  fit.bins_used = static_cast<int>(lx.size());
  if (lx.size() < 3) return fit;
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) return fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.constant = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + fit.exponent * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / lx.size());
  fit.valid = true;
  return fit;
}

BlowUpFrame blow_up(const MapAnalysis& map, double lambda) {
  const LocalModel& model = map.mesh().model();
  const int n = model.dimension();
  BlowUpFrame frame;
  frame.lambda = lambda;
  const Moment m = optimal_moment(map, origin(), lambda);
  frame.moment = m.value;
  frame.mu = std::sqrt(std::pow(lambda, 1 - n) * m.value);
  frame.degenerate = m.constant || !(frame.mu > 0.0);
  const TargetPoint f0 = map.value_at(origin());
  constexpr int kRadii = 8, kAngles = 16;
  for (int w = 0; w < model.wedge_count(); ++w) {
    const double a = model.wedges()[w].angle;
    for (int i = 0; i < kAngles; ++i) {
      const double phi = (i + 0.5) * a / kAngles;
      for (int k = 1; k <= kRadii; ++k) {
        const ModelPoint x{w, static_cast<double>(k) / kRadii, phi, 0.0};
        const ModelPoint lx{w, lambda * x.rho, phi, 0.0};
        const double d = distance(map.space(), map.value_at(lx), f0);
        frame.grid.push_back(x);
        frame.rescaled.push_back(frame.degenerate ? 0.0 : d / frame.mu);
      }
    }
  }
  return frame;
}

double homogeneity_deviation(const BlowUpFrame& frame, double alpha) {
  if (frame.degenerate) return kInf;
  // Grid points come in runs of equal direction ending at |x| = 1.
  double worst = 0.0;
  const std::size_t m = frame.grid.size();
  std::size_t start = 0;
  while (start < m) {
    std::size_t end = start;
    while (end + 1 < m && frame.grid[end + 1].wedge == frame.grid[start].wedge &&
           frame.grid[end + 1].phi == frame.grid[start].phi) {
      ++end;
    }
    const double unit = frame.rescaled[end];
    for (std::size_t i = start; i <= end; ++i) {
      const double expect = std::pow(frame.grid[i].rho, alpha) * unit;
      worst = std::max(worst, std::abs(frame.rescaled[i] - expect));
    }
    start = end + 1;
  }
  return worst;
}

std::vector<double> homogeneity_check(std::span<const BlowUpFrame> frames, double alpha) {
  std::vector<double> out;
  for (const BlowUpFrame& f : frames) out.push_back(homogeneity_deviation(f, alpha));
  return out;
}

}  // namespace polyharm
