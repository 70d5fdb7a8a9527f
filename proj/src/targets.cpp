#include "polyharm/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace polyharm {

using Coords = std::array<double, kMaxTargetCoords>;

struct TargetSpace::TreeData {
  std::vector<TreeEdge> edges;
  int nodes = 0;
  std::vector<double> node_dist;  // nodes x nodes
  std::vector<int> next_hop;      // next node from a toward b
  std::vector<int> edge_between;  // edge id joining adjacent nodes, -1 otherwise

  double dist(int a, int b) const { return node_dist[a * nodes + b]; }
  int next(int a, int b) const { return next_hop[a * nodes + b]; }
  int edge_of(int a, int b) const { return edge_between[a * nodes + b]; }

  double to_node(const TargetPoint& p, int node) const {
    const TreeEdge& e = edges[p.edge];
    const double via_a = p.x[0] + dist(e.a, node);
    const double via_b = (e.length - p.x[0]) + dist(e.b, node);
    return std::min(via_a, via_b);
  }
};

namespace {

double sq(double v) { return v * v; }

double norm(const Coords& v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

double dot(const Coords& a, const Coords& b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

TargetPoint normalized(const Coords& v, int n) {
  const double len = norm(v, n);
  if (!(len > 0.0)) throw Error("cannot normalize a zero vector onto the sphere");
  TargetPoint p;
  p.size = n;
  for (int i = 0; i < n; ++i) p.x[i] = v[i] / len;
  return p;
}

double sphere_distance(const TargetPoint& p, const TargetPoint& q, int n) {
  // 2 atan2(|p - q|, |p + q|) equals arccos<p, q> and stays accurate for
  // nearly equal and nearly antipodal pairs.
  double minus = 0.0;
  double plus = 0.0;
  for (int i = 0; i < n; ++i) {
    minus += sq(p.x[i] - q.x[i]);
    plus += sq(p.x[i] + q.x[i]);
  }
  return 2.0 * std::atan2(std::sqrt(minus), std::sqrt(plus));
}

void check_match(const TargetSpace& space, const TargetPoint& p) {
  if (p.size != space.coordinate_count()) {
    throw Error("target point has " + std::to_string(p.size) + " coordinates, " +
                space.describe() + " expects " + std::to_string(space.coordinate_count()));
  }
  const bool tree = space.kind() == TargetSpace::Kind::tree;
  if (tree && (p.edge < 0 || p.edge >= space.tree_edge_count())) {
    throw Error("tree point refers to edge " + std::to_string(p.edge) + " outside the tree");
  }
  if (!tree && p.edge != -1) throw Error("tree point used with " + space.describe());
}

void check_weights(std::span<const TargetPoint> points, std::span<const double> weights) {
  if (points.size() != weights.size()) throw Error("points and weights differ in length");
  if (points.empty()) throw Error("weighted mean of an empty point set");
}

}  // namespace

TargetPoint TargetPoint::vector(std::span<const double> coords) {
  if (coords.empty() || coords.size() > static_cast<std::size_t>(kMaxTargetCoords)) {
    throw Error("target points carry between 1 and " + std::to_string(kMaxTargetCoords) +
                " coordinates");
  }
  TargetPoint p;
  p.size = static_cast<int>(coords.size());
  std::copy(coords.begin(), coords.end(), p.x.begin());
  return p;
}

TargetSpace TargetSpace::sphere(int m) {
  if (m < 1 || m + 1 > kMaxTargetCoords) {
    throw Error("sphere dimension must be in [1, " + std::to_string(kMaxTargetCoords - 1) + "]");
  }
  TargetSpace s;
  s.kind_ = Kind::sphere;
  s.dim_ = m;
  return s;
}

TargetSpace TargetSpace::arc(double length) {
  if (!(length > 0.0) || !(length < kPi)) throw Error("arc length must lie in (0, pi)");
  TargetSpace s;
  s.kind_ = Kind::arc;
  s.dim_ = 1;
  s.length_ = length;
  return s;
}

TargetSpace TargetSpace::euclidean(int m) {
  if (m < 1 || m > kMaxTargetCoords) {
    throw Error("euclidean dimension must be in [1, " + std::to_string(kMaxTargetCoords) + "]");
  }
  TargetSpace s;
  s.kind_ = Kind::euclidean;
  s.dim_ = m;
  return s;
}

TargetSpace TargetSpace::tree(std::vector<TreeEdge> edges) {
  if (edges.empty()) throw Error("a tree needs at least one edge");
  auto data = std::make_shared<TreeData>();
  int nodes = 0;
  for (const TreeEdge& e : edges) {
    if (e.a < 0 || e.b < 0 || e.a == e.b) throw Error("tree edge with invalid endpoints");
    if (!(e.length > 0.0)) throw Error("tree edge lengths must be positive");
    nodes = std::max({nodes, e.a + 1, e.b + 1});
  }
  if (static_cast<int>(edges.size()) != nodes - 1) throw Error("edge list is not a tree");
  data->edges = std::move(edges);
  data->nodes = nodes;
  const double inf = std::numeric_limits<double>::infinity();
  data->node_dist.assign(nodes * nodes, inf);
  data->next_hop.assign(nodes * nodes, -1);
  data->edge_between.assign(nodes * nodes, -1);
  std::vector<std::vector<std::pair<int, int>>> adj(nodes);
  for (int e = 0; e < static_cast<int>(data->edges.size()); ++e) {
    const TreeEdge& te = data->edges[e];
    if (data->edge_between[te.a * nodes + te.b] != -1) throw Error("edge list is not a tree");
    data->edge_between[te.a * nodes + te.b] = e;
    data->edge_between[te.b * nodes + te.a] = e;
    adj[te.a].push_back({te.b, e});
    adj[te.b].push_back({te.a, e});
  }
  // Depth-first search from every node; in a tree the first hop is unique.
  for (int s = 0; s < nodes; ++s) {
    std::vector<int> stack{s};
    data->node_dist[s * nodes + s] = 0.0;
    data->next_hop[s * nodes + s] = s;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (auto [v, e] : adj[u]) {
        if (data->node_dist[s * nodes + v] != inf) continue;
        data->node_dist[s * nodes + v] = data->node_dist[s * nodes + u] + data->edges[e].length;
        data->next_hop[s * nodes + v] = (u == s) ? v : data->next_hop[s * nodes + u];
        stack.push_back(v);
      }
    }
    for (int v = 0; v < nodes; ++v) {
      if (data->node_dist[s * nodes + v] == inf) throw Error("edge list is not connected");
    }
  }
  TargetSpace t;
  t.kind_ = Kind::tree;
  t.dim_ = 1;
  t.tree_ = std::move(data);
  return t;
}

TargetSpace TargetSpace::star(int legs, double leg_length) {
  if (legs < 1) throw Error("a star needs at least one leg");
  std::vector<TreeEdge> edges;
  for (int i = 0; i < legs; ++i) edges.push_back({0, i + 1, leg_length});
  return tree(std::move(edges));
}

int TargetSpace::coordinate_count() const {
  switch (kind_) {
    case Kind::sphere: return dim_ + 1;
    case Kind::euclidean: return dim_;
    case Kind::arc:
    case Kind::tree: return 1;
  }
  return 1;
}

std::string TargetSpace::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::sphere: out << "sphere(" << dim_ << ")"; break;
    case Kind::arc: out << "arc(" << length_ << ")"; break;
    case Kind::euclidean: out << "euclidean(" << dim_ << ")"; break;
    case Kind::tree: out << "tree(" << tree_->edges.size() << " edges)"; break;
  }
  return out.str();
}

int TargetSpace::tree_node_count() const { return tree_ ? tree_->nodes : 0; }
int TargetSpace::tree_edge_count() const {
  return tree_ ? static_cast<int>(tree_->edges.size()) : 0;
}
const TreeEdge& TargetSpace::tree_edge(int e) const {
  if (!tree_ || e < 0 || e >= tree_edge_count()) throw Error("tree edge index out of range");
  return tree_->edges[e];
}
double TargetSpace::tree_node_distance(int a, int b) const {
  if (!tree_ || a < 0 || b < 0 || a >= tree_->nodes || b >= tree_->nodes) {
    throw Error("tree node index out of range");
  }
  return tree_->dist(a, b);
}
TargetPoint TargetSpace::tree_node_point(int node) const {
  if (!tree_ || node < 0 || node >= tree_->nodes) throw Error("tree node index out of range");
  for (int e = 0; e < tree_edge_count(); ++e) {
    const TreeEdge& te = tree_->edges[e];
    if (te.a == node) return TargetPoint::on_edge(e, 0.0);
    if (te.b == node) return TargetPoint::on_edge(e, te.length);
  }
  throw Error("isolated tree node");
}

void TargetSpace::validate(const TargetPoint& p) const {
  check_match(*this, p);
  for (int i = 0; i < p.size; ++i) {
    if (!std::isfinite(p.x[i])) throw Error("target point has non-finite coordinates");
  }
  switch (kind_) {
    case Kind::sphere:
      if (std::abs(norm(p.x, p.size) - 1.0) > 1e-12) throw Error("sphere point is not a unit vector");
      break;
    case Kind::arc:
      if (p.x[0] < 0.0 || p.x[0] > length_) throw Error("arc point outside [0, L]");
      break;
    case Kind::tree: {
      const double len = tree_->edges[p.edge].length;
      if (p.x[0] < 0.0 || p.x[0] > len) throw Error("tree point offset outside its edge");
      break;
    }
    case Kind::euclidean: break;
  }
}

void BallConstraint::validate() const {
  if (!(radius > 0.0) || !(radius < kPi / 4.0)) {
    throw Error("ball radius tau must satisfy 0 < tau < pi/4, got " + std::to_string(radius));
  }
}

double distance(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q) {
  check_match(space, p);
  check_match(space, q);
  switch (space.kind()) {
    case TargetSpace::Kind::sphere: return sphere_distance(p, q, p.size);
    case TargetSpace::Kind::arc: return std::abs(p.x[0] - q.x[0]);
    case TargetSpace::Kind::euclidean: {
      double s = 0.0;
      for (int i = 0; i < p.size; ++i) s += sq(p.x[i] - q.x[i]);
      return std::sqrt(s);
    }
    case TargetSpace::Kind::tree: {
      if (p.edge == q.edge) return std::abs(p.x[0] - q.x[0]);
      const auto& t = *space.tree_;
      const TreeEdge& ep = t.edges[p.edge];
      const TreeEdge& eq = t.edges[q.edge];
      const double pa = p.x[0], pb = ep.length - p.x[0];
      const double qa = q.x[0], qb = eq.length - q.x[0];
      return std::min({pa + t.dist(ep.a, eq.a) + qa, pa + t.dist(ep.a, eq.b) + qb,
                       pb + t.dist(ep.b, eq.a) + qa, pb + t.dist(ep.b, eq.b) + qb});
    }
  }
  return 0.0;
}

namespace sphere {

Coords log(int n, const TargetPoint& base, const TargetPoint& p) {
  const double c = dot(base.x, p.x, n);
  Coords v{};
  for (int i = 0; i < n; ++i) v[i] = p.x[i] - c * base.x[i];
  const double s = norm(v, n);
  const double theta = sphere_distance(base, p, n);
  if (s < 1e-300) return Coords{};
  const double scale = theta / s;
  for (int i = 0; i < n; ++i) v[i] *= scale;
  return v;
}

TargetPoint exp(int n, const TargetPoint& base, const Coords& v) {
  const double len = norm(v, n);
  if (len < 1e-300) return base;
  Coords out{};
  const double c = std::cos(len);
  const double s = std::sin(len) / len;
  for (int i = 0; i < n; ++i) out[i] = c * base.x[i] + s * v[i];
  return normalized(out, n);
}

}  // namespace sphere

TargetPoint interpolate(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                        double t) {
  check_match(space, p);
  check_match(space, q);
  if (!(t >= 0.0 && t <= 1.0)) throw Error("interpolation fraction outside [0, 1]");
  if (t == 0.0) return p;
  if (t == 1.0) return q;
  switch (space.kind()) {
    case TargetSpace::Kind::sphere: {
      const int n = p.size;
      const double theta = sphere_distance(p, q, n);
      double plus = 0.0;
      for (int i = 0; i < n; ++i) plus += sq(p.x[i] + q.x[i]);
      if (std::sqrt(plus) < 1e-12) {
        throw Error("antipodal sphere points: the geodesic is not unique");
      }
      Coords out{};
      if (theta < 1e-9) {
        for (int i = 0; i < n; ++i) out[i] = (1.0 - t) * p.x[i] + t * q.x[i];
      } else {
        const double s = std::sin(theta);
        const double a = std::sin((1.0 - t) * theta) / s;
        const double b = std::sin(t * theta) / s;
        for (int i = 0; i < n; ++i) out[i] = a * p.x[i] + b * q.x[i];
      }
      return normalized(out, n);
    }
    case TargetSpace::Kind::arc:
    case TargetSpace::Kind::euclidean: {
      TargetPoint out = p;
      for (int i = 0; i < p.size; ++i) out.x[i] = (1.0 - t) * p.x[i] + t * q.x[i];
      return out;
    }
    case TargetSpace::Kind::tree: {
      const auto& tr = *space.tree_;
      if (p.edge == q.edge) {
        return TargetPoint::on_edge(p.edge, (1.0 - t) * p.x[0] + t * q.x[0]);
      }
      const TreeEdge& ep = tr.edges[p.edge];
      const TreeEdge& eq = tr.edges[q.edge];
      // Choose the exit node of p's edge and the entry node of q's edge.
      struct Route { double len; int u; int v; double pu; double vq; };
      const double pa = p.x[0], pb = ep.length - p.x[0];
      const double qa = q.x[0], qb = eq.length - q.x[0];
      const Route routes[4] = {{pa + tr.dist(ep.a, eq.a) + qa, ep.a, eq.a, pa, qa},
                               {pa + tr.dist(ep.a, eq.b) + qb, ep.a, eq.b, pa, qb},
                               {pb + tr.dist(ep.b, eq.a) + qa, ep.b, eq.a, pb, qa},
                               {pb + tr.dist(ep.b, eq.b) + qb, ep.b, eq.b, pb, qb}};
      const Route* best = &routes[0];
      for (const Route& r : routes) {
        if (r.len < best->len) best = &r;
      }
      double s = t * best->len;
      if (s <= best->pu) {
        const double off = (best->u == ep.a) ? p.x[0] - s : p.x[0] + s;
        return TargetPoint::on_edge(p.edge, std::clamp(off, 0.0, ep.length));
      }
      s -= best->pu;
      int cur = best->u;
      while (cur != best->v) {
        const int nxt = tr.next(cur, best->v);
        const int e = tr.edge_of(cur, nxt);
        const TreeEdge& te = tr.edges[e];
        if (s <= te.length) {
          const double off = (te.a == cur) ? s : te.length - s;
          return TargetPoint::on_edge(e, std::clamp(off, 0.0, te.length));
        }
        s -= te.length;
        cur = nxt;
      }
      const double off = (best->v == eq.a) ? s : eq.length - s;
      return TargetPoint::on_edge(q.edge, std::clamp(off, 0.0, eq.length));
    }
  }
  return p;
}

TargetPoint extrapolate(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                        double t) {
  if (t >= 0.0 && t <= 1.0) return interpolate(space, p, q, t);
  check_match(space, p);
  check_match(space, q);
  switch (space.kind()) {
    case TargetSpace::Kind::sphere: {
      Coords v = sphere::log(p.size, p, q);
      for (double& c : v) c *= t;
      return sphere::exp(p.size, p, v);
    }
    case TargetSpace::Kind::arc: {
      const double s = p.x[0] + t * (q.x[0] - p.x[0]);
      return TargetPoint::scalar(std::clamp(s, 0.0, space.arc_length()));
    }
    case TargetSpace::Kind::euclidean: {
      TargetPoint out = p;
      for (int i = 0; i < p.size; ++i) out.x[i] = p.x[i] + t * (q.x[i] - p.x[i]);
      return out;
    }
    case TargetSpace::Kind::tree:
      throw Error("geodesic extension is not unique in a tree");
  }
  return p;
}

double weighted_objective(const TargetSpace& space, const TargetPoint& x,
                          std::span<const TargetPoint> points, std::span<const double> weights) {
  double f = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) f += weights[i] * sq(distance(space, x, points[i]));
  return f;
}

TargetPoint tree_weighted_minimizer(const TargetSpace& space, std::span<const TargetPoint> points,
                                    std::span<const double> weights) {
  check_weights(points, weights);
  if (space.kind() != TargetSpace::Kind::tree) throw Error("tree minimizer on a non-tree space");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw Error("weights must have positive sum");
  const auto& tr = *space.tree_;
  for (const TargetPoint& p : points) check_match(space, p);

  // Along a fixed edge every squared distance is (s - c_i)^2 for an affine
  // anchor c_i, so the objective is an exact quadratic in the offset s.
  TargetPoint best;
  double best_value = std::numeric_limits<double>::infinity();
  for (int e = 0; e < static_cast<int>(tr.edges.size()); ++e) {
    const TreeEdge& te = tr.edges[e];
    double wc = 0.0;
    std::vector<double> anchors(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const TargetPoint& p = points[i];
      double c;
      if (p.edge == e) {
        c = p.x[0];
      } else {
        const double da = tr.to_node(p, te.a);
        const double db = tr.to_node(p, te.b);
        c = (da <= db) ? -da : te.length + db;
      }
      anchors[i] = c;
      wc += weights[i] * c;
    }
    const double s = std::clamp(wc / total, 0.0, te.length);
    double value = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) value += weights[i] * sq(s - anchors[i]);
    if (value < best_value) {
      best_value = value;
      best = TargetPoint::on_edge(e, s);
    }
  }
  return best;
}

namespace {

TargetPoint linear_mean(const TargetSpace& space, std::span<const TargetPoint> points,
                        std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw Error("weights must have positive sum");
  TargetPoint out;
  out.size = space.coordinate_count();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int k = 0; k < out.size; ++k) out.x[k] += weights[i] * points[i].x[k];
  }
  for (int k = 0; k < out.size; ++k) out.x[k] /= total;
  if (space.kind() == TargetSpace::Kind::arc) out.x[0] = std::clamp(out.x[0], 0.0, space.arc_length());
  return out;
}

TargetPoint karcher(const TargetSpace& space, std::span<const TargetPoint> points,
                    std::span<const double> weights, TargetPoint x, const FrechetOptions& options) {
  const int n = space.coordinate_count();
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (int it = 0; it < options.max_iterations; ++it) {
    Coords step{};
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (weights[i] == 0.0) continue;
      const Coords v = sphere::log(n, x, points[i]);
      for (int k = 0; k < n; ++k) step[k] += weights[i] * v[k];
    }
    for (int k = 0; k < n; ++k) step[k] /= total;
    const double move = norm(step, n);
    x = sphere::exp(n, x, step);
    if (move < options.tol) return x;
  }
  throw Error("Frechet mean iteration did not converge");
}

}  // namespace

TargetPoint frechet_mean_from(const TargetSpace& space, std::span<const TargetPoint> points,
                              std::span<const double> weights, const TargetPoint& start,
                              FrechetOptions options) {
  check_weights(points, weights);
  switch (space.kind()) {
    case TargetSpace::Kind::arc:
    case TargetSpace::Kind::euclidean: return linear_mean(space, points, weights);
    case TargetSpace::Kind::tree: return tree_weighted_minimizer(space, points, weights);
    case TargetSpace::Kind::sphere: {
      const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      if (!(total > 0.0)) throw Error("weights must have positive sum");
      return karcher(space, points, weights, start, options);
    }
  }
  return start;
}

TargetPoint frechet_mean(const TargetSpace& space, std::span<const TargetPoint> points,
                         std::span<const double> weights, FrechetOptions options,
                         const std::optional<BallConstraint>& ball) {
  check_weights(points, weights);
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("Frechet mean weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw Error("Frechet mean weights are all zero");
  for (const TargetPoint& p : points) space.validate(p);
  if (space.kind() != TargetSpace::Kind::sphere) {
    return frechet_mean_from(space, points, weights, points.front(), options);
  }

  const int n = space.coordinate_count();
  TargetPoint start;
  if (ball) {
    ball->validate();
    space.validate(ball->center);
    for (const TargetPoint& p : points) {
      if (distance(space, ball->center, p) > ball->radius + 1e-12) {
        throw Error("point outside the admissible ball; the center of mass is not unique");
      }
    }
    start = ball->center;
  } else {
    Coords sum{};
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (int k = 0; k < n; ++k) sum[k] += weights[i] * points[i].x[k];
    }
    if (norm(sum, n) < 1e-12) throw Error("points are not contained in an admissible ball");
    start = normalized(sum, n);
    double spread = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (weights[i] > 0.0) spread = std::max(spread, distance(space, start, points[i]));
    }
    if (!(spread < kPi / 4.0)) {
      throw Error("points are not contained in a ball of radius < pi/4");
    }
  }
  return karcher(space, points, weights, start, options);
}

TargetPoint signed_weight_minimizer(const TargetSpace& space, std::span<const TargetPoint> points,
                                    std::span<const double> weights, const TargetPoint& start,
                                    FrechetOptions options) {
  check_weights(points, weights);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw Error("weights must have positive sum");
  switch (space.kind()) {
    case TargetSpace::Kind::arc:
    case TargetSpace::Kind::euclidean: return linear_mean(space, points, weights);
    case TargetSpace::Kind::tree: return tree_weighted_minimizer(space, points, weights);
    case TargetSpace::Kind::sphere: break;
  }
  const int n = space.coordinate_count();
  TargetPoint x = start;
  double fx = weighted_objective(space, x, points, weights);
  for (int it = 0; it < options.max_iterations; ++it) {
    Coords dir{};
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Coords v = sphere::log(n, x, points[i]);
      for (int k = 0; k < n; ++k) dir[k] += weights[i] * v[k];
    }
    for (int k = 0; k < n; ++k) dir[k] /= total;
    const double len = norm(dir, n);
    if (len < options.tol) return x;
    double step = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, step *= 0.5) {
      Coords trial_dir = dir;
      for (double& c : trial_dir) c *= step;
      const TargetPoint trial = sphere::exp(n, x, trial_dir);
      const double ft = weighted_objective(space, trial, points, weights);
      if (ft < fx) {
        x = trial;
        fx = ft;
        improved = true;
        break;
      }
    }
    if (!improved || step * len < options.tol) return x;
  }
  return x;
}

TargetPoint project_to_ball(const TargetSpace& space, const TargetPoint& p,
                            const BallConstraint& ball) {
  const double d = distance(space, ball.center, p);
  if (d <= ball.radius) return p;
  return interpolate(space, ball.center, p, ball.radius / d);
}

}  // namespace polyharm
