#include "polyharm/energy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "polyharm/cone.hpp"
#include "polyharm/csv.hpp"

namespace polyharm {

namespace {

double sq(double v) { return v * v; }

double pair_distance_sq(const TargetSpace& space, const TargetPoint& a, const TargetPoint& b,
                        DistanceKind kind) {
  const double d = distance(space, a, b);
  return kind == DistanceKind::base ? d * d : lifted_distance_sq(d);
}

Mat edge_matrix(const Mesh& mesh, int s) {
  const int n = mesh.dimension();
  Mat e(n, n);
  const Point3 x0 = mesh.local_coords(s, 0);
  for (int k = 1; k <= n; ++k) {
    const Point3 xk = mesh.local_coords(s, k);
    for (int i = 0; i < n; ++i) e(i, k - 1) = xk[i] - x0[i];
  }
  return e;
}

bool linear_target(const TargetSpace& space) {
  return space.kind() == TargetSpace::Kind::euclidean || space.kind() == TargetSpace::Kind::arc;
}

}  // namespace

int EnergyModel::pair_index(int i, int j) {
  if (i > j) std::swap(i, j);
  // Pairs of {0,1,2,3} in order (0,1) (0,2) (0,3) (1,2) (1,3) (2,3).
  static constexpr int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
  return table[i][j];
}

EnergyModel::EnergyModel(const Mesh& mesh, const MetricField& field)
    : mesh_(&mesh), field_(field) {
  const int n = mesh.dimension();
  if (field.dimension() != n) throw Error("metric dimension does not match the mesh");
  const int ns = mesh.simplex_count();
  weights_.assign(ns, {});
  volume_g_.assign(ns, 0.0);
  metric_.assign(ns, Mat());
  adjacency_.assign(mesh.vertex_count(), {});
  for (int s = 0; s < ns; ++s) {
    const double vol = mesh.simplex_volume(s);
    if (!(vol > 1e-14)) throw Error("degenerate simplex " + std::to_string(s));
    Point3 bary{0, 0, 0};
    for (int k = 0; k <= n; ++k) {
      const Point3 x = mesh.local_coords(s, k);
      for (int i = 0; i < 3; ++i) bary[i] += x[i] / (n + 1);
    }
    const MetricSample g = metric_eval(field, mesh.model(), mesh.simplices()[s].wedge, bary);
    metric_[s] = g.g;
    volume_g_[s] = vol * g.volume_density;
    const Mat inv_e = edge_matrix(mesh, s).inverse();
    // Gradients of the barycentric coordinates, one column per vertex.
    Mat grads(n, n + 1);
    for (int k = 1; k <= n; ++k) grads.col(k) = inv_e.row(k - 1).transpose();
    grads.col(0) = -grads.rightCols(n).rowwise().sum();
    const Mat ginv = g.g.inverse();
    for (int i = 0; i <= n; ++i) {
      for (int j = i + 1; j <= n; ++j) {
        const double w = -volume_g_[s] * grads.col(i).dot(ginv * grads.col(j));
        weights_[s][pair_index(i, j)] = w;
      }
    }
  }
  // Assemble vertex adjacency with summed weights.
  std::vector<std::vector<std::pair<int, double>>> raw(mesh.vertex_count());
  for (int s = 0; s < ns; ++s) {
    const Simplex& sx = mesh.simplices()[s];
    for (int i = 0; i <= n; ++i) {
      for (int j = i + 1; j <= n; ++j) {
        const double w = weights_[s][pair_index(i, j)];
        raw[sx.v[i]].push_back({sx.v[j], w});
        raw[sx.v[j]].push_back({sx.v[i], w});
      }
    }
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    auto& list = raw[v];
    std::sort(list.begin(), list.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [u, w] : list) {
      if (!adjacency_[v].empty() && adjacency_[v].back().first == u) {
        adjacency_[v].back().second += w;
      } else {
        adjacency_[v].push_back({u, w});
      }
    }
    for (const auto& [u, w] : adjacency_[v]) {
      if (u > v && w < 0.0) ++negative_;
    }
  }
}

double simplex_energy(const EnergyModel& model, const TargetSpace& space,
                      std::span<const TargetPoint> values, int s, DistanceKind kind) {
  const Mesh& mesh = model.mesh();
  const Simplex& sx = mesh.simplices()[s];
  const int n = mesh.dimension();
  double e = 0.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      e += model.weight(s, i, j) * pair_distance_sq(space, values[sx.v[i]], values[sx.v[j]], kind);
    }
  }
  return e;
}

std::vector<double> simplex_energies(const EnergyModel& model, const TargetSpace& space,
                                     std::span<const TargetPoint> values, DistanceKind kind) {
  const Mesh& mesh = model.mesh();
  if (static_cast<int>(values.size()) != mesh.vertex_count()) {
    throw Error("map has " + std::to_string(values.size()) + " values for " +
                std::to_string(mesh.vertex_count()) + " vertices");
  }
  std::vector<double> out(mesh.simplex_count());
  for (int s = 0; s < mesh.simplex_count(); ++s) out[s] = simplex_energy(model, space, values, s, kind);
  return out;
}

EnergyReport total_energy(const EnergyModel& model, const TargetSpace& space,
                          std::span<const TargetPoint> values, DistanceKind kind) {
  EnergyReport rep;
  rep.per_simplex = simplex_energies(model, space, values, kind);
  for (double e : rep.per_simplex) rep.total += e;
  rep.history.push_back(rep.total);
  rep.converged = true;
  return rep;
}

double pullback_form(const EnergyModel& model, const TargetSpace& space,
                     std::span<const TargetPoint> values, int s, const Vec& z, const Vec& w) {
  const Mesh& mesh = model.mesh();
  const int n = mesh.dimension();
  if (z.size() != n || w.size() != n) throw Error("vector size does not match the mesh dimension");
  const Simplex& sx = mesh.simplices()[s];
  const Mat inv_e = edge_matrix(mesh, s).inverse();
  const Vec cz = inv_e * z, cw = inv_e * w;
  Mat m(n, n);
  for (int k = 1; k <= n; ++k) {
    for (int l = k; l <= n; ++l) {
      const double d0k = sq(distance(space, values[sx.v[0]], values[sx.v[k]]));
      const double d0l = sq(distance(space, values[sx.v[0]], values[sx.v[l]]));
      const double dkl = sq(distance(space, values[sx.v[k]], values[sx.v[l]]));
      m(k - 1, l - 1) = m(l - 1, k - 1) = 0.5 * (d0k + d0l - dkl);
    }
  }
  // Symmetrized so that swapping z and w gives the same bits.
  return 0.5 * (cz.dot(m * cw) + cw.dot(m * cz));
}

double directional_energy(const EnergyModel& model, const TargetSpace& space,
                          std::span<const TargetPoint> values, std::span<const Vec> z) {
  const Mesh& mesh = model.mesh();
  if (static_cast<int>(z.size()) != mesh.simplex_count()) {
    throw Error("vector field needs one vector per simplex");
  }
  double total = 0.0;
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    total += model.volume_g(s) * pullback_form(model, space, values, s, z[s], z[s]);
  }
  return total;
}

namespace {

struct LocalProblem {
  std::vector<TargetPoint> points;
  std::vector<double> weights;
  bool signed_weights = false;
};

void gather(const EnergyModel& model, std::span<const TargetPoint> values, int v,
            LocalProblem& out) {
  out.points.clear();
  out.weights.clear();
  out.signed_weights = false;
  for (const auto& [u, w] : model.adjacency()[v]) {
    out.points.push_back(values[u]);
    out.weights.push_back(w);
    if (w < 0.0) out.signed_weights = true;
  }
}

TargetPoint local_minimizer(const TargetSpace& space, const LocalProblem& lp,
                            const TargetPoint& current, const FrechetOptions& options) {
  if (lp.signed_weights) {
    return signed_weight_minimizer(space, lp.points, lp.weights, current, options);
  }
  return frechet_mean_from(space, lp.points, lp.weights, current, options);
}

TargetPoint constrain(const TargetSpace& space, TargetPoint p, const BallConstraint& ball) {
  if (space.kind() == TargetSpace::Kind::arc) {
    p.x[0] = std::clamp(p.x[0], 0.0, space.arc_length());
  }
  return project_to_ball(space, p, ball);
}

}  // namespace

TargetPoint relax_vertex(const EnergyModel& model, const TargetSpace& space,
                         std::span<const TargetPoint> values, int v, const BallConstraint& ball,
                         const FrechetOptions& options) {
  LocalProblem lp;
  gather(model, values, v, lp);
  return constrain(space, local_minimizer(space, lp, values[v], options), ball);
}

SolveResult minimize(const EnergyModel& model, const TargetSpace& space,
                     std::vector<TargetPoint> initial, const BallConstraint& ball,
                     const SolverOptions& options) {
  const Mesh& mesh = model.mesh();
  ball.validate();
  space.validate(ball.center);
  if (static_cast<int>(initial.size()) != mesh.vertex_count()) {
    throw Error("initial map does not match the mesh");
  }
  if (!(options.omega > 0.0 && options.omega < 2.0)) {
    throw Error("over-relaxation factor must lie in (0, 2)");
  }
  std::vector<int> interior;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    space.validate(initial[v]);
    if (mesh.vertices()[v].boundary) {
      if (distance(space, ball.center, initial[v]) > ball.radius + 1e-12) {
        throw Error("boundary value at vertex " + std::to_string(v) + " lies outside the ball");
      }
    } else {
      initial[v] = constrain(space, initial[v], ball);
      interior.push_back(v);
    }
  }
  const double omega = linear_target(space) ? options.omega : 1.0;

  SolveResult out;
  out.values = std::move(initial);
  EnergyReport& rep = out.report;
  double energy = total_energy(model, space, out.values).total;
  rep.history.push_back(energy);
  LocalProblem lp;
  for (long sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_move = 0.0;
    for (int v : interior) {
      gather(model, out.values, v, lp);
      if (lp.signed_weights) ++rep.fallback_updates;
      const TargetPoint old = out.values[v];
      TargetPoint next = local_minimizer(space, lp, old, options.frechet);
      if (omega != 1.0) {
        for (int c = 0; c < next.size; ++c) next.x[c] = old.x[c] + omega * (next.x[c] - old.x[c]);
      }
      next = constrain(space, next, ball);
      max_move = std::max(max_move, distance(space, old, next));
      out.values[v] = next;
    }
    const double next_energy = total_energy(model, space, out.values).total;
    if (next_energy > energy + 1e-12 * std::max(1.0, std::abs(energy))) rep.monotone = false;
    energy = next_energy;
    rep.sweeps = sweep;
    rep.max_move = max_move;
    const bool done = max_move < options.tol;
    if (done || sweep % std::max(1L, options.history_stride) == 0 || sweep == options.max_sweeps) {
      rep.history.push_back(energy);
    }
    if (done) {
      rep.converged = true;
      break;
    }
  }
  if (interior.empty()) rep.converged = true;
  rep.per_simplex = simplex_energies(model, space, out.values);
  rep.total = 0.0;
  for (double e : rep.per_simplex) rep.total += e;
  return out;
}

std::vector<TargetPoint> sample_map(const Mesh& mesh, const TargetSpace& space,
                                    const TraceFunction& trace, const BallConstraint& ball) {
  std::vector<TargetPoint> out;
  out.reserve(mesh.vertex_count());
  for (const MeshVertex& v : mesh.vertices()) {
    TargetPoint p = trace(v.p);
    space.validate(p);
    out.push_back(constrain(space, p, ball));
  }
  return out;
}

void write_checkpoint(const std::filesystem::path& path, const TargetSpace& space,
                      std::span<const TargetPoint> values, long sweeps) {
  std::ostringstream out;
  out << "polyharm-checkpoint 1\n";
  out << "space " << space.describe() << '\n';
  out << "coords " << space.coordinate_count() << '\n';
  out << "sweeps " << sweeps << '\n';
  out << "vertices " << values.size() << '\n';
  for (std::size_t v = 0; v < values.size(); ++v) {
    out << v << ' ' << values[v].edge;
    for (int c = 0; c < values[v].size; ++c) out << ' ' << fmt(values[v].x[c]);
    out << '\n';
  }
  write_text(path, out.str());
}

std::vector<TargetPoint> read_checkpoint(const std::filesystem::path& path,
                                         const TargetSpace& space, long* sweeps) {
  std::istringstream in(read_text(path));
  std::string tag, version;
  in >> tag >> version;
  if (tag != "polyharm-checkpoint" || version != "1") throw Error("not a checkpoint file");
  std::string word, desc;
  in >> word;
  std::getline(in, desc);
  if (word != "space" || desc.substr(desc.find_first_not_of(' ')) != space.describe()) {
    throw Error("checkpoint was written for a different target space");
  }
  int coords = 0;
  long sw = 0;
  std::size_t count = 0;
  in >> word >> coords;
  if (word != "coords" || coords != space.coordinate_count()) throw Error("checkpoint coordinate count mismatch");
  in >> word >> sw;
  if (word != "sweeps") throw Error("malformed checkpoint header");
  in >> word >> count;
  if (word != "vertices") throw Error("malformed checkpoint header");
  std::vector<TargetPoint> values(count);
  for (std::size_t v = 0; v < count; ++v) {
    std::size_t id = 0;
    int edge = -1;
    if (!(in >> id >> edge) || id != v) throw Error("malformed checkpoint line " + std::to_string(v));
    values[v].edge = edge;
    values[v].size = coords;
    for (int c = 0; c < coords; ++c) {
      std::string tok;
      in >> tok;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), values[v].x[c]);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw Error("bad number in checkpoint: " + tok);
      }
    }
    space.validate(values[v]);
  }
  if (sweeps) *sweeps = sw;
  return values;
}

}  // namespace polyharm
