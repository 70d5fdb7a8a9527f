#include "polyharm/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace polyharm {

namespace {

double sq(double v) { return v * v; }

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// LocalModel

LocalModel::LocalModel(Kind kind, double parameter, int n, int nu, std::vector<Wedge> wedges,
                       std::vector<Gluing> gluings)
    : kind_(kind), parameter_(parameter), n_(n), nu_(nu), wedges_(std::move(wedges)),
      gluings_(std::move(gluings)) {
  if (n_ != 2 && n_ != 3) throw Error("local models are built for n = 2 or n = 3 only");
  if (wedges_.empty()) throw Error("a local model needs at least one wedge");
  for (const Wedge& w : wedges_) {
    if (!(w.angle > 0.0) || w.angle > kPi + 1e-12) {
      throw Error("wedge angles must lie in (0, pi]");
    }
  }
  const int rays = 2 * wedge_count();
  std::vector<int> parent(rays);
  std::iota(parent.begin(), parent.end(), 0);
  for (const Gluing& g : gluings_) {
    if (g.wedge_a < 0 || g.wedge_a >= wedge_count() || g.wedge_b < 0 ||
        g.wedge_b >= wedge_count() || (g.side_a != 0 && g.side_a != 1) ||
        (g.side_b != 0 && g.side_b != 1)) {
      throw Error("gluing refers to a ray outside the model");
    }
    const int a = 2 * g.wedge_a + g.side_a, b = 2 * g.wedge_b + g.side_b;
    if (a == b) throw Error("a ray cannot be glued to itself");
    parent[find_root(parent, a)] = find_root(parent, b);
  }
  ray_class_.assign(rays, -1);
  std::map<int, int> ids;
  for (int i = 0; i < rays; ++i) {
    const int root = find_root(parent, i);
    auto [it, inserted] = ids.try_emplace(root, static_cast<int>(ids.size()));
    ray_class_[i] = it->second;
  }
  class_count_ = static_cast<int>(ids.size());
  class_size_.assign(class_count_, 0);
  for (int c : ray_class_) ++class_size_[c];

  // Link graph: ray classes joined by wedge arcs.
  const double inf = std::numeric_limits<double>::infinity();
  const int m = class_count_;
  class_dist_.assign(m * m, inf);
  for (int c = 0; c < m; ++c) class_dist_[c * m + c] = 0.0;
  for (int w = 0; w < wedge_count(); ++w) {
    const int a = ray_class(w, 0), b = ray_class(w, 1);
    class_dist_[a * m + b] = std::min(class_dist_[a * m + b], wedges_[w].angle);
    class_dist_[b * m + a] = class_dist_[a * m + b];
  }
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        class_dist_[i * m + j] =
            std::min(class_dist_[i * m + j], class_dist_[i * m + k] + class_dist_[k * m + j]);
      }
    }
  }
  admissible_ = std::all_of(class_dist_.begin(), class_dist_.end(),
                            [](double d) { return d < std::numeric_limits<double>::infinity(); });
}

LocalModel LocalModel::book(int pages, int n) {
  if (pages < 1) throw Error("a book needs at least one page");
  std::vector<Wedge> wedges(pages, Wedge{kPi, 0.0});
  std::vector<Gluing> gluings;
  for (int i = 1; i < pages; ++i) {
    gluings.push_back({0, 0, i, 0});
    gluings.push_back({0, 1, i, 1});
  }
  return LocalModel(Kind::book, pages, n, 1, std::move(wedges), std::move(gluings));
}

LocalModel LocalModel::cone(double total_angle, int n) {
  if (!(total_angle > 0.0)) throw Error("cone angle must be positive");
  const int m = std::max(1, static_cast<int>(std::ceil(total_angle / (kPi / 2.0) - 1e-12)));
  const double a = total_angle / m;
  std::vector<Wedge> wedges;
  std::vector<Gluing> gluings;
  for (int i = 0; i < m; ++i) {
    wedges.push_back({a, i * a});
    gluings.push_back({i, 1, (i + 1) % m, 0});
  }
  return LocalModel(Kind::cone, total_angle, n, 2, std::move(wedges), std::move(gluings));
}

LocalModel LocalModel::sector(double angle, int n) {
  return LocalModel(Kind::sector, angle, n, 1, {Wedge{angle, 0.0}}, {});
}

std::string LocalModel::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::book: out << "book(" << parameter_ << ")"; break;
    case Kind::cone: out << "cone(" << parameter_ << ")"; break;
    case Kind::sector: out << "sector(" << parameter_ << ")"; break;
  }
  if (n_ == 3) out << "xR";
  return out.str();
}

double LocalModel::total_angle() const {
  double s = 0.0;
  for (const Wedge& w : wedges_) s += w.angle;
  return s;
}

void LocalModel::check_point(const ModelPoint& p) const {
  if (p.wedge < 0 || p.wedge >= wedge_count()) throw Error("model point in unknown wedge");
  if (!(p.rho >= 0.0)) throw Error("model point with negative radius");
  if (p.phi < -1e-12 || p.phi > wedges_[p.wedge].angle + 1e-12) {
    throw Error("model point angle outside its wedge");
  }
  if (n_ == 2 && p.z != 0.0) throw Error("planar model point with nonzero z");
}

double LocalModel::link_distance(const ModelPoint& a, const ModelPoint& b) const {
  const int m = class_count_;
  double best = std::numeric_limits<double>::infinity();
  if (a.wedge == b.wedge) best = std::abs(a.phi - b.phi);
  const double da[2] = {a.phi, wedges_[a.wedge].angle - a.phi};
  const double db[2] = {b.phi, wedges_[b.wedge].angle - b.phi};
  for (int sa = 0; sa < 2; ++sa) {
    for (int sb = 0; sb < 2; ++sb) {
      const double via = class_dist_[ray_class(a.wedge, sa) * m + ray_class(b.wedge, sb)];
      best = std::min(best, da[sa] + via + db[sb]);
    }
  }
  return best;
}

double LocalModel::distance(const ModelPoint& a, const ModelPoint& b) const {
  double planar;
  if (a.rho == 0.0 || b.rho == 0.0) {
    planar = sq(a.rho + b.rho);
  } else {
    const double theta = std::min(link_distance(a, b), kPi);
    planar = sq(a.rho - b.rho) + 4.0 * a.rho * b.rho * sq(std::sin(0.5 * theta));
  }
  return std::sqrt(planar + sq(a.z - b.z));
}

Point3 LocalModel::cartesian(const ModelPoint& p) const {
  return {p.rho * std::cos(p.phi), p.rho * std::sin(p.phi), p.z};
}

// ---------------------------------------------------------------------------
// Metric fields

MetricField MetricField::euclidean(int n) {
  MetricField f;
  f.kind_ = Kind::euclidean;
  f.n_ = n;
  f.matrix_ = Mat::Identity(n, n);
  return f;
}

MetricField MetricField::conformal(int n, double a, double ellipticity) {
  if (!(ellipticity > 0.0 && ellipticity <= 1.0)) throw Error("ellipticity must lie in (0, 1]");
  MetricField f = euclidean(n);
  f.kind_ = Kind::conformal;
  f.a_ = a;
  f.lambda_ = ellipticity;
  return f;
}

MetricField MetricField::anisotropic(const Mat& a) {
  if (a.rows() != a.cols() || (a.rows() != 2 && a.rows() != 3)) {
    throw Error("anisotropic metric must be a 2x2 or 3x3 matrix");
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-14) throw Error("metric must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw Error("metric must be positive definite");
  MetricField f;
  f.kind_ = Kind::anisotropic;
  f.n_ = static_cast<int>(a.rows());
  f.matrix_ = a;
  f.lambda_ = std::min(lo, 1.0 / hi);
  return f;
}

std::string MetricField::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::euclidean: out << "euclidean"; break;
    case Kind::conformal: out << "conformal(a=" << a_ << ")"; break;
    case Kind::anisotropic: out << "anisotropic"; break;
  }
  return out.str();
}

Mat MetricField::at(const LocalModel& model, int wedge, const Point3& x) const {
  switch (kind_) {
    case Kind::euclidean: return Mat::Identity(n_, n_);
    case Kind::conformal: {
      double r2 = 0.0;
      for (int i = 0; i < n_; ++i) r2 += x[i] * x[i];
      return (1.0 + a_ * std::sqrt(r2)) * Mat::Identity(n_, n_);
    }
    case Kind::anisotropic: {
      const double t = model.wedges()[wedge].offset;
      Mat rot = Mat::Identity(n_, n_);
      rot(0, 0) = std::cos(t);
      rot(0, 1) = -std::sin(t);
      rot(1, 0) = std::sin(t);
      rot(1, 1) = std::cos(t);
      return rot.transpose() * matrix_ * rot;
    }
  }
  return Mat::Identity(n_, n_);
}

MetricSample metric_eval(const MetricField& field, const LocalModel& model, int wedge,
                         const Point3& x) {
  if (field.dimension() != model.dimension()) throw Error("metric and model dimensions differ");
  if (wedge < 0 || wedge >= model.wedge_count()) throw Error("metric evaluated in unknown wedge");
  MetricSample out;
  out.g = field.at(model, wedge, x);
  if ((out.g - out.g.transpose()).cwiseAbs().maxCoeff() > 1e-14) {
    throw Error("metric is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(out.g);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  const double lambda = field.ellipticity();
  if (lo < lambda * (1.0 - 1e-12) || hi > (1.0 + 1e-12) / lambda) {
    std::ostringstream msg;
    msg << "ellipticity violated: eigenvalues in [" << lo << ", " << hi << "], lambda = " << lambda;
    throw Error(msg.str());
  }
  out.volume_density = std::sqrt(out.g.determinant());
  return out;
}

double induced_density(const Mat& g, const Mat& tangents) {
  const Mat gram = tangents.transpose() * g * tangents;
  return std::sqrt(std::max(gram.determinant(), 0.0));
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(LocalModel model, double r, double h, double grading, std::vector<double> radii,
           std::vector<MeshVertex> vertices, std::vector<Simplex> simplices)
    : model_(std::move(model)), r_(r), h_(h), grading_(grading), radii_(std::move(radii)),
      vertices_(std::move(vertices)), simplices_(std::move(simplices)) {
  const int k = simplex_size();
  stars_.assign(vertices_.size(), {});
  std::vector<std::array<int, 2>> edges;
  for (int s = 0; s < simplex_count(); ++s) {
    const Simplex& sx = simplices_[s];
    for (int i = 0; i < k; ++i) {
      if (sx.v[i] < 0 || sx.v[i] >= vertex_count()) throw Error("simplex refers to unknown vertex");
      stars_[sx.v[i]].push_back(s);
      for (int j = i + 1; j < k; ++j) {
        edges.push_back({std::min(sx.v[i], sx.v[j]), std::max(sx.v[i], sx.v[j])});
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
}

ModelPoint Mesh::local_point(int s, int k) const {
  const Simplex& sx = simplices_[s];
  const MeshVertex& v = vertices_[sx.v[k]];
  ModelPoint p = v.p;
  p.wedge = sx.wedge;
  if (v.ray_class == -2) {
    p.phi = 0.0;
  } else if (sx.side[k] >= 0) {
    p.phi = sx.side[k] == 0 ? 0.0 : model_.wedges()[sx.wedge].angle;
  }
  return p;
}

Point3 Mesh::local_coords(int s, int k) const { return model_.cartesian(local_point(s, k)); }

double Mesh::simplex_volume(int s) const {
  const Point3 a = local_coords(s, 0), b = local_coords(s, 1), c = local_coords(s, 2);
  if (dimension() == 2) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
  }
  const Point3 d = local_coords(s, 3);
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) {
    m(i, 0) = b[i] - a[i];
    m(i, 1) = c[i] - a[i];
    m(i, 2) = d[i] - a[i];
  }
  return m.determinant() / 6.0;
}

double Mesh::local_size(double radius) const {
  auto it = std::lower_bound(radii_.begin() + 1, radii_.end(), radius);
  if (it == radii_.end()) --it;
  const auto j = it - radii_.begin();
  return radii_[j] - radii_[j - 1];
}

namespace {

struct Corner {
  int v;
  signed char side;
};

struct Tri {
  std::array<Corner, 3> c;
};

double orient(const Point3& a, const Point3& b, const Point3& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

// Positive when d lies inside the circumcircle of the counterclockwise a, b, c.
double incircle(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  const double adx = a[0] - d[0], ady = a[1] - d[1];
  const double bdx = b[0] - d[0], bdy = b[1] - d[1];
  const double cdx = c[0] - d[0], cdy = c[1] - d[1];
  const double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

struct PlanarBuild {
  std::vector<double> radii;
  std::vector<MeshVertex> vertices;
  std::vector<Simplex> triangles;
  std::vector<int> ring_of;  // per vertex
};

PlanarBuild build_planar(const LocalModel& model, double r, double h, double grading) {
  PlanarBuild out;
  const int m = std::max(4, static_cast<int>(std::ceil(grading * r / h - 1e-9)));
  out.radii.resize(m + 1);
  for (int j = 0; j <= m; ++j) out.radii[j] = r * std::pow(static_cast<double>(j) / m, grading);
  out.radii[m] = r;

  const int wedges = model.wedge_count();
  const int classes = model.ray_class_count();
  std::vector<std::vector<int>> counts(wedges, std::vector<int>(m + 1, 0));
  for (int w = 0; w < wedges; ++w) {
    const double a = model.wedges()[w].angle;
    for (int j = 1; j <= m; ++j) {
      const double dr = out.radii[j] - out.radii[j - 1];
      counts[w][j] = std::max(2, static_cast<int>(std::ceil(a * out.radii[j] / dr - 1e-9)));
    }
  }

  // Class representatives.
  std::vector<std::pair<int, int>> rep(classes, {-1, -1});
  for (int w = 0; w < wedges; ++w) {
    for (int s = 0; s < 2; ++s) {
      const int c = model.ray_class(w, s);
      if (rep[c].first < 0) rep[c] = {w, s};
    }
  }

  MeshVertex origin;
  origin.ray_class = -2;
  out.vertices.push_back(origin);
  std::vector<std::vector<int>> class_vertex(classes, std::vector<int>(m + 1, 0));
  std::vector<std::vector<std::vector<int>>> interior(wedges,
                                                       std::vector<std::vector<int>>(m + 1));
  for (int j = 1; j <= m; ++j) {
    for (int c = 0; c < classes; ++c) {
      MeshVertex v;
      const auto [w, s] = rep[c];
      v.p = ModelPoint{w, out.radii[j], s == 0 ? 0.0 : model.wedges()[w].angle, 0.0};
      v.ray_class = c;
      v.level = j;
      v.boundary = j == m;
      class_vertex[c][j] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(v);
    }
    for (int w = 0; w < wedges; ++w) {
      const double a = model.wedges()[w].angle;
      const int n = counts[w][j];
      interior[w][j].assign(n + 1, -1);
      for (int i = 1; i < n; ++i) {
        MeshVertex v;
        v.p = ModelPoint{w, out.radii[j], a * i / n, 0.0};
        v.level = j;
        v.boundary = j == m;
        interior[w][j][i] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(v);
      }
    }
  }

  auto corner = [&](int w, int j, int i) -> Corner {
    if (j == 0) return {0, -1};
    const int n = counts[w][j];
    if (i == 0) return {class_vertex[model.ray_class(w, 0)][j], 0};
    if (i == n) return {class_vertex[model.ray_class(w, 1)][j], 1};
    return {interior[w][j][i], -1};
  };
  auto coords = [&](int w, const Corner& c) -> Point3 {
    const MeshVertex& v = out.vertices[c.v];
    double phi = v.p.phi;
    if (v.ray_class == -2) phi = 0.0;
    else if (c.side >= 0) phi = c.side == 0 ? 0.0 : model.wedges()[w].angle;
    return model.cartesian(ModelPoint{w, v.p.rho, phi, 0.0});
  };

  for (int w = 0; w < wedges; ++w) {
    std::vector<Tri> tris;
    for (int i = 0; i < counts[w][1]; ++i) {
      tris.push_back({{corner(w, 0, 0), corner(w, 1, i), corner(w, 1, i + 1)}});
    }
    for (int j = 2; j <= m; ++j) {
      const int nl = counts[w][j - 1], nu = counts[w][j];
      int i = 0, k = 0;
      while (i < nl || k < nu) {
        const bool advance_upper =
            i == nl || (k < nu && static_cast<double>(k + 1) / nu <= static_cast<double>(i + 1) / nl);
        if (advance_upper) {
          tris.push_back({{corner(w, j - 1, i), corner(w, j, k), corner(w, j, k + 1)}});
          ++k;
        } else {
          tris.push_back({{corner(w, j - 1, i), corner(w, j, k), corner(w, j - 1, i + 1)}});
          ++i;
        }
      }
    }
    for (Tri& t : tris) {
      if (orient(coords(w, t.c[0]), coords(w, t.c[1]), coords(w, t.c[2])) < 0.0) {
        std::swap(t.c[1], t.c[2]);
      }
    }

    // Lawson flips inside the wedge. Edges are keyed by (vertex, side) so the
    // two rays of a self-glued wedge stay distinct.
    auto key_of = [](const Corner& x, const Corner& y) {
      auto kx = std::make_pair(x.v, static_cast<int>(x.side));
      auto ky = std::make_pair(y.v, static_cast<int>(y.side));
      return kx < ky ? std::make_pair(kx, ky) : std::make_pair(ky, kx);
    };
    for (int pass = 0; pass < 200; ++pass) {
      std::map<std::pair<std::pair<int, int>, std::pair<int, int>>, std::vector<std::pair<int, int>>>
          edge_map;
      for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        for (int e = 0; e < 3; ++e) {
          edge_map[key_of(tris[t].c[e], tris[t].c[(e + 1) % 3])].push_back({t, e});
        }
      }
      std::vector<char> touched(tris.size(), 0);
      bool flipped = false;
      for (const auto& [key, uses] : edge_map) {
        if (uses.size() != 2) continue;
        const auto [t1, e1] = uses[0];
        const auto [t2, e2] = uses[1];
        if (touched[t1] || touched[t2]) continue;
        const Corner ca = tris[t1].c[e1], cb = tris[t1].c[(e1 + 1) % 3],
                     cc = tris[t1].c[(e1 + 2) % 3];
        const Corner cd = tris[t2].c[(e2 + 2) % 3];
        const Point3 pa = coords(w, ca), pb = coords(w, cb), pc = coords(w, cc),
                     pd = coords(w, cd);
        const double local = std::max({std::abs(pa[0] - pb[0]), std::abs(pa[1] - pb[1]),
                                       std::abs(pc[0] - pd[0]), std::abs(pc[1] - pd[1])});
        if (incircle(pa, pb, pc, pd) <= 1e-9 * sq(sq(local))) continue;
        if (orient(pa, pd, pc) <= 0.0 || orient(pd, pb, pc) <= 0.0) continue;
        tris[t1] = {{ca, cd, cc}};
        tris[t2] = {{cd, cb, cc}};
        touched[t1] = touched[t2] = 1;
        flipped = true;
      }
      if (!flipped) break;
    }
    for (const Tri& t : tris) {
      Simplex s;
      s.wedge = w;
      for (int k = 0; k < 3; ++k) {
        s.v[k] = t.c[k].v;
        s.side[k] = t.c[k].side;
      }
      out.triangles.push_back(s);
    }
  }
  return out;
}

}  // namespace

Mesh triangulate(const LocalModel& model, double r, double h, double grading) {
  if (!(r > 0.0)) throw Error("mesh radius must be positive");
  if (!(h > 0.0) || !(h < r / 4.0)) throw Error("mesh size h must satisfy 0 < h < r/4");
  if (!(grading >= 1.0) || grading > 4.0) throw Error("grading exponent must lie in [1, 4]");
  PlanarBuild planar = build_planar(model, r, h, grading);
  if (model.dimension() == 2) {
    return Mesh(model, r, h, grading, std::move(planar.radii), std::move(planar.vertices),
                std::move(planar.triangles));
  }

  // n = 3: extrude over graded z-layers, split prisms, map the cylinder onto the ball.
  const int m = static_cast<int>(planar.radii.size()) - 1;
  const int layers = 2 * m + 1;
  std::vector<double> zs(layers);
  for (int l = 0; l < layers; ++l) {
    const int q = l - m;
    zs[l] = (q < 0 ? -1.0 : 1.0) * planar.radii[std::abs(q)];
  }
  const int nv2 = static_cast<int>(planar.vertices.size());
  std::vector<MeshVertex> vertices;
  vertices.reserve(static_cast<std::size_t>(nv2) * layers);
  for (int l = 0; l < layers; ++l) {
    for (int v = 0; v < nv2; ++v) {
      MeshVertex mv = planar.vertices[v];
      const double rho = mv.p.rho, z = zs[l];
      const double len = std::hypot(rho, z);
      const double s = len > 0.0 ? std::max(rho, std::abs(z)) / len : 1.0;
      mv.p.rho = rho * s;
      mv.p.z = z * s;
      mv.level = std::max(mv.level, std::abs(l - m));
      mv.boundary = mv.level == m;
      vertices.push_back(mv);
    }
  }
  std::vector<Simplex> tets;
  for (const Simplex& tri : planar.triangles) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int x, int y) { return tri.v[x] < tri.v[y]; });
    for (int l = 0; l + 1 < layers; ++l) {
      auto id = [&](int k, int layer) { return layer * nv2 + tri.v[order[k]]; };
      auto side = [&](int k) { return tri.side[order[k]]; };
      const std::array<std::array<std::pair<int, int>, 4>, 3> pattern = {{
          {{{0, l}, {1, l}, {2, l}, {0, l + 1}}},
          {{{1, l}, {2, l}, {0, l + 1}, {1, l + 1}}},
          {{{2, l}, {0, l + 1}, {1, l + 1}, {2, l + 1}}},
      }};
      for (const auto& tet : pattern) {
        Simplex s;
        s.wedge = tri.wedge;
        for (int k = 0; k < 4; ++k) {
          s.v[k] = id(tet[k].first, tet[k].second);
          s.side[k] = side(tet[k].first);
        }
        tets.push_back(s);
      }
    }
  }
  Mesh mesh(model, r, h, grading, planar.radii, vertices, tets);
  // Fix orientation.
  std::vector<Simplex> oriented = mesh.simplices();
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    if (mesh.simplex_volume(s) < 0.0) {
      std::swap(oriented[s].v[2], oriented[s].v[3]);
      std::swap(oriented[s].side[2], oriented[s].side[3]);
    }
  }
  return Mesh(model, r, h, grading, planar.radii, std::move(vertices), std::move(oriented));
}

MeshAudit audit_mesh(const Mesh& mesh) {
  MeshAudit a;
  a.min_volume = std::numeric_limits<double>::infinity();
  a.min_edge_ratio = std::numeric_limits<double>::infinity();
  for (const auto& star : mesh.stars()) {
    if (star.empty()) ++a.orphan_vertices;
  }
  const int k = mesh.simplex_size();
  const auto& radii = mesh.radii();
  std::map<std::vector<int>, int> faces;
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    const double vol = mesh.simplex_volume(s);
    a.min_volume = std::min(a.min_volume, vol);
    if (!(vol > 1e-14)) ++a.degenerate_simplices;
    const Simplex& sx = mesh.simplices()[s];
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        const Point3 p = mesh.local_coords(s, i), q = mesh.local_coords(s, j);
        const double len = std::sqrt(sq(p[0] - q[0]) + sq(p[1] - q[1]) + sq(p[2] - q[2]));
        const int level = std::max({1, mesh.vertices()[sx.v[i]].level,
                                    mesh.vertices()[sx.v[j]].level});
        const double ratio = len / (radii[level] - radii[level - 1]);
        a.min_edge_ratio = std::min(a.min_edge_ratio, ratio);
        a.max_edge_ratio = std::max(a.max_edge_ratio, ratio);
      }
    }
    for (int skip = 0; skip < k; ++skip) {
      std::vector<int> face;
      for (int i = 0; i < k; ++i) {
        if (i != skip) face.push_back(sx.v[i]);
      }
      std::sort(face.begin(), face.end());
      ++faces[face];
    }
  }
  const LocalModel& model = mesh.model();
  for (const auto& [face, count] : faces) {
    if (count != 1) continue;
    bool outer = true, free_ray = true;
    for (int v : face) {
      const MeshVertex& mv = mesh.vertices()[v];
      outer = outer && mv.boundary;
      const bool on_free = mv.ray_class == -2 ||
                           (mv.ray_class >= 0 && model.ray_class_size(mv.ray_class) == 1);
      free_ray = free_ray && on_free;
    }
    if (!outer && !free_ray) ++a.open_boundary_edges;
  }
  return a;
}

double origin_angle(const Mesh& mesh) {
  if (mesh.dimension() != 2) throw Error("origin angle is defined for planar meshes");
  double total = 0.0;
  for (int s : mesh.stars()[0]) {
    int k0 = 0;
    while (mesh.simplices()[s].v[k0] != 0) ++k0;
    const Point3 o = mesh.local_coords(s, k0);
    const Point3 p = mesh.local_coords(s, (k0 + 1) % 3), q = mesh.local_coords(s, (k0 + 2) % 3);
    const double ux = p[0] - o[0], uy = p[1] - o[1], vx = q[0] - o[0], vy = q[1] - o[1];
    total += std::abs(std::atan2(ux * vy - uy * vx, ux * vx + uy * vy));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Point location and PL evaluation

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  const int n = mesh.dimension();
  const int wedges = mesh.model().wedge_count();
  grids_.resize(wedges);
  std::vector<int> per_wedge(wedges, 0);
  const double inf = std::numeric_limits<double>::infinity();
  for (auto& g : grids_) {
    g.lo = {inf, inf, inf};
    g.hi = {-inf, -inf, -inf};
  }
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    WedgeGrid& g = grids_[mesh.simplices()[s].wedge];
    ++per_wedge[mesh.simplices()[s].wedge];
    for (int k = 0; k < n + 1; ++k) {
      const Point3 x = mesh.local_coords(s, k);
      for (int i = 0; i < n; ++i) {
        g.lo[i] = std::min(g.lo[i], x[i]);
        g.hi[i] = std::max(g.hi[i], x[i]);
      }
    }
  }
  for (int w = 0; w < wedges; ++w) {
    WedgeGrid& g = grids_[w];
    if (per_wedge[w] == 0) continue;
    double volume = 1.0;
    for (int i = 0; i < n; ++i) {
      g.hi[i] += 1e-9;
      g.lo[i] -= 1e-9;
      volume *= g.hi[i] - g.lo[i];
    }
    const double cell = std::pow(volume * 4.0 / per_wedge[w], 1.0 / n);
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) {
      g.dims[i] = std::max(1, static_cast<int>(std::ceil((g.hi[i] - g.lo[i]) / cell)));
      total *= g.dims[i];
    }
    g.cells.assign(total, {});
  }
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    WedgeGrid& g = grids_[mesh.simplices()[s].wedge];
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int i = 0; i < n; ++i) {
      double mn = inf, mx = -inf;
      for (int k = 0; k < n + 1; ++k) {
        const double c = mesh.local_coords(s, k)[i];
        mn = std::min(mn, c);
        mx = std::max(mx, c);
      }
      const double width = (g.hi[i] - g.lo[i]) / g.dims[i];
      lo[i] = std::clamp(static_cast<int>((mn - g.lo[i]) / width), 0, g.dims[i] - 1);
      hi[i] = std::clamp(static_cast<int>((mx - g.lo[i]) / width), 0, g.dims[i] - 1);
    }
    for (int a = lo[0]; a <= hi[0]; ++a) {
      for (int b = lo[1]; b <= hi[1]; ++b) {
        for (int c = lo[2]; c <= hi[2]; ++c) {
          g.cells[(static_cast<std::size_t>(c) * g.dims[1] + b) * g.dims[0] + a].push_back(s);
        }
      }
    }
  }
}

std::array<double, 4> PointLocator::barycentric(int s, const Point3& x) const {
  const int n = mesh_->dimension();
  std::array<double, 4> out{};
  const Point3 a = mesh_->local_coords(s, 0);
  if (n == 2) {
    const Point3 b = mesh_->local_coords(s, 1), c = mesh_->local_coords(s, 2);
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    const double l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (x[1] - a[1]) * (c[0] - a[0])) / det;
    const double l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0])) / det;
    out = {1.0 - l1 - l2, l1, l2, 0.0};
    return out;
  }
  Eigen::Matrix3d m;
  Eigen::Vector3d rhs;
  for (int k = 1; k < 4; ++k) {
    const Point3 p = mesh_->local_coords(s, k);
    for (int i = 0; i < 3; ++i) m(i, k - 1) = p[i] - a[i];
  }
  for (int i = 0; i < 3; ++i) rhs[i] = x[i] - a[i];
  const Eigen::Vector3d l = m.partialPivLu().solve(rhs);
  out = {1.0 - l.sum(), l[0], l[1], l[2]};
  return out;
}

Location PointLocator::locate(const ModelPoint& p) const {
  const int n = mesh_->dimension();
  const LocalModel& model = mesh_->model();
  model.check_point(p);
  const WedgeGrid& g = grids_[p.wedge];
  if (g.cells.empty()) throw Error("point location in an empty wedge");
  const Point3 x = model.cartesian(p);
  std::array<int, 3> cell{0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const double width = (g.hi[i] - g.lo[i]) / g.dims[i];
    cell[i] = std::clamp(static_cast<int>((x[i] - g.lo[i]) / width), 0, g.dims[i] - 1);
  }
  Location best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int ring = 0; ring <= 1; ++ring) {
    std::array<int, 3> lo = cell, hi = cell;
    for (int i = 0; i < n; ++i) {
      lo[i] = std::max(0, cell[i] - ring);
      hi[i] = std::min(g.dims[i] - 1, cell[i] + ring);
    }
    for (int a = lo[0]; a <= hi[0]; ++a) {
      for (int b = lo[1]; b <= hi[1]; ++b) {
        for (int c = lo[2]; c <= hi[2]; ++c) {
          for (int s : g.cells[(static_cast<std::size_t>(c) * g.dims[1] + b) * g.dims[0] + a]) {
            const auto bary = barycentric(s, x);
            double mn = bary[0];
            for (int k = 1; k <= n; ++k) mn = std::min(mn, bary[k]);
            if (mn > best_min) {
              best_min = mn;
              best.simplex = s;
              best.bary = bary;
            }
          }
        }
      }
    }
    if (best_min >= -1e-12) break;
  }
  if (best.simplex < 0) throw Error("point outside the mesh");
  // Snap: clip small negative coordinates and renormalize.
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    best.bary[k] = std::max(0.0, best.bary[k]);
    sum += best.bary[k];
  }
  for (int k = 0; k <= n; ++k) best.bary[k] /= sum;
  return best;
}

TargetPoint evaluate_pl(const TargetSpace& space, const Mesh& mesh,
                        std::span<const TargetPoint> values, const Location& loc) {
  if (loc.simplex < 0) throw Error("evaluation at an unlocated point");
  const int k = mesh.simplex_size();
  const Simplex& s = mesh.simplices()[loc.simplex];
  std::array<TargetPoint, 4> pts;
  std::array<double, 4> w{};
  int arg = 0;
  for (int i = 0; i < k; ++i) {
    pts[i] = values[s.v[i]];
    w[i] = std::max(0.0, loc.bary[i]);
    if (w[i] > w[arg]) arg = i;
  }
  if (w[arg] >= 1.0 - 1e-15) return pts[arg];
  const std::span<const TargetPoint> ps(pts.data(), k);
  const std::span<const double> ws(w.data(), k);
  switch (space.kind()) {
    case TargetSpace::Kind::euclidean:
    case TargetSpace::Kind::arc: {
      TargetPoint out = pts[0];
      const double total = std::accumulate(w.begin(), w.begin() + k, 0.0);
      for (int c = 0; c < out.size; ++c) {
        double v = 0.0;
        for (int i = 0; i < k; ++i) v += w[i] * pts[i].x[c];
        out.x[c] = v / total;
      }
      return out;
    }
    case TargetSpace::Kind::sphere:
      return frechet_mean_from(space, ps, ws, pts[arg], FrechetOptions{1e-13, 200});
    case TargetSpace::Kind::tree: return tree_weighted_minimizer(space, ps, ws);
  }
  return pts[arg];
}

// ---------------------------------------------------------------------------
// Balls and spheres

namespace {

double segment_disk_signed(Point3 p, Point3 q, double rr) {
  const double dx = q[0] - p[0], dy = q[1] - p[1];
  const double a = dx * dx + dy * dy;
  const double b = 2.0 * (p[0] * dx + p[1] * dy);
  const double c = p[0] * p[0] + p[1] * p[1] - rr * rr;
  double ts[4] = {0.0, 0.0, 0.0, 1.0};
  int count = 1;
  const double disc = b * b - 4.0 * a * c;
  if (a > 0.0 && disc > 0.0) {
    const double sd = std::sqrt(disc);
    const double t1 = (-b - sd) / (2.0 * a), t2 = (-b + sd) / (2.0 * a);
    if (t1 > 0.0 && t1 < 1.0) ts[count++] = t1;
    if (t2 > 0.0 && t2 < 1.0) ts[count++] = t2;
  }
  ts[count++] = 1.0;
  double area = 0.0;
  for (int i = 0; i + 1 < count; ++i) {
    const double ta = ts[i], tb = ts[i + 1];
    const double x1 = p[0] + ta * dx, y1 = p[1] + ta * dy;
    const double x2 = p[0] + tb * dx, y2 = p[1] + tb * dy;
    const double tm = 0.5 * (ta + tb);
    const double xm = p[0] + tm * dx, ym = p[1] + tm * dy;
    const double cross = x1 * y2 - y1 * x2;
    if (xm * xm + ym * ym <= rr * rr) {
      area += 0.5 * cross;
    } else {
      area += 0.5 * rr * rr * std::atan2(cross, x1 * x2 + y1 * y2);
    }
  }
  return area;
}

double tet_ball_fraction(const std::array<Point3, 4>& v, double sigma, int depth) {
  int inside = 0;
  Point3 c{0, 0, 0};
  for (const Point3& p : v) {
    if (sq(p[0]) + sq(p[1]) + sq(p[2]) <= sq(sigma)) ++inside;
    for (int i = 0; i < 3; ++i) c[i] += 0.25 * p[i];
  }
  if (inside == 4) return 1.0;
  double rad = 0.0;
  for (const Point3& p : v) rad = std::max(rad, std::sqrt(sq(p[0] - c[0]) + sq(p[1] - c[1]) + sq(p[2] - c[2])));
  const double dc = std::sqrt(sq(c[0]) + sq(c[1]) + sq(c[2]));
  if (dc - rad >= sigma) return 0.0;
  if (depth == 0) return dc <= sigma ? 1.0 : 0.0;
  auto mid = [&](int a, int b) {
    return Point3{0.5 * (v[a][0] + v[b][0]), 0.5 * (v[a][1] + v[b][1]), 0.5 * (v[a][2] + v[b][2])};
  };
  const Point3 m01 = mid(0, 1), m02 = mid(0, 2), m03 = mid(0, 3), m12 = mid(1, 2),
               m13 = mid(1, 3), m23 = mid(2, 3);
  // Midpoint refinement into eight tetrahedra of equal volume.
  const std::array<std::array<Point3, 4>, 8> kids = {{
      {{v[0], m01, m02, m03}},
      {{m01, v[1], m12, m13}},
      {{m02, m12, v[2], m23}},
      {{m03, m13, m23, v[3]}},
      {{m01, m02, m03, m13}},
      {{m01, m02, m12, m13}},
      {{m02, m03, m13, m23}},
      {{m02, m12, m13, m23}},
  }};
  double f = 0.0;
  for (const auto& k : kids) f += tet_ball_fraction(k, sigma, depth - 1);
  return f / 8.0;
}

}  // namespace

double triangle_disk_area(const Point3& a, const Point3& b, const Point3& c, const Point3& center,
                          double rho) {
  const Point3 pa{a[0] - center[0], a[1] - center[1], 0.0};
  const Point3 pb{b[0] - center[0], b[1] - center[1], 0.0};
  const Point3 pc{c[0] - center[0], c[1] - center[1], 0.0};
  return std::abs(segment_disk_signed(pa, pb, rho) + segment_disk_signed(pb, pc, rho) +
                  segment_disk_signed(pc, pa, rho));
}

BallSphere ball_and_sphere(const Mesh& mesh, const MetricField& field,
                           const PointLocator& locator, const ModelPoint& center, double sigma,
                           SphereOptions options) {
  const LocalModel& model = mesh.model();
  const int n = mesh.dimension();
  if (!(sigma > 0.0) || !(sigma < mesh.radius())) throw Error("ball radius must lie in (0, r)");
  model.check_point(center);
  const bool at_origin = center.rho == 0.0 && center.z == 0.0;
  if (!at_origin) {
    if (n != 2) throw Error("off-origin balls are supported for n = 2 only");
    const double a = model.wedges()[center.wedge].angle;
    auto ray_gap = [&](double angle) { return angle <= kPi / 2 ? center.rho * std::sin(angle) : center.rho; };
    if (center.rho + sigma >= mesh.radius() || ray_gap(center.phi) < sigma ||
        ray_gap(a - center.phi) < sigma) {
      throw Error("off-origin balls must stay inside one wedge and inside B(r)");
    }
  }
  const double reach = at_origin ? sigma : center.rho + sigma;
  const double spacing = mesh.local_size(reach);
  if (sigma < options.min_resolution * spacing) {
    std::ostringstream msg;
    msg << "sigma = " << sigma << " is below mesh resolution (local spacing " << spacing << ")";
    throw Error(msg.str());
  }

  BallSphere out;
  out.sigma = sigma;
  out.center = center;
  out.fraction.assign(mesh.simplex_count(), 0.0);
  const Point3 cc = model.cartesian(center);
  for (int s = 0; s < mesh.simplex_count(); ++s) {
    if (!at_origin && mesh.simplices()[s].wedge != center.wedge) continue;
    if (n == 2) {
      const Point3 a = mesh.local_coords(s, 0), b = mesh.local_coords(s, 1),
                   c = mesh.local_coords(s, 2);
      const double area = mesh.simplex_volume(s);
      out.fraction[s] = std::min(1.0, triangle_disk_area(a, b, c, cc, sigma) / area);
    } else {
      std::array<Point3, 4> v;
      for (int k = 0; k < 4; ++k) v[k] = mesh.local_coords(s, k);
      out.fraction[s] = tet_ball_fraction(v, sigma, 3);
    }
  }

  auto add_sample = [&](const ModelPoint& p, double weight) {
    SphereSample smp;
    smp.p = p;
    smp.loc = locator.locate(p);
    smp.weight = weight;
    out.sphere_measure += weight;
    out.sphere.push_back(smp);
  };
  if (n == 2 && at_origin) {
    for (int w = 0; w < model.wedge_count(); ++w) {
      const double a = model.wedges()[w].angle;
      const int k = std::max(8, static_cast<int>(std::ceil(options.angular_samples * a / (2 * kPi))));
      const double dphi = a / k;
      for (int i = 0; i < k; ++i) {
        const double phi = (i + 0.5) * dphi;
        const ModelPoint p{w, sigma, phi, 0.0};
        const Mat g = metric_eval(field, model, w, model.cartesian(p)).g;
        Mat t(2, 1);
        t << -sigma * std::sin(phi), sigma * std::cos(phi);
        add_sample(p, induced_density(g, t) * dphi);
      }
    }
  } else if (n == 2) {
    const int k = std::max(8, options.angular_samples);
    const double dt = 2 * kPi / k;
    for (int i = 0; i < k; ++i) {
      const double t = (i + 0.5) * dt;
      const double x = cc[0] + sigma * std::cos(t), y = cc[1] + sigma * std::sin(t);
      const ModelPoint p{center.wedge, std::hypot(x, y), std::atan2(y, x), 0.0};
      const Mat g = metric_eval(field, model, center.wedge, {x, y, 0.0}).g;
      Mat tan(2, 1);
      tan << -sigma * std::sin(t), sigma * std::cos(t);
      add_sample(p, induced_density(g, tan) * dt);
    }
  } else {
    const int kpsi = std::max(8, options.angular_samples / 16);
    const double dpsi = kPi / kpsi;
    for (int w = 0; w < model.wedge_count(); ++w) {
      const double a = model.wedges()[w].angle;
      const int kphi =
          std::max(8, static_cast<int>(std::ceil(options.angular_samples / 8.0 * a / (2 * kPi))));
      const double dphi = a / kphi;
      for (int i = 0; i < kpsi; ++i) {
        const double psi = (i + 0.5) * dpsi;
        for (int j = 0; j < kphi; ++j) {
          const double phi = (j + 0.5) * dphi;
          const ModelPoint p{w, sigma * std::sin(psi), phi, sigma * std::cos(psi)};
          const Mat g = metric_eval(field, model, w, model.cartesian(p)).g;
          Mat t(3, 2);
          t << sigma * std::cos(psi) * std::cos(phi), -sigma * std::sin(psi) * std::sin(phi),
              sigma * std::cos(psi) * std::sin(phi), sigma * std::sin(psi) * std::cos(phi),
              -sigma * std::sin(psi), 0.0;
          add_sample(p, induced_density(g, t) * dpsi * dphi);
        }
      }
    }
  }
  return out;
}

}  // namespace polyharm
