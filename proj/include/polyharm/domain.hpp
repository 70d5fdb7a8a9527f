#pragma once

// Local models built from planar wedges glued along rays (n = 2) and their
// products with an interval (n = 3); Lipschitz metric fields; graded
// simplicial meshes of B(r) and quadrature on balls and spheres.

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyharm/targets.hpp"

namespace polyharm {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Point3 = std::array<double, 3>;

/// Point of a local model: wedge id plus polar coordinates in that wedge
/// (phi in [0, wedge angle]) and, for n = 3, the interval coordinate z.
struct ModelPoint {
  int wedge = 0;
  double rho = 0.0;
  double phi = 0.0;
  double z = 0.0;
};

struct Wedge {
  double angle = kPi;
  /// Angular position of the wedge's first ray in the developed frame used by
  /// anisotropic metric fields.
  double offset = 0.0;
};

/// Identification of ray `side_a` of wedge `wedge_a` with ray `side_b` of
/// wedge `wedge_b` (side 0 is phi = 0, side 1 is phi = angle), by arclength.
struct Gluing {
  int wedge_a = 0, side_a = 0, wedge_b = 0, side_b = 0;
};

class LocalModel {
 public:
  enum class Kind { book, cone, sector };

  /// k half-planes glued along a common line.
  static LocalModel book(int pages, int n = 2);
  /// Cone of total angle theta built from ceil(theta / (pi/2)) sectors.
  static LocalModel cone(double total_angle, int n = 2);
  /// A single flat sector with free rays.
  static LocalModel sector(double angle, int n = 2);
  /// General constructor; gluings must pair distinct rays.
  LocalModel(Kind kind, double parameter, int n, int nu, std::vector<Wedge> wedges,
             std::vector<Gluing> gluings);

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  int dimension() const { return n_; }
  int codimension() const { return nu_; }
  std::string describe() const;

  const std::vector<Wedge>& wedges() const { return wedges_; }
  const std::vector<Gluing>& gluings() const { return gluings_; }
  int wedge_count() const { return static_cast<int>(wedges_.size()); }
  double total_angle() const;

  /// Equivalence class of a ray under the gluings.
  int ray_class(int wedge, int side) const { return ray_class_[2 * wedge + side]; }
  int ray_class_count() const { return class_count_; }
  /// Number of wedge rays in the class; 1 means a free (unglued) ray.
  int ray_class_size(int cls) const { return class_size_[cls]; }

  /// Complement of the (n-2)-skeleton is connected.
  bool admissible() const { return admissible_; }

  /// Intrinsic angular distance between two directions of the link.
  double link_distance(const ModelPoint& a, const ModelPoint& b) const;
  /// Intrinsic distance in the model (Euclidean cone over the link, times R for n = 3).
  double distance(const ModelPoint& a, const ModelPoint& b) const;
  /// Cartesian coordinates in the frame of the point's own wedge.
  Point3 cartesian(const ModelPoint& p) const;
  /// Throws unless `p` lies in its wedge.
  void check_point(const ModelPoint& p) const;

 private:
  Kind kind_;
  double parameter_;
  int n_;
  int nu_;
  std::vector<Wedge> wedges_;
  std::vector<Gluing> gluings_;
  std::vector<int> ray_class_;
  std::vector<int> class_size_;
  int class_count_ = 0;
  std::vector<double> class_dist_;
  bool admissible_ = false;
};

class MetricField {
 public:
  enum class Kind { euclidean, conformal, anisotropic };

  static MetricField euclidean(int n);
  /// g = (1 + a|x|) delta, Lipschitz with constant a per component.
  static MetricField conformal(int n, double a, double ellipticity = 0.5);
  /// Constant symmetric positive-definite matrix in the developed frame.
  static MetricField anisotropic(const Mat& a);

  Kind kind() const { return kind_; }
  int dimension() const { return n_; }
  double coefficient() const { return a_; }
  const Mat& matrix() const { return matrix_; }
  double ellipticity() const { return lambda_; }
  /// Lipschitz constant of the components, in the max-entry norm.
  double lipschitz() const { return kind_ == Kind::conformal ? std::abs(a_) : 0.0; }
  std::string describe() const;

  /// Metric matrix in the local frame of `wedge` at local Cartesian x.
  Mat at(const LocalModel& model, int wedge, const Point3& x) const;

 private:
  Kind kind_ = Kind::euclidean;
  int n_ = 2;
  double a_ = 0.0;
  double lambda_ = 1.0;
  Mat matrix_;
};

struct MetricSample {
  Mat g;
  double volume_density = 1.0;
};

/// Evaluates g and sqrt(det g), checking symmetry and ellipticity.
MetricSample metric_eval(const MetricField& field, const LocalModel& model, int wedge,
                         const Point3& x);

/// Density of the measure induced by g on the span of the given tangent
/// columns: sqrt(det(T^T g T)).
double induced_density(const Mat& g, const Mat& tangents);

struct MeshVertex {
  ModelPoint p;
  bool boundary = false;
  int ray_class = -1;  // -1 inside a wedge, -2 on the axis (rho = 0)
  int level = 0;       // radial grid index
};

struct Simplex {
  std::array<int, 4> v{-1, -1, -1, -1};
  int wedge = 0;
  /// For vertices on a ray: which ray of this wedge (0 or 1), else -1.
  std::array<signed char, 4> side{-1, -1, -1, -1};
};

class Mesh {
 public:
  Mesh(LocalModel model, double r, double h, double grading, std::vector<double> radii,
       std::vector<MeshVertex> vertices, std::vector<Simplex> simplices);

  const LocalModel& model() const { return model_; }
  int dimension() const { return model_.dimension(); }
  double radius() const { return r_; }
  double h() const { return h_; }
  double grading() const { return grading_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<MeshVertex>& vertices() const { return vertices_; }
  const std::vector<Simplex>& simplices() const { return simplices_; }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int simplex_count() const { return static_cast<int>(simplices_.size()); }
  int simplex_size() const { return dimension() + 1; }

  /// Polar coordinates of vertex k of simplex s, in the simplex's wedge.
  ModelPoint local_point(int s, int k) const;
  /// Cartesian coordinates of vertex k of simplex s, in the simplex's wedge.
  Point3 local_coords(int s, int k) const;
  double simplex_volume(int s) const;
  /// Radial spacing of the grid at the given radius.
  double local_size(double radius) const;
  /// Simplices incident to each vertex.
  const std::vector<std::vector<int>>& stars() const { return stars_; }
  /// Unique undirected edges (a < b).
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }

 private:
  LocalModel model_;
  double r_, h_, grading_;
  std::vector<double> radii_;
  std::vector<MeshVertex> vertices_;
  std::vector<Simplex> simplices_;
  std::vector<std::vector<int>> stars_;
  std::vector<std::array<int, 2>> edges_;
};

/// Graded mesh of B(r): ring radii r (j/M)^grading with outer spacing ~ h.
Mesh triangulate(const LocalModel& model, double r, double h, double grading = 1.5);

struct MeshAudit {
  int orphan_vertices = 0;
  int degenerate_simplices = 0;
  double min_volume = 0.0;
  double min_edge_ratio = 0.0;  // edge length / local grid spacing
  double max_edge_ratio = 0.0;
  int open_boundary_edges = 0;  // outer boundary edges not closing up
  bool ok() const {
    return orphan_vertices == 0 && degenerate_simplices == 0 && open_boundary_edges == 0;
  }
};

MeshAudit audit_mesh(const Mesh& mesh);

/// Total angle of the simplices incident to the axis vertex (n = 2).
double origin_angle(const Mesh& mesh);

struct Location {
  int simplex = -1;
  std::array<double, 4> bary{};
};

class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  /// Containing simplex and barycentric coordinates. Points just outside the
  /// polygonal boundary snap to the nearest simplex.
  Location locate(const ModelPoint& p) const;

 private:
  struct WedgeGrid {
    Point3 lo{}, hi{};
    std::array<int, 3> dims{1, 1, 1};
    std::vector<std::vector<int>> cells;
  };
  const Mesh* mesh_;
  std::vector<WedgeGrid> grids_;
  std::array<double, 4> barycentric(int s, const Point3& x) const;
};

/// Value of a piecewise-linear map at a located point.
TargetPoint evaluate_pl(const TargetSpace& space, const Mesh& mesh,
                        std::span<const TargetPoint> values, const Location& loc);

struct SphereSample {
  ModelPoint p;
  Location loc;
  double weight = 0.0;
};

struct BallSphere {
  double sigma = 0.0;
  ModelPoint center;
  std::vector<double> fraction;      // |simplex intersect B(sigma)| / |simplex|
  std::vector<SphereSample> sphere;  // quadrature of the g-induced measure on dB(sigma)
  double sphere_measure = 0.0;
};

struct SphereOptions {
  /// Samples per 2 pi of polar angle (and per pi of the second angle for n = 3).
  int angular_samples = 2048;
  /// Minimum ratio sigma / local grid spacing.
  double min_resolution = 4.0;
};

/// Ball and sphere of radius sigma about `center`, which is the origin or a
/// point whose sigma-ball lies inside a single wedge.
BallSphere ball_and_sphere(const Mesh& mesh, const MetricField& field,
                           const PointLocator& locator, const ModelPoint& center, double sigma,
                           SphereOptions options = {});

/// Area of the intersection of a triangle with the disk |x - c| <= rho.
double triangle_disk_area(const Point3& a, const Point3& b, const Point3& c, const Point3& center,
                          double rho);

}  // namespace polyharm
