#pragma once

// Geodesic target spaces: unit spheres, geodesic arcs, metric trees and
// Euclidean space, with distances, geodesic interpolation, weighted Frechet
// means and projection onto balls.

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyharm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr int kMaxTargetCoords = 4;

/// A point of a target space. The meaning of the coordinates depends on the
/// owning space: sphere points are unit vectors in R^{m+1}, arc points keep
/// their arclength in x[0], tree points are (edge, offset from edge start).
/// `size` is the number of meaningful coordinates and must match the space.
struct TargetPoint {
  std::array<double, kMaxTargetCoords> x{};
  int edge = -1;
  int size = 0;

  static TargetPoint scalar(double s) {
    TargetPoint p;
    p.x[0] = s;
    p.size = 1;
    return p;
  }
  static TargetPoint on_edge(int edge, double offset) {
    TargetPoint p;
    p.edge = edge;
    p.x[0] = offset;
    p.size = 1;
    return p;
  }
  static TargetPoint vector(std::span<const double> coords);

  friend bool operator==(const TargetPoint&, const TargetPoint&) = default;
};

enum class CurvatureClass { cat1, npc };

struct TreeEdge {
  int a = 0;
  int b = 0;
  double length = 1.0;
};

class TargetSpace {
 public:
  enum class Kind { sphere, arc, tree, euclidean };

  static TargetSpace sphere(int m);
  static TargetSpace arc(double length);
  static TargetSpace euclidean(int m);
  /// Edges must form a tree on nodes 0..N-1.
  static TargetSpace tree(std::vector<TreeEdge> edges);
  /// Star with `legs` edges of equal length leaving node 0.
  static TargetSpace star(int legs, double leg_length);

  Kind kind() const { return kind_; }
  CurvatureClass curvature() const {
    return kind_ == Kind::sphere ? CurvatureClass::cat1 : CurvatureClass::npc;
  }
  /// Manifold dimension m for sphere/euclidean, 1 for arc and tree.
  int dimension() const { return dim_; }
  /// Number of meaningful entries in TargetPoint::x.
  int coordinate_count() const;
  double arc_length() const { return length_; }
  std::string describe() const;

  // Tree accessors.
  int tree_node_count() const;
  int tree_edge_count() const;
  const TreeEdge& tree_edge(int e) const;
  double tree_node_distance(int a, int b) const;
  /// Position of tree node `node` expressed as a point on an incident edge.
  TargetPoint tree_node_point(int node) const;

  /// Throws Error when `p` is not a valid point of this space.
  void validate(const TargetPoint& p) const;

 private:
  struct TreeData;

  Kind kind_ = Kind::euclidean;
  int dim_ = 1;
  double length_ = 0.0;
  std::shared_ptr<const TreeData> tree_;

  friend double distance(const TargetSpace&, const TargetPoint&, const TargetPoint&);
  friend TargetPoint interpolate(const TargetSpace&, const TargetPoint&, const TargetPoint&,
                                 double);
  friend TargetPoint tree_weighted_minimizer(const TargetSpace&, std::span<const TargetPoint>,
                                             std::span<const double>);
};

struct BallConstraint {
  TargetPoint center;
  double radius = 0.5;

  /// Throws unless 0 < radius < pi/4.
  void validate() const;
};

double distance(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q);

/// The point at distance t * d(p, q) from p along the geodesic to q.
/// Throws for geodesics of length >= pi on the sphere (antipodal points).
TargetPoint interpolate(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                        double t);

/// Geodesic continuation of the segment p -> q up to parameter t, which may
/// exceed 1. Arc points are clamped into the arc. Trees only allow t <= 1.
TargetPoint extrapolate(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                        double t);

struct FrechetOptions {
  double tol = 1e-10;
  int max_iterations = 10000;
};

/// Minimizer of sum_i w_i d^2(., p_i). For the sphere the points must lie in
/// a ball of radius < pi/4; when `ball` is given containment in that ball is
/// checked instead of searching for one.
TargetPoint frechet_mean(const TargetSpace& space, std::span<const TargetPoint> points,
                         std::span<const double> weights, FrechetOptions options = {},
                         const std::optional<BallConstraint>& ball = std::nullopt);

/// Same as frechet_mean, starting the iteration from `start` and skipping the
/// containment checks. Used by the relaxation solver on its own iterates.
TargetPoint frechet_mean_from(const TargetSpace& space, std::span<const TargetPoint> points,
                              std::span<const double> weights, const TargetPoint& start,
                              FrechetOptions options = {});

/// Minimizer of sum_i w_i d^2(., p_i) where some weights may be negative but
/// their sum is positive. Exact on arcs, trees and Euclidean space; projected
/// gradient descent with backtracking on the sphere.
TargetPoint signed_weight_minimizer(const TargetSpace& space, std::span<const TargetPoint> points,
                                    std::span<const double> weights, const TargetPoint& start,
                                    FrechetOptions options = {});

/// Exact minimizer of a signed-weight quadratic objective on a tree.
TargetPoint tree_weighted_minimizer(const TargetSpace& space, std::span<const TargetPoint> points,
                                    std::span<const double> weights);

double weighted_objective(const TargetSpace& space, const TargetPoint& x,
                          std::span<const TargetPoint> points, std::span<const double> weights);

TargetPoint project_to_ball(const TargetSpace& space, const TargetPoint& p,
                            const BallConstraint& ball);

// Sphere helpers (unit vectors in R^{m+1}).
namespace sphere {
/// Riemannian logarithm at `base`, as an ambient tangent vector.
std::array<double, kMaxTargetCoords> log(int coords, const TargetPoint& base,
                                         const TargetPoint& p);
TargetPoint exp(int coords, const TargetPoint& base,
                const std::array<double, kMaxTargetCoords>& v);
}  // namespace sphere

}  // namespace polyharm
