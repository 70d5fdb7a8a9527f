#pragma once

// Metric cone over a target space: points [P, t] with
// D^2 = t^2 + s^2 - 2ts cos min(d(P, Q), pi).

#include <cmath>

#include "polyharm/targets.hpp"

namespace polyharm {

struct ConePoint {
  TargetPoint base;
  double height = 0.0;

  bool is_apex() const { return height == 0.0; }
};

/// Equality in the cone: all zero-height points coincide.
bool cone_equal(const ConePoint& a, const ConePoint& b);

double cone_distance(const TargetSpace& space, const ConePoint& a, const ConePoint& b);

/// Geodesic in the cone, by unrolling the two rays into a planar sector of
/// angle min(d, pi). When d >= pi the geodesic runs through the apex.
ConePoint cone_interpolate(const TargetSpace& space, const ConePoint& a, const ConePoint& b,
                           double t);

inline ConePoint lift(const TargetPoint& p) { return ConePoint{p, 1.0}; }

/// Radial projection to the unit slice. Throws on the apex.
ConePoint project_unit(const ConePoint& a);

/// Squared cone distance between two lifted points at base distance d.
inline double lifted_distance_sq(double d) {
  const double h = std::sin(0.5 * (d < kPi ? d : kPi));
  return 4.0 * h * h;
}

}  // namespace polyharm
