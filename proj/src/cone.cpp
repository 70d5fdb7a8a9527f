#include "polyharm/cone.hpp"

#include <algorithm>
#include <cmath>

namespace polyharm {

bool cone_equal(const ConePoint& a, const ConePoint& b) {
  if (a.is_apex() || b.is_apex()) return a.is_apex() && b.is_apex();
  return a.height == b.height && a.base == b.base;
}

double cone_distance(const TargetSpace& space, const ConePoint& a, const ConePoint& b) {
  if (a.height < 0.0 || b.height < 0.0) throw Error("cone heights must be nonnegative");
  if (a.is_apex()) return b.height;
  if (b.is_apex()) return a.height;
  const double phi = std::min(distance(space, a.base, b.base), kPi);
  // (t - s)^2 + 2ts(1 - cos phi) avoids cancellation for nearby points.
  const double half = std::sin(0.5 * phi);
  const double d2 = (a.height - b.height) * (a.height - b.height) +
                    4.0 * a.height * b.height * half * half;
  return std::sqrt(std::max(d2, 0.0));
}

ConePoint cone_interpolate(const TargetSpace& space, const ConePoint& a, const ConePoint& b,
                           double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error("interpolation fraction outside [0, 1]");
  if (a.height < 0.0 || b.height < 0.0) throw Error("cone heights must be nonnegative");
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  if (a.is_apex() && b.is_apex()) return a;
  if (a.is_apex()) return ConePoint{b.base, t * b.height};
  if (b.is_apex()) return ConePoint{a.base, (1.0 - t) * a.height};

  const double d = distance(space, a.base, b.base);
  if (d == 0.0) return ConePoint{a.base, (1.0 - t) * a.height + t * b.height};
  if (d >= kPi) {
    // Broken geodesic: down the ray of a to the apex, then up the ray of b.
    const double x = (1.0 - t) * a.height - t * b.height;
    if (x >= 0.0) return ConePoint{a.base, x};
    return ConePoint{b.base, -x};
  }
  const double x = (1.0 - t) * a.height + t * b.height * std::cos(d);
  const double y = t * b.height * std::sin(d);
  const double radius = std::hypot(x, y);
  if (radius == 0.0) return ConePoint{a.base, 0.0};
  const double angle = std::atan2(y, x);
  const double frac = std::clamp(angle / d, 0.0, 1.0);
  return ConePoint{interpolate(space, a.base, b.base, frac), radius};
}

ConePoint project_unit(const ConePoint& a) {
  if (!(a.height > 0.0)) throw Error("the apex has no radial projection");
  return ConePoint{a.base, 1.0};
}

}  // namespace polyharm
