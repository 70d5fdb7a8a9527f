#pragma once

// Sampled maps with closed-form order and Holder exponent, shared by the
// unit tests and the acceptance runner.

#include <cmath>
#include <memory>
#include <vector>

#include "polyharm/analytics.hpp"

namespace fixtures {

using namespace polyharm;

struct SampledMap {
  std::unique_ptr<Mesh> mesh;
  std::unique_ptr<EnergyModel> model;
  std::vector<TargetPoint> values;
};

/// amplitude * r^k cos(k psi) on a cone of angle `theta` with k = 2 pi m / theta
/// (m = 1 unless given), written into a real target.
inline SampledMap homogeneous(double theta, double k, double amplitude = 0.35, double h = 0.02,
                              double grading = 1.5) {
  SampledMap m;
  m.mesh = std::make_unique<Mesh>(triangulate(LocalModel::cone(theta), 1.0, h, grading));
  m.model = std::make_unique<EnergyModel>(*m.mesh, MetricField::euclidean(2));
  for (const MeshVertex& v : m.mesh->vertices()) {
    const double psi = m.mesh->model().wedges()[v.p.wedge].offset + v.p.phi;
    m.values.push_back(TargetPoint::scalar(amplitude * std::pow(v.p.rho, k) * std::cos(k * psi)));
  }
  return m;
}

/// A smooth sphere-valued map on the flat disk near the north pole.
inline SampledMap sphere_map(double h = 0.03) {
  SampledMap m;
  m.mesh = std::make_unique<Mesh>(triangulate(LocalModel::cone(2 * kPi), 1.0, h, 1.5));
  m.model = std::make_unique<EnergyModel>(*m.mesh, MetricField::euclidean(2));
  for (const MeshVertex& v : m.mesh->vertices()) {
    const double psi = m.mesh->model().wedges()[v.p.wedge].offset + v.p.phi;
    const double t = 0.4 * v.p.rho * (1.0 + 0.3 * v.p.rho * std::cos(psi));
    const double a = psi + 0.5 * v.p.rho;
    const double x[3] = {std::sin(t) * std::cos(a), std::sin(t) * std::sin(a), std::cos(t)};
    m.values.push_back(TargetPoint::vector(x));
  }
  return m;
}

/// Rotation of S^2 about a fixed generic axis.
inline TargetPoint rotate(const TargetPoint& p, double angle) {
  const double ax[3] = {0.48, -0.6, 0.64};  // unit
  const double c = std::cos(angle), s = std::sin(angle);
  const double d = ax[0] * p.x[0] + ax[1] * p.x[1] + ax[2] * p.x[2];
  const double cr[3] = {ax[1] * p.x[2] - ax[2] * p.x[1], ax[2] * p.x[0] - ax[0] * p.x[2],
                        ax[0] * p.x[1] - ax[1] * p.x[0]};
  double out[3];
  for (int i = 0; i < 3; ++i) out[i] = p.x[i] * c + cr[i] * s + ax[i] * d * (1 - c);
  return TargetPoint::vector(out);
}

}  // namespace fixtures
