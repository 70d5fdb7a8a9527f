#pragma once

// Links of points of planar local models as metric graphs, their first
// eigenvalue for real-valued and tripod-valued maps, and the Holder exponent
// that an eigenvalue bound predicts.

#include <cstdint>
#include <string>
#include <vector>

#include "polyharm/domain.hpp"

namespace polyharm {

struct LinkEdge {
  int a = 0;
  int b = 0;  // a == b for a closed loop
  double length = 0.0;
};

struct LinkGraph {
  int vertex_count = 0;
  std::vector<LinkEdge> edges;
  std::string description;

  double total_length() const;
  /// Throws unless lengths are positive and the graph is connected.
  void validate() const;
};

/// A single loop of the given length.
LinkGraph circle_link(double length);

/// Link of `x` in an n = 2 model, with arc lengths measured under g at x.
/// At the origin the vertices are the ray classes and each wedge is an edge;
/// at a ray point each incident wedge contributes a half circle; at an
/// interior point the link is a full circle.
LinkGraph extract_link(const LocalModel& model, const MetricField& field,
                       const ModelPoint& x = ModelPoint{});

enum class LinkTarget { real, tripod };

std::string to_string(LinkTarget target);

struct EigenOptions {
  /// Elements per unit length at the finest level.
  int subdivision = 512;
  /// Coarser nested levels reported as the refinement trend.
  int trend_levels = 2;
  /// Tripod target: random restarts on top of the start from the real eigenfunction.
  int restarts = 50;
  long max_sweeps = 20000;
  double tol = 1e-12;
  std::uint64_t seed = 1;
};

struct EigenResult {
  double lambda1 = 0.0;
  int subdivision = 0;
  LinkTarget target = LinkTarget::real;
  /// Nodal values; for the tripod, offsets along `legs`.
  std::vector<double> samples;
  std::vector<int> legs;
  /// lambda1 at the coarser nested levels followed by the finest, coarse first.
  std::vector<int> trend_subdivision;
  std::vector<double> trend;
  bool converged = true;
  /// Tripod: spread of the restart results (max - min).
  double spread = 0.0;
  int restarts = 0;
  /// Tripod: real-valued value with the same lumped mass, for comparison.
  double real_reference = 0.0;
};

/// First nonzero eigenvalue of the P1 Laplacian of the subdivided graph with
/// consistent mass; the estimates are upper bounds that decrease under refinement.
EigenResult lambda1_real(const LinkGraph& link, const EigenOptions& options = {});

/// Rayleigh quotient minimization over piecewise-geodesic maps into a tripod,
/// with lumped mass and the tree center of mass.
EigenResult lambda1_tripod(const LinkGraph& link, const EigenOptions& options = {});

EigenResult lambda1(const LinkGraph& link, LinkTarget target, const EigenOptions& options = {});

struct ExponentPrediction {
  double alpha = 0.0;     // positive root of alpha (alpha + n - k - 2) = beta
  bool lipschitz = false;  // beta >= n - k - 1
};

ExponentPrediction predicted_exponent(double beta, int n, int k);

}  // namespace polyharm
