#pragma once

// Discrete energy of piecewise-linear maps into a target space and the
// constrained minimizer by Gauss-Seidel relaxation with Frechet-mean updates.

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "polyharm/domain.hpp"
#include "polyharm/targets.hpp"

namespace polyharm {

/// Per-simplex edge weights w_ij = -vol_g(s) grad(l_i)^T g^{-1} grad(l_j), with
/// g frozen at the barycenter. For real-valued maps sum_{i<j} w_ij (u_i - u_j)^2
/// is the P1 Dirichlet energy of the affine interpolant.
class EnergyModel {
 public:
  EnergyModel(const Mesh& mesh, const MetricField& field);

  const Mesh& mesh() const { return *mesh_; }
  const MetricField& field() const { return field_; }
  double weight(int s, int i, int j) const { return weights_[s][pair_index(i, j)]; }
  double volume_g(int s) const { return volume_g_[s]; }
  /// Metric at the barycenter of s, in the simplex's local frame.
  const Mat& metric(int s) const { return metric_[s]; }
  /// Summed edge weights around each vertex: (neighbor, weight).
  const std::vector<std::vector<std::pair<int, double>>>& adjacency() const { return adjacency_; }
  int negative_weight_count() const { return negative_; }

  static int pair_index(int i, int j);

 private:
  const Mesh* mesh_;
  MetricField field_;
  std::vector<std::array<double, 6>> weights_;
  std::vector<double> volume_g_;
  std::vector<Mat> metric_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
  int negative_ = 0;
};

enum class DistanceKind { base, lifted };

double simplex_energy(const EnergyModel& model, const TargetSpace& space,
                      std::span<const TargetPoint> values, int s,
                      DistanceKind kind = DistanceKind::base);

std::vector<double> simplex_energies(const EnergyModel& model, const TargetSpace& space,
                                     std::span<const TargetPoint> values,
                                     DistanceKind kind = DistanceKind::base);

struct EnergyReport {
  double total = 0.0;
  std::vector<double> per_simplex;
  long sweeps = 0;
  double max_move = 0.0;
  std::vector<double> history;
  bool converged = false;
  bool monotone = true;
  int fallback_updates = 0;
};

EnergyReport total_energy(const EnergyModel& model, const TargetSpace& space,
                          std::span<const TargetPoint> values,
                          DistanceKind kind = DistanceKind::base);

/// Symmetric form pi_s(Z, W) on simplex s for vectors in the simplex's local
/// frame, built from squared distances along edges by polarization.
double pullback_form(const EnergyModel& model, const TargetSpace& space,
                     std::span<const TargetPoint> values, int s, const Vec& z, const Vec& w);

/// sum_s vol_g(s) pi_s(Z_s, Z_s) for a piecewise-constant field Z.
double directional_energy(const EnergyModel& model, const TargetSpace& space,
                          std::span<const TargetPoint> values, std::span<const Vec> z);

struct SolverOptions {
  double tol = 1e-9;
  long max_sweeps = 100000;
  /// Over-relaxation factor for linear targets (Euclidean, arc); 1 is plain
  /// Gauss-Seidel. Ignored for curved and branching targets.
  double omega = 1.0;
  FrechetOptions frechet{1e-13, 200};
  /// Record the energy every `history_stride` sweeps (the last sweep always).
  long history_stride = 1;
};

struct SolveResult {
  std::vector<TargetPoint> values;
  EnergyReport report;
};

/// Minimizes energy with boundary values pinned to `initial` and all values
/// kept in the closed ball. Interior entries of `initial` are the starting guess.
SolveResult minimize(const EnergyModel& model, const TargetSpace& space,
                     std::vector<TargetPoint> initial, const BallConstraint& ball,
                     const SolverOptions& options = {});

/// One Gauss-Seidel update of vertex v (no over-relaxation); returns the new value.
TargetPoint relax_vertex(const EnergyModel& model, const TargetSpace& space,
                         std::span<const TargetPoint> values, int v, const BallConstraint& ball,
                         const FrechetOptions& options = {1e-13, 200});

using TraceFunction = std::function<TargetPoint(const ModelPoint&)>;

/// Evaluates `trace` at every vertex and projects into the ball.
std::vector<TargetPoint> sample_map(const Mesh& mesh, const TargetSpace& space,
                                    const TraceFunction& trace, const BallConstraint& ball);

void write_checkpoint(const std::filesystem::path& path, const TargetSpace& space,
                      std::span<const TargetPoint> values, long sweeps);
std::vector<TargetPoint> read_checkpoint(const std::filesystem::path& path,
                                         const TargetSpace& space, long* sweeps = nullptr);

}  // namespace polyharm
