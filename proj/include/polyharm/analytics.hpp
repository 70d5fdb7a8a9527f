#pragma once

// Regularity measurements on a piecewise-linear map: energy on balls,
// boundary moments and their optimal centers, the order function,
// monotonicity of scaled energies, Holder fits and blow-up frames.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polyharm/domain.hpp"
#include "polyharm/energy.hpp"
#include "polyharm/targets.hpp"

namespace polyharm {

/// A map together with what every measurement needs: the energy model, the
/// per-simplex energies and a point locator. The optional ball is passed to
/// Frechet-mean computations on curved targets.
class MapAnalysis {
 public:
  MapAnalysis(const EnergyModel& model, const TargetSpace& space, std::vector<TargetPoint> values,
              std::optional<BallConstraint> ball = std::nullopt, SphereOptions sphere = {});

  const EnergyModel& energy_model() const { return *model_; }
  const Mesh& mesh() const { return model_->mesh(); }
  const MetricField& field() const { return model_->field(); }
  const TargetSpace& space() const { return space_; }
  const std::vector<TargetPoint>& values() const { return values_; }
  const std::optional<BallConstraint>& ball() const { return ball_; }
  const std::vector<double>& simplex_energy() const { return energy_; }
  const PointLocator& locator() const { return locator_; }
  const SphereOptions& sphere_options() const { return sphere_; }

  TargetPoint value_at(const ModelPoint& p) const;
  BallSphere ball_sphere(const ModelPoint& center, double sigma) const;

 private:
  const EnergyModel* model_;
  TargetSpace space_;
  std::vector<TargetPoint> values_;
  std::optional<BallConstraint> ball_;
  SphereOptions sphere_;
  std::vector<double> energy_;
  PointLocator locator_;
};

/// sigma_max * 2^(-j / per_octave) for j = 0..octaves*per_octave, ascending.
std::vector<double> log_radii(double sigma_max, int octaves, int per_octave);

/// E(sigma) for each radius.
std::vector<double> energy_profile(const MapAnalysis& map, const ModelPoint& center,
                                   std::span<const double> radii);

/// I(sigma, Q) for a fixed Q.
double boundary_moment(const MapAnalysis& map, const ModelPoint& center, double sigma,
                       const TargetPoint& q);

struct Moment {
  double value = 0.0;  // I(sigma, Q_sigma)
  TargetPoint center;  // Q_sigma
  bool constant = false;  // the map is constant on the sphere
};

/// Optimal center Q_sigma and the moment I(sigma, Q_sigma).
Moment optimal_moment(const MapAnalysis& map, const ModelPoint& center, double sigma);

struct RadialProfile {
  ModelPoint center;
  std::vector<double> sigma;
  std::vector<double> energy;
  std::vector<double> moment;
  std::vector<TargetPoint> q;
  std::vector<double> alpha;  // infinity where the sphere values are constant
};

RadialProfile radial_profile(const MapAnalysis& map, const ModelPoint& center,
                             std::span<const double> radii);

struct OrderEstimate {
  std::vector<double> alpha;
  double alpha_min_sigma = 0.0;  // alpha at the smallest radius
  double extrapolated = 0.0;
  double uncertainty = 0.0;
  bool infinite = false;
};

/// Extrapolates alpha to sigma -> 0 from the smallest radius and its double;
/// the uncertainty is the larger change over the last two octaves.
OrderEstimate order_profile(const RadialProfile& profile);

struct MonotonicityResult {
  double exponent = 0.0;
  double worst_violation = 0.0;  // max relative decrease of E / sigma^q per octave
  double tolerance = 0.03;
  int octaves = 0;
  bool pass() const { return worst_violation <= tolerance; }
};

MonotonicityResult monotonicity_check(const RadialProfile& profile, double exponent,
                                      double tolerance = 0.03);

enum class PairPolicy { anchored, random };

std::string to_string(PairPolicy policy);

struct HolderOptions {
  PairPolicy policy = PairPolicy::random;
  long pairs = 4000;
  int bins = 12;
  std::uint64_t seed = 1;
  /// Pairs closer than this many local grid spacings are discarded.
  double min_separation_cells = 2.0;
  /// The region must stay inside B((1 - collar) r).
  double collar = 0.1;
};

struct HolderFit {
  double exponent = 0.0;
  double constant = 0.0;
  double residual = 0.0;
  PairPolicy policy = PairPolicy::random;
  long pairs = 0;      // pairs used after the separation filter
  int bins_used = 0;
  bool valid = false;  // false for constant maps or too few nonempty bins
};

/// Upper-envelope fit of d(f(x), f(y)) <= C |x - y|^gamma over pairs in the
/// intrinsic ball B(center, radius). Anchored pairs use x = center.
HolderFit holder_fit(const MapAnalysis& map, const ModelPoint& center, double radius,
                     const HolderOptions& options = {});

struct BlowUpFrame {
  double lambda = 0.0;
  double moment = 0.0;  // I(lambda, Q_lambda)
  double mu = 0.0;      // (lambda^(1-n) I)^(1/2)
  bool degenerate = false;
  std::vector<ModelPoint> grid;  // points of B(1) in blow-up coordinates
  /// d(f(lambda x), f(0)) / mu at each grid point.
  std::vector<double> rescaled;
};

/// Blow-up at the origin on a fixed polar grid: radii k/8, 16 angles per wedge.
BlowUpFrame blow_up(const MapAnalysis& map, double lambda);

/// max over the grid of |d(x) - |x|^alpha d(x / |x|)|; infinity if degenerate.
double homogeneity_deviation(const BlowUpFrame& frame, double alpha);

std::vector<double> homogeneity_check(std::span<const BlowUpFrame> frames, double alpha);

}  // namespace polyharm
