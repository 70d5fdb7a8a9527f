#pragma once

// Experiment configuration (JSON, schema version 1) and the pipeline behind
// the command-line verbs: solve, analyze, link, report and oracles.

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polyharm/analytics.hpp"
#include "polyharm/domain.hpp"
#include "polyharm/energy.hpp"
#include "polyharm/link.hpp"
#include "polyharm/oracles.hpp"
#include "polyharm/targets.hpp"

namespace polyharm {

inline constexpr int kSchemaVersion = 1;

struct DomainSpec {
  std::string model = "cone";  // cone | book | sector
  double angle = 2.0 * kPi;    // cone total angle or sector angle
  int pages = 2;
  int n = 2;
  double radius = 1.0;
  double h = 0.05;
  double grading = 1.5;
};

struct MetricSpec {
  std::string kind = "euclidean";  // euclidean | conformal | anisotropic
  double a = 0.0;
  double ellipticity = 0.5;
  std::vector<std::vector<double>> matrix;
};

struct TargetSpec {
  std::string kind = "euclidean";  // euclidean | arc | sphere | star
  int dim = 1;
  double length = 1.0;  // arc length, or leg length for star
  int legs = 3;
};

/// Boundary data, written as a planar vector field v(x) that is placed into
/// the target around the ball center (see make_trace).
struct TraceSpec {
  std::string kind = "linear";  // linear | modes | page_modes | cap | constant
  double amplitude = 0.5;
  double direction = 0.0;               // linear: angle of the gradient
  std::vector<double> coefficients;     // modes
  double cos_coefficient = 1.0;         // page_modes: shared across pages
  std::vector<double> sin_coefficients;   // page_modes: per page
  std::vector<double> sin2_coefficients;  // page_modes: per page
  double quadratic = 0.0;               // cap: weight of the quadratic term
  std::string initial = "center";       // interior start: center | trace
};

struct SolverSpec {
  double tol = 1e-9;
  long max_sweeps = 100000;
  double omega = 1.0;
};

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct AnalysisSpec {
  bool profile = true;
  double sigma_max = 0.4;
  int octaves = 3;
  int per_octave = 2;
  double monotonicity_tolerance = 0.03;

  bool holder = true;
  PairPolicy holder_policy = PairPolicy::random;
  ModelPoint holder_center{};
  double holder_radius = 0.5;
  long holder_pairs = 4000;

  std::vector<double> blowup_lambdas;

  bool link = false;
  int link_subdivision = 512;
  bool link_tripod = false;
  int tripod_subdivision = 32;
  int tripod_restarts = 50;
};

struct AcceptanceSpec {
  std::optional<Band> alpha;
  std::optional<Band> holder;
  std::optional<Band> lambda1;
  std::optional<double> prediction_rel;  // |holder - predicted| / predicted
  bool blowup_decreasing = false;
  bool tripod_below_real = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::string output_dir;  // empty: derived from the environment or flags
  DomainSpec domain;
  MetricSpec metric;
  TargetSpec target;
  std::vector<double> ball_center;  // target coordinates; empty: default center
  double ball_radius = 0.5;
  TraceSpec trace;
  SolverSpec solver;
  AnalysisSpec analysis;
  AcceptanceSpec acceptance;
};

/// Parses and validates a configuration; errors name the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

LocalModel build_model(const DomainSpec& spec);
MetricField build_metric(const MetricSpec& spec, int n);
TargetSpace build_target(const TargetSpec& spec);
BallConstraint build_ball(const ExperimentConfig& config, const TargetSpace& space);
TraceFunction make_trace(const TraceSpec& spec, const LocalModel& model, double radius,
                         const TargetSpace& space, const BallConstraint& ball);

struct SummaryLine {
  std::string check;
  bool pass = false;
  std::string text;  // measured value and the band it was judged against
};

std::string format_summary(std::span<const SummaryLine> lines);

/// The state of one experiment across stages. Each stage writes its
/// artifacts to `out` and returns summary lines.
class Experiment {
 public:
  Experiment(ExperimentConfig config, std::filesystem::path out);

  const ExperimentConfig& config() const { return config_; }
  const std::filesystem::path& out() const { return out_; }

  /// Meshes, solves and writes mesh.txt, checkpoint.txt, energy.csv and
  /// energy_history.csv.
  std::vector<SummaryLine> solve();
  /// Loads mesh.txt and checkpoint.txt when no solve ran in this process,
  /// then writes profile.csv, holder.csv, blowup.csv and monotonicity.csv.
  std::vector<SummaryLine> analyze();
  /// Writes eigen.csv for the link at the origin.
  std::vector<SummaryLine> link();
  /// Prediction check across stages; writes summary.txt.
  std::vector<SummaryLine> report(std::vector<SummaryLine> lines);

  // Measurements, available after the corresponding stage.
  const Mesh& mesh() const { return *mesh_; }
  const std::vector<TargetPoint>& values() const { return values_; }
  const EnergyReport& energy_report() const { return energy_; }
  const std::optional<RadialProfile>& profile() const { return profile_; }
  const std::optional<OrderEstimate>& order() const { return order_; }
  const std::optional<MonotonicityResult>& monotonicity() const { return monotonicity_; }
  const std::optional<HolderFit>& holder() const { return holder_; }
  const std::vector<double>& blowup_deviation() const { return blowup_deviation_; }
  const std::optional<EigenResult>& eigen_real() const { return eigen_real_; }
  const std::optional<EigenResult>& eigen_tripod() const { return eigen_tripod_; }
  std::optional<double> predicted_alpha() const;

 private:
  ExperimentConfig config_;
  std::filesystem::path out_;
  TargetSpace space_;
  BallConstraint ball_;
  std::unique_ptr<Mesh> mesh_;
  std::unique_ptr<EnergyModel> energy_model_;
  std::vector<TargetPoint> values_;
  EnergyReport energy_;
  std::optional<RadialProfile> profile_;
  std::optional<OrderEstimate> order_;
  std::optional<MonotonicityResult> monotonicity_;
  std::optional<HolderFit> holder_;
  std::vector<double> blowup_deviation_;
  std::optional<EigenResult> eigen_real_;
  std::optional<EigenResult> eigen_tripod_;

  void ensure_solution();
};

/// solve + analyze + link (if requested) + report.
std::vector<SummaryLine> run_experiment(Experiment& experiment);

struct OracleSuite {
  std::vector<OracleReport> reports;
  std::vector<QuadrilateralSweep> sweeps;
  std::vector<ScaleFamilyReport> families;
  std::vector<SummaryLine> summary;
  bool pass() const;
};

/// All comparison oracles, the quadrilateral threshold sweep and the scale
/// families. Writes oracles.csv, quadrilateral_sweep.csv and scale_families.csv.
OracleSuite run_oracle_suite(const OracleOptions& options, const std::filesystem::path& out);

/// Output directory: the config's own, else `flag`, else $POLYHARM_OUT/name,
/// else out/name. Relative config paths are resolved against $POLYHARM_OUT.
std::filesystem::path resolve_output(const ExperimentConfig& config, const std::string& flag);

}  // namespace polyharm
