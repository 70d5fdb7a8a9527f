#pragma once

// Randomized checks of comparison inequalities on the unit sphere S^2 and on
// a tripod. Each check returns a margin (bound minus measured value); a
// negative margin beyond kViolationTol counts as a violation.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "polyharm/targets.hpp"

namespace polyharm {

inline constexpr double kViolationTol = 1e-9;

struct OracleReport {
  std::string lemma;
  long samples = 0;
  long violations = 0;
  double worst_margin = 0.0;
  std::string params;
  std::uint64_t seed = 0;

  void record(double margin);
  bool pass() const { return violations == 0; }
  bool vacuous() const { return samples == 0; }
};

struct OracleOptions {
  long samples = 100000;
  std::uint64_t seed = 1;
  /// Shift every bound down by adversarial_shift (self-test of the detector).
  bool adversarial = false;
  double adversarial_shift = 1e-3;
};

/// Three points of S^2 with the given pairwise distances.
std::array<TargetPoint, 3> comparison_triangle(double d_pq, double d_qr, double d_rp);

/// d(P~_t, R~_s) - d(P_t, R_s) with P_t on PQ and R_s on RQ.
double check_cat1_condition(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                            const TargetPoint& r, double t, double s);

/// Sum of squared sides + eps0 delta0^2 - sum of squared diagonals.
double check_quadrilateral(const TargetPoint& p, const TargetPoint& q, const TargetPoint& r,
                           const TargetPoint& s, double eps0, double delta0);

/// Leading terms of the interpolation estimate minus d^2(P_eta', S_eta).
double check_interpolation_estimate(const TargetPoint& p, const TargetPoint& q,
                                    const TargetPoint& s, double eta, double eta_prime);

/// Same for the expanded form with the Quad*Quad and Cub terms dropped.
double check_tri1_estimate(const TargetPoint& p, const TargetPoint& q, const TargetPoint& s,
                           double eta, double eta_prime);

/// Right side minus left side of the midpoint convexity bound.
double check_midpoint_convexity(const TargetPoint& p, const TargetPoint& q, const TargetPoint& r);

OracleReport run_cat1_oracle(const TargetSpace& space, const OracleOptions& options);
OracleReport run_quadrilateral_oracle(double eps0, double delta0, const OracleOptions& options);
OracleReport run_midpoint_oracle(const OracleOptions& options);

/// Lifted-distance band, small-angle bound and projection bound of the cone.
std::vector<OracleReport> run_cone_oracles(const OracleOptions& options);

struct QuadrilateralSweep {
  double eps0 = 0.0;
  std::vector<double> delta0;        // descending
  std::vector<long> violations;      // per delta0
  double threshold = 0.0;            // largest delta0 with no violations at or below it
};

std::vector<QuadrilateralSweep> sweep_quadrilateral(const std::vector<double>& eps0_grid,
                                                    const std::vector<double>& delta0_grid,
                                                    const OracleOptions& options);

enum class EstimateFamily {
  estimate_equal_eta,    // eta = eta' fixed
  estimate_linear_gap,   // eta fixed, eta' = eta + kappa h
  tri1_linear            // eta = a h, eta' = b h
};

std::string to_string(EstimateFamily family);

struct ScaleFamilyReport {
  EstimateFamily family{};
  std::vector<double> h;
  std::vector<double> envelope;       // max |RHS - LHS| per h
  std::vector<double> worst_margin;   // min (RHS - LHS) per h
  double slope = 0.0;                 // log-log least squares of envelope against h
  double cubic_constant = 0.0;        // smallest C with margin >= -C h^3 on the samples
  long shapes = 0;
};

ScaleFamilyReport run_scale_family(EstimateFamily family, const std::vector<double>& h,
                                   long shapes, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::vector<OracleReport> run_all_oracles(const OracleOptions& options);

std::string oracle_csv_header();
std::string oracle_csv_row(const OracleReport& report);

}  // namespace polyharm
