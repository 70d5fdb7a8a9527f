// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance <configs dir> <work dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "fem_oracle.hpp"
#include "fixtures.hpp"
#include "polyharm/csv.hpp"
#include "polyharm/experiment.hpp"

using namespace polyharm;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "[fail] ") << what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Run {
  ExperimentConfig config;
  std::unique_ptr<Experiment> experiment;
  std::vector<SummaryLine> lines;
  double seconds = 0.0;
};

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".csv") out[e.path().filename().string()] = read_text(e.path());
  }
  return out;
}

Eigen::VectorXd scalars(const std::vector<TargetPoint>& values) {
  Eigen::VectorXd out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].x[0];
  return out;
}

double developed(const Mesh& mesh, const ModelPoint& p) {
  return mesh.model().wedges()[p.wedge].offset + p.phi;
}

void ac3(Verdict& v) {
  const double h = 0.05;
  const Mesh mesh = triangulate(LocalModel::cone(2 * kPi), 1.0, h);
  const EnergyModel model(mesh, MetricField::euclidean(2));
  SolverOptions opts;
  opts.tol = 1e-13;
  opts.omega = 1.9;
  {
    const TargetSpace e = TargetSpace::euclidean(1);
    const BallConstraint ball{TargetPoint::scalar(0.0), 0.75};
    std::vector<TargetPoint> init = sample_map(mesh, e, [&](const ModelPoint& p) {
      const double a = developed(mesh, p);
      return TargetPoint::scalar(0.3 * std::cos(a) + 0.2 * std::sin(3 * a));
    }, ball);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      if (!mesh.vertices()[i].boundary) init[i] = TargetPoint::scalar(0.0);
    }
    const SolveResult r = minimize(model, e, init, ball, opts);
    const Eigen::VectorXd diff = scalars(r.values) - fixtures::fem_solve(mesh, scalars(init));
    const double norm = std::sqrt(diff.dot(fixtures::stiffness(mesh) * diff));
    v.require(r.report.converged && norm < 1e-8, "real: energy-norm gap " + fmt(norm) + " (band < 1e-8)");
  }
  {
    const TargetSpace arc = TargetSpace::arc(0.5);
    const BallConstraint ball{TargetPoint::scalar(0.25), 0.5};
    std::vector<TargetPoint> init = sample_map(mesh, arc, [&](const ModelPoint& p) {
      const double a = developed(mesh, p);
      return TargetPoint::scalar(0.25 + 0.2 * p.rho * std::cos(a) + 0.04 * std::cos(2 * a));
    }, ball);
    const Eigen::VectorXd fem = fixtures::fem_solve(mesh, scalars(init));
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      if (!mesh.vertices()[i].boundary) init[i] = TargetPoint::scalar(0.25);
    }
    const SolveResult r = minimize(model, arc, init, ball, opts);
    double sup = 0.0;
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      sup = std::max(sup, std::abs(r.values[i].x[0] - std::clamp(fem[i], 0.0, 0.5)));
    }
    v.require(r.report.converged && sup < 3 * h * h,
              "arc: sup distance " + fmt(sup) + " (band < 3h^2 = " + fmt(3 * h * h) + ")");
  }
}

void ac4(Verdict& v) {
  for (int k : {1, 2}) {
    const auto m = fixtures::homogeneous(2 * kPi, k);
    const MapAnalysis map(*m.model, TargetSpace::euclidean(1), m.values);
    const RadialProfile p = radial_profile(map, ModelPoint{}, log_radii(0.4, 1, 4));
    double worst = 0.0, worst_e = 0.0, worst_i = 0.0;
    const double a2 = 0.35 * 0.35;
    for (std::size_t j = 0; j < p.sigma.size(); ++j) {
      const double s = p.sigma[j];
      worst = std::max(worst, std::abs(p.alpha[j] - k) / k);
      worst_e = std::max(worst_e, std::abs(p.energy[j] / (a2 * kPi * k * std::pow(s, 2 * k)) - 1));
      worst_i = std::max(worst_i, std::abs(p.moment[j] / (a2 * kPi * std::pow(s, 2 * k + 1)) - 1));
    }
    v.require(worst <= 0.02 && worst_e <= 0.02 && worst_i <= 0.02,
              "k=" + std::to_string(k) + " on sigma in [0.2, 0.4]: max rel error alpha " + fmt(worst) +
                  ", E " + fmt(worst_e) + ", I " + fmt(worst_i) + " (band 0.02)");
  }
}

void ac8_exact(Verdict& v) {
  const std::vector<std::pair<int, std::vector<double>>> cases{{1, {0.5, 0.25, 0.125}}, {2, {0.5, 0.25}}};
  for (const auto& [k, lambdas] : cases) {
    const auto m = fixtures::homogeneous(2 * kPi, k);
    const MapAnalysis map(*m.model, TargetSpace::euclidean(1), m.values);
    double worst = 0.0;
    for (double l : lambdas) worst = std::max(worst, homogeneity_deviation(blow_up(map, l), k));
    v.require(worst < 1e-3, "exact r^" + std::to_string(k) + " data: max deviation " + fmt(worst) +
                                " (band < 1e-3)");
  }
}

void ac9(Verdict& v) {
  const auto radii = log_radii(0.4, 2, 2);
  auto gap = [&](const MapAnalysis& a, const MapAnalysis& b) {
    const RadialProfile pa = radial_profile(a, ModelPoint{}, radii), pb = radial_profile(b, ModelPoint{}, radii);
    double g = std::abs(order_profile(pa).extrapolated - order_profile(pb).extrapolated);
    for (std::size_t j = 0; j < radii.size(); ++j) g = std::max(g, std::abs(pa.alpha[j] - pb.alpha[j]));
    g = std::max(g, std::abs(holder_fit(a, ModelPoint{}, 0.5).exponent -
                             holder_fit(b, ModelPoint{}, 0.5).exponent));
    return g;
  };
  {
    const auto m = fixtures::sphere_map();
    const TargetSpace s = TargetSpace::sphere(2);
    const double north[3] = {0, 0, 1};
    const BallConstraint ball{TargetPoint::vector(north), 0.7};
    std::vector<TargetPoint> rot;
    for (const TargetPoint& p : m.values) rot.push_back(fixtures::rotate(p, 1.1));
    const double g = gap(MapAnalysis(*m.model, s, m.values, ball),
                         MapAnalysis(*m.model, s, rot, BallConstraint{fixtures::rotate(ball.center, 1.1), 0.7}));
    v.require(g <= 1e-12, "sphere rotation: max change " + fmt(g) + " (band 1e-12)");
  }
  const auto m = fixtures::homogeneous(3 * kPi, 2.0 / 3.0, 0.3, 0.04);
  {
    const TargetSpace e = TargetSpace::euclidean(1);
    std::vector<TargetPoint> scaled, reflected;
    for (const TargetPoint& p : m.values) {
      scaled.push_back(TargetPoint::scalar(3.0 * p.x[0]));
      reflected.push_back(TargetPoint::scalar(0.2 - p.x[0]));
    }
    const MapAnalysis base(*m.model, e, m.values);
    const double g1 = gap(base, MapAnalysis(*m.model, e, scaled));
    const double g2 = gap(base, MapAnalysis(*m.model, e, reflected));
    v.require(g1 <= 1e-12, "real rescale x3: max change " + fmt(g1) + " (band 1e-12)");
    v.require(g2 <= 1e-12, "real reflection: max change " + fmt(g2) + " (band 1e-12)");
  }
  {
    std::vector<TargetPoint> a, b, c;
    for (const TargetPoint& p : m.values) {
      a.push_back(TargetPoint::scalar(0.5 + p.x[0]));
      b.push_back(TargetPoint::scalar(2.0 * (0.5 + p.x[0])));
      c.push_back(TargetPoint::scalar(1.0 - (0.5 + p.x[0])));
    }
    const TargetSpace arc = TargetSpace::arc(1.0), arc2 = TargetSpace::arc(2.0);
    const MapAnalysis base(*m.model, arc, a);
    const double g1 = gap(base, MapAnalysis(*m.model, arc2, b));
    const double g2 = gap(base, MapAnalysis(*m.model, arc, c));
    v.require(g1 <= 1e-12, "arc rescale x2: max change " + fmt(g1) + " (band 1e-12)");
    v.require(g2 <= 1e-12, "arc reversal: max change " + fmt(g2) + " (band 1e-12)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <configs dir> <work dir>\n";
    return 2;
  }
  const fs::path configs = argv[1], work = argv[2];
  fs::remove_all(work);
  std::map<std::string, Verdict> verdicts;
  auto guarded = [&](const std::string& id, const std::function<void(Verdict&)>& body) {
    try {
      body(verdicts[id]);
    } catch (const std::exception& e) {
      verdicts[id].require(false, std::string("error: ") + e.what());
    }
  };

  // Bundled experiments, each run twice for the determinism check.
  std::map<std::string, Run> runs;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(configs)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  guarded("AC10", [&](Verdict& v) {
    for (const fs::path& f : files) {
      const std::string name = f.stem().string();
      Run r;
      r.config = load_config(f);
      std::map<std::string, std::string> first;
      for (int pass = 0; pass < 2; ++pass) {
        const fs::path out = work / (name + (pass ? "_b" : "_a"));
        auto e = std::make_unique<Experiment>(r.config, out);
        const auto t0 = std::chrono::steady_clock::now();
        auto lines = run_experiment(*e);
        if (pass == 0) {
          r.seconds = seconds_since(t0);
          r.experiment = std::move(e);
          r.lines = std::move(lines);
          first = csv_files(out);
        } else {
          const auto second = csv_files(out);
          bool same = first == second && !first.empty();
          v.require(same, name + ": " + std::to_string(first.size()) + " CSV files " +
                              (same ? "byte-identical" : "differ"));
        }
      }
      runs[name] = std::move(r);
    }
  });

  guarded("AC1", [&](Verdict& v) {
    OracleOptions o;
    o.samples = 100000;
    const auto t0 = std::chrono::steady_clock::now();
    const OracleSuite suite = run_oracle_suite(o, work / "oracles");
    const double secs = seconds_since(t0);
    for (const OracleReport& r : suite.reports) {
      v.require(r.pass() && r.samples == o.samples,
                r.lemma + " " + std::to_string(r.violations) + "/" + std::to_string(r.samples));
    }
    long sweep_violations = 0;
    for (const QuadrilateralSweep& s : suite.sweeps) {
      for (long x : s.violations) sweep_violations += x;
    }
    v.require(sweep_violations == 0, "quadrilateral delta0 sweep violations " + std::to_string(sweep_violations));
    v.require(secs < 60.0, "runtime " + fmt(std::round(secs * 10) / 10) + " s (band < 60 s)");
    // The detector must see injected violations.
    OracleOptions adv = o;
    adv.samples = 2000;
    adv.adversarial = true;
    long caught = 0;
    for (const OracleReport& r : run_all_oracles(adv)) caught += r.violations;
    v.require(caught > 0, "adversarial self-test caught " + std::to_string(caught));
    // Scale families for AC2 come from the same suite.
    Verdict& v2 = verdicts["AC2"];
    for (const ScaleFamilyReport& f : suite.families) {
      v2.require(f.slope >= 2.8, to_string(f.family) + " slope " + fmt(f.slope) + " (band >= 2.8)");
    }
  });

  guarded("AC3", ac3);
  guarded("AC4", ac4);

  guarded("AC5", [&](Verdict& v) {
    v.require(!runs.empty(), std::to_string(runs.size()) + " bundled runs");
    for (const auto& [name, r] : runs) {
      const auto& m = r.experiment->monotonicity();
      v.require(m.has_value() && m->pass(),
                name + " worst " + (m ? fmt(m->worst_violation) : std::string("n/a")) + " (band 0.03)");
    }
  });

  guarded("AC6", [&](Verdict& v) {
    for (const char* name : {"cone_4pi", "cone_3pi"}) {
      const auto it = runs.find(name);
      v.require(it != runs.end(), std::string(name) + " present");
      if (it == runs.end()) continue;
      const Experiment& e = *it->second.experiment;
      const double alpha = e.order()->extrapolated;
      const double target = std::string(name) == "cone_4pi" ? 0.5 : 2.0 / 3.0;
      const double band = std::string(name) == "cone_4pi" ? 0.03 : 0.04;
      v.require(std::abs(alpha - target) <= band,
                std::string(name) + " alpha " + fmt(alpha) + " (band " + fmt(target) + " +- " + fmt(band) + ")");
      v.require(it->second.seconds < 300.0,
                std::string(name) + " runtime " + fmt(std::round(it->second.seconds * 10) / 10) + " s (band < 300 s)");
      if (std::string(name) == "cone_4pi") {
        const double l1 = e.eigen_real()->lambda1;
        v.require(std::abs(l1 - 0.25) <= 1e-3, "link lambda1 " + fmt(l1) + " (band 0.25 +- 1e-3)");
        const double pred = *e.predicted_alpha();
        const double rel = std::abs(e.holder()->exponent - pred) / pred;
        v.require(rel <= 0.07, "Holder " + fmt(e.holder()->exponent) + " vs predicted " + fmt(pred) +
                                   ", relative gap " + fmt(rel) + " (band 0.07)");
      }
    }
  });

  guarded("AC7", [&](Verdict& v) {
    for (const char* name : {"flat_disk_linear", "book3_arc"}) {
      const auto it = runs.find(name);
      v.require(it != runs.end() && it->second.experiment->holder().has_value(), std::string(name) + " present");
      if (it == runs.end()) continue;
      const double g = it->second.experiment->holder()->exponent;
      v.require(g >= 0.9 && g <= 1.1, std::string(name) + " gamma " + fmt(g) + " (band [0.9, 1.1])");
    }
  });

  guarded("AC8", [&](Verdict& v) {
    ac8_exact(v);
    const auto it = runs.find("cone_4pi");
    v.require(it != runs.end(), "cone_4pi present");
    if (it == runs.end()) return;
    const auto& dev = it->second.experiment->blowup_deviation();
    const auto& lambdas = it->second.config.analysis.blowup_lambdas;
    bool dec = dev.size() >= 3;
    std::string seq;
    for (std::size_t i = 0; i < dev.size(); ++i) {
      if (i > 0 && !(dev[i] < dev[i - 1])) dec = false;
      seq += (i ? ", " : "") + fmt(lambdas[i]) + " -> " + fmt(dev[i]);
    }
    v.require(dec, "cone_4pi deviation {" + seq + "} strictly decreasing over two octaves");
  });

  guarded("AC9", ac9);

  bool all = true;
  for (int i = 1; i <= 10; ++i) {
    const std::string id = "AC" + std::to_string(i);
    const Verdict& v = verdicts[id];
    all = all && v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << id << ": " << v.detail.str() << '\n';
  }
  return all ? 0 : 1;
}
