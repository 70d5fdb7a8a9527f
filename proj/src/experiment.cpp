#include "polyharm/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "polyharm/csv.hpp"
#include "polyharm/mesh_io.hpp"

namespace polyharm {

using nlohmann::json;

namespace {

std::string band_text(const Band& b) { return "[" + fmt(b.lo) + ", " + fmt(b.hi) + "]"; }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(where + " must be a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw Error("unknown field " + where + "." + it.key());
  }
}

template <class T>
T get(const json& j, const std::string& where, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("field " + where + "." + key + " has the wrong type");
  }
}

Band get_band(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error("field " + where + " must be a [lo, hi] pair");
  }
  Band b{j[0].get<double>(), j[1].get<double>()};
  if (!(b.lo <= b.hi)) throw Error("field " + where + " has lo > hi");
  return b;
}

ModelPoint get_point(const json& j, const std::string& where) {
  check_keys(j, where, {"wedge", "rho", "phi", "z"});
  return ModelPoint{get<int>(j, where, "wedge", 0), get<double>(j, where, "rho", 0.0),
                    get<double>(j, where, "phi", 0.0), get<double>(j, where, "z", 0.0)};
}

void validate(const ExperimentConfig& c) {
  const LocalModel model = build_model(c.domain);
  if (!model.admissible()) throw Error("domain model is not admissible");
  if (!(c.domain.h > 0.0) || !(c.domain.h < c.domain.radius / 4.0)) {
    throw Error("domain.h must satisfy 0 < h < radius / 4");
  }
  build_metric(c.metric, c.domain.n);
  const TargetSpace space = build_target(c.target);
  if (!(c.ball_radius > 0.0 && c.ball_radius < kPi / 4.0)) {
    throw Error("ball.radius tau = " + fmt(c.ball_radius) +
                " violates the bound 0 < tau < pi/4 (about 0.785398)");
  }
  build_ball(c, space);
  if (c.analysis.holder) {
    model.check_point(c.analysis.holder_center);
    if (c.analysis.holder_pairs < 1000) throw Error("analysis.holder.pairs must be at least 1000");
  }
  for (double l : c.analysis.blowup_lambdas) {
    if (!(l > 0.0 && l < c.domain.radius)) throw Error("analysis.blowup lambdas must lie in (0, r)");
  }
  if (c.analysis.link && c.domain.n != 2) throw Error("analysis.link requires n = 2");
  if (c.trace.initial != "center" && c.trace.initial != "trace") {
    throw Error("trace.initial must be \"center\" or \"trace\"");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"schema_version", "name", "seed", "output_dir", "domain", "metric",
                           "target", "ball", "trace", "solver", "analysis", "acceptance"});
  if (!j.contains("schema_version") || j.at("schema_version") != kSchemaVersion) {
    throw Error("config.schema_version must be " + std::to_string(kSchemaVersion));
  }
  ExperimentConfig c;
  c.name = get<std::string>(j, "config", "name", c.name);
  c.seed = get<std::uint64_t>(j, "config", "seed", c.seed);
  c.output_dir = get<std::string>(j, "config", "output_dir", "");

  if (j.contains("domain")) {
    const json& d = j.at("domain");
    check_keys(d, "domain", {"model", "angle", "angle_pi", "pages", "n", "radius", "h", "grading"});
    DomainSpec& s = c.domain;
    s.model = get<std::string>(d, "domain", "model", s.model);
    s.angle = get<double>(d, "domain", "angle", s.angle);
    if (d.contains("angle_pi")) s.angle = get<double>(d, "domain", "angle_pi", 2.0) * kPi;
    s.pages = get<int>(d, "domain", "pages", s.pages);
    s.n = get<int>(d, "domain", "n", s.n);
    s.radius = get<double>(d, "domain", "radius", s.radius);
    s.h = get<double>(d, "domain", "h", s.h);
    s.grading = get<double>(d, "domain", "grading", s.grading);
  }
  if (j.contains("metric")) {
    const json& m = j.at("metric");
    check_keys(m, "metric", {"kind", "a", "ellipticity", "matrix"});
    c.metric.kind = get<std::string>(m, "metric", "kind", c.metric.kind);
    c.metric.a = get<double>(m, "metric", "a", c.metric.a);
    c.metric.ellipticity = get<double>(m, "metric", "ellipticity", c.metric.ellipticity);
    c.metric.matrix = get<std::vector<std::vector<double>>>(m, "metric", "matrix", {});
  }
  if (j.contains("target")) {
    const json& t = j.at("target");
    check_keys(t, "target", {"kind", "dim", "length", "legs"});
    c.target.kind = get<std::string>(t, "target", "kind", c.target.kind);
    c.target.dim = get<int>(t, "target", "dim", c.target.dim);
    c.target.length = get<double>(t, "target", "length", c.target.length);
    c.target.legs = get<int>(t, "target", "legs", c.target.legs);
  }
  if (j.contains("ball")) {
    const json& b = j.at("ball");
    check_keys(b, "ball", {"center", "radius"});
    c.ball_center = get<std::vector<double>>(b, "ball", "center", {});
    c.ball_radius = get<double>(b, "ball", "radius", c.ball_radius);
  }
  if (j.contains("trace")) {
    const json& t = j.at("trace");
    check_keys(t, "trace", {"kind", "amplitude", "direction", "coefficients", "cos", "sin", "sin2",
                            "quadratic", "initial"});
    TraceSpec& s = c.trace;
    s.kind = get<std::string>(t, "trace", "kind", s.kind);
    s.amplitude = get<double>(t, "trace", "amplitude", s.amplitude);
    s.direction = get<double>(t, "trace", "direction", s.direction);
    s.coefficients = get<std::vector<double>>(t, "trace", "coefficients", {});
    s.cos_coefficient = get<double>(t, "trace", "cos", s.cos_coefficient);
    s.sin_coefficients = get<std::vector<double>>(t, "trace", "sin", {});
    s.sin2_coefficients = get<std::vector<double>>(t, "trace", "sin2", {});
    s.quadratic = get<double>(t, "trace", "quadratic", s.quadratic);
    s.initial = get<std::string>(t, "trace", "initial", s.initial);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, "solver", {"tol", "max_sweeps", "omega"});
    c.solver.tol = get<double>(s, "solver", "tol", c.solver.tol);
    c.solver.max_sweeps = get<long>(s, "solver", "max_sweeps", c.solver.max_sweeps);
    c.solver.omega = get<double>(s, "solver", "omega", c.solver.omega);
  }
  if (j.contains("analysis")) {
    const json& a = j.at("analysis");
    check_keys(a, "analysis", {"profile", "monotonicity_tolerance", "holder", "blowup", "link"});
    AnalysisSpec& s = c.analysis;
    s.monotonicity_tolerance =
        get<double>(a, "analysis", "monotonicity_tolerance", s.monotonicity_tolerance);
    if (a.contains("profile")) {
      const json& p = a.at("profile");
      if (p.is_boolean()) {
        s.profile = p.get<bool>();
      } else {
        check_keys(p, "analysis.profile", {"sigma_max", "octaves", "per_octave"});
        s.sigma_max = get<double>(p, "analysis.profile", "sigma_max", s.sigma_max);
        s.octaves = get<int>(p, "analysis.profile", "octaves", s.octaves);
        s.per_octave = get<int>(p, "analysis.profile", "per_octave", s.per_octave);
      }
    }
    if (a.contains("holder")) {
      const json& h = a.at("holder");
      if (h.is_boolean()) {
        s.holder = h.get<bool>();
      } else {
        check_keys(h, "analysis.holder", {"policy", "center", "radius", "pairs"});
        const std::string policy = get<std::string>(h, "analysis.holder", "policy", "random");
        if (policy != "random" && policy != "anchored") {
          throw Error("analysis.holder.policy must be \"random\" or \"anchored\"");
        }
        s.holder_policy = policy == "random" ? PairPolicy::random : PairPolicy::anchored;
        if (h.contains("center")) s.holder_center = get_point(h.at("center"), "analysis.holder.center");
        s.holder_radius = get<double>(h, "analysis.holder", "radius", s.holder_radius);
        s.holder_pairs = get<long>(h, "analysis.holder", "pairs", s.holder_pairs);
      }
    }
    if (a.contains("blowup")) {
      const json& b = a.at("blowup");
      check_keys(b, "analysis.blowup", {"lambdas"});
      s.blowup_lambdas = get<std::vector<double>>(b, "analysis.blowup", "lambdas", {});
    }
    if (a.contains("link")) {
      const json& l = a.at("link");
      check_keys(l, "analysis.link", {"subdivision", "tripod", "tripod_subdivision", "restarts"});
      s.link = true;
      s.link_subdivision = get<int>(l, "analysis.link", "subdivision", s.link_subdivision);
      s.link_tripod = get<bool>(l, "analysis.link", "tripod", s.link_tripod);
      s.tripod_subdivision = get<int>(l, "analysis.link", "tripod_subdivision", s.tripod_subdivision);
      s.tripod_restarts = get<int>(l, "analysis.link", "restarts", s.tripod_restarts);
    }
  }
  if (j.contains("acceptance")) {
    const json& a = j.at("acceptance");
    check_keys(a, "acceptance", {"alpha", "holder", "lambda1", "prediction_rel",
                                 "blowup_decreasing", "tripod_below_real"});
    AcceptanceSpec& s = c.acceptance;
    if (a.contains("alpha")) s.alpha = get_band(a.at("alpha"), "acceptance.alpha");
    if (a.contains("holder")) s.holder = get_band(a.at("holder"), "acceptance.holder");
    if (a.contains("lambda1")) s.lambda1 = get_band(a.at("lambda1"), "acceptance.lambda1");
    if (a.contains("prediction_rel")) {
      s.prediction_rel = get<double>(a, "acceptance", "prediction_rel", 0.0);
    }
    s.blowup_decreasing = get<bool>(a, "acceptance", "blowup_decreasing", false);
    s.tripod_below_real = get<bool>(a, "acceptance", "tripod_below_real", false);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_text(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

LocalModel build_model(const DomainSpec& spec) {
  if (spec.n != 2 && spec.n != 3) throw Error("domain.n must be 2 or 3");
  if (spec.model == "cone") return LocalModel::cone(spec.angle, spec.n);
  if (spec.model == "book") return LocalModel::book(spec.pages, spec.n);
  if (spec.model == "sector") return LocalModel::sector(spec.angle, spec.n);
  throw Error("unknown domain.model \"" + spec.model + "\"");
}

MetricField build_metric(const MetricSpec& spec, int n) {
  if (spec.kind == "euclidean") return MetricField::euclidean(n);
  if (spec.kind == "conformal") return MetricField::conformal(n, spec.a, spec.ellipticity);
  if (spec.kind == "anisotropic") {
    const int k = static_cast<int>(spec.matrix.size());
    if (k != n) throw Error("metric.matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(spec.matrix[i].size()) != n) throw Error("metric.matrix rows have wrong length");
      for (int j = 0; j < n; ++j) m(i, j) = spec.matrix[i][j];
    }
    return MetricField::anisotropic(m);
  }
  throw Error("unknown metric.kind \"" + spec.kind + "\"");
}

TargetSpace build_target(const TargetSpec& spec) {
  if (spec.kind == "euclidean") return TargetSpace::euclidean(spec.dim);
  if (spec.kind == "arc") return TargetSpace::arc(spec.length);
  if (spec.kind == "sphere") return TargetSpace::sphere(spec.dim);
  if (spec.kind == "star") return TargetSpace::star(spec.legs, spec.length);
  throw Error("unknown target.kind \"" + spec.kind + "\"");
}

BallConstraint build_ball(const ExperimentConfig& config, const TargetSpace& space) {
  BallConstraint ball;
  ball.radius = config.ball_radius;
  if (space.kind() == TargetSpace::Kind::tree) {
    if (!config.ball_center.empty()) throw Error("ball.center is fixed at the branch point for star targets");
    ball.center = space.tree_node_point(0);
  } else if (!config.ball_center.empty()) {
    ball.center = TargetPoint::vector(config.ball_center);
  } else {
    std::vector<double> c(space.coordinate_count(), 0.0);
    if (space.kind() == TargetSpace::Kind::arc) c[0] = 0.5 * space.arc_length();
    if (space.kind() == TargetSpace::Kind::sphere) c.back() = 1.0;
    ball.center = TargetPoint::vector(c);
  }
  space.validate(ball.center);
  ball.validate();
  return ball;
}

TraceFunction make_trace(const TraceSpec& spec, const LocalModel& model, double radius,
                         const TargetSpace& space, const BallConstraint& ball) {
  const std::string& k = spec.kind;
  if (k != "linear" && k != "modes" && k != "page_modes" && k != "cap" && k != "constant") {
    throw Error("unknown trace.kind \"" + k + "\"");
  }
  if (k == "modes" && spec.coefficients.empty()) throw Error("trace.coefficients must not be empty");
  if (k == "page_modes") {
    const std::size_t pages = static_cast<std::size_t>(model.wedge_count());
    if (spec.sin_coefficients.size() != pages ||
        (!spec.sin2_coefficients.empty() && spec.sin2_coefficients.size() != pages)) {
      throw Error("trace.sin and trace.sin2 need one entry per page");
    }
  }
  double norm = 0.0;
  for (double c : spec.coefficients) norm += std::abs(c);

  // Planar field v(x) in the developed frame.
  auto field = [spec, model, radius, norm](const ModelPoint& p) -> std::array<double, 2> {
    const double s = p.rho / radius;
    const double psi = model.wedges()[p.wedge].offset + p.phi;
    const double a = spec.amplitude;
    if (spec.kind == "linear") return {a * s * std::cos(psi - spec.direction), 0.0};
    if (spec.kind == "modes") {
      double v = 0.0;
      for (std::size_t j = 0; j < spec.coefficients.size(); ++j) {
        const double lj = 2.0 * kPi * (j + 1) / model.total_angle();
        v += spec.coefficients[j] * std::pow(s, lj) * std::cos(lj * psi);
      }
      return {a * v / norm, 0.0};
    }
    if (spec.kind == "page_modes") {
      double v = spec.cos_coefficient * std::cos(p.phi) + spec.sin_coefficients[p.wedge] * std::sin(p.phi);
      v *= s;
      if (!spec.sin2_coefficients.empty()) v += s * s * spec.sin2_coefficients[p.wedge] * std::sin(2 * p.phi);
      return {a * v, 0.0};
    }
    if (spec.kind == "cap") {
      return {a * (s * std::cos(psi) + spec.quadratic * s * s * std::cos(2 * psi)),
              a * (s * std::sin(psi) + spec.quadratic * s * s * std::sin(2 * psi))};
    }
    return {0.0, 0.0};
  };

  switch (space.kind()) {
    case TargetSpace::Kind::euclidean:
      return [field, ball, dim = space.dimension()](const ModelPoint& p) {
        const auto v = field(p);
        TargetPoint out = ball.center;
        for (int i = 0; i < std::min(dim, 2); ++i) out.x[i] += v[i];
        return out;
      };
    case TargetSpace::Kind::arc:
      return [field, ball, len = space.arc_length()](const ModelPoint& p) {
        return TargetPoint::scalar(std::clamp(ball.center.x[0] + field(p)[0], 0.0, len));
      };
    case TargetSpace::Kind::sphere: {
      const int coords = space.coordinate_count();
      // Orthonormal tangent frame at the ball center.
      std::vector<std::array<double, kMaxTargetCoords>> basis;
      for (int e = 0; e < coords && basis.size() < 2; ++e) {
        std::array<double, kMaxTargetCoords> v{};
        v[e] = 1.0;
        auto sub = [&](const std::array<double, kMaxTargetCoords>& u) {
          double d = 0.0;
          for (int i = 0; i < coords; ++i) d += u[i] * v[i];
          for (int i = 0; i < coords; ++i) v[i] -= d * u[i];
        };
        sub(ball.center.x);
        for (const auto& b : basis) sub(b);
        double n2 = 0.0;
        for (int i = 0; i < coords; ++i) n2 += v[i] * v[i];
        if (n2 < 1e-6) continue;
        for (int i = 0; i < coords; ++i) v[i] /= std::sqrt(n2);
        basis.push_back(v);
      }
      return [field, ball, basis, coords](const ModelPoint& p) {
        const auto v = field(p);
        std::array<double, kMaxTargetCoords> t{};
        for (std::size_t b = 0; b < basis.size(); ++b) {
          for (int i = 0; i < coords; ++i) t[i] += v[b] * basis[b][i];
        }
        return sphere::exp(coords, ball.center, t);
      };
    }
    case TargetSpace::Kind::tree:
      return [field, len = space.tree_edge(0).length](const ModelPoint& p) {
        const double v = field(p)[0];
        return TargetPoint::on_edge(v >= 0.0 ? 0 : 1, std::min(std::abs(v), len));
      };
  }
  throw Error("unsupported target for traces");
}

std::string format_summary(std::span<const SummaryLine> lines) {
  std::ostringstream out;
  for (const SummaryLine& l : lines) {
    out << (l.pass ? "PASS " : "FAIL ") << l.check << ": " << l.text << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Experiment

Experiment::Experiment(ExperimentConfig config, std::filesystem::path out)
    : config_(std::move(config)), out_(std::move(out)), space_(build_target(config_.target)),
      ball_(build_ball(config_, space_)) {}

std::vector<SummaryLine> Experiment::solve() {
  const LocalModel model = build_model(config_.domain);
  mesh_ = std::make_unique<Mesh>(
      triangulate(model, config_.domain.radius, config_.domain.h, config_.domain.grading));
  energy_model_ =
      std::make_unique<EnergyModel>(*mesh_, build_metric(config_.metric, config_.domain.n));
  const TraceFunction trace = make_trace(config_.trace, mesh_->model(), config_.domain.radius,
                                         space_, ball_);
  std::vector<TargetPoint> initial = sample_map(*mesh_, space_, trace, ball_);
  if (config_.trace.initial == "center") {
    for (int v = 0; v < mesh_->vertex_count(); ++v) {
      if (!mesh_->vertices()[v].boundary) initial[v] = ball_.center;
    }
  }
  SolverOptions opts;
  opts.tol = config_.solver.tol;
  opts.max_sweeps = config_.solver.max_sweeps;
  opts.omega = config_.solver.omega;
  SolveResult res = minimize(*energy_model_, space_, std::move(initial), ball_, opts);
  values_ = std::move(res.values);
  energy_ = std::move(res.report);

  write_mesh(out_ / "mesh.txt", *mesh_);
  write_checkpoint(out_ / "checkpoint.txt", space_, values_, energy_.sweeps);
  CsvTable summary({"quantity", "value"});
  summary.row({"vertices", std::to_string(mesh_->vertex_count())})
      .row({"simplices", std::to_string(mesh_->simplex_count())})
      .row({"total_energy", fmt(energy_.total)})
      .row({"sweeps", std::to_string(energy_.sweeps)})
      .row({"max_move", fmt(energy_.max_move)})
      .row({"converged", energy_.converged ? "1" : "0"})
      .row({"monotone", energy_.monotone ? "1" : "0"})
      .row({"fallback_updates", std::to_string(energy_.fallback_updates)})
      .row({"negative_weights", std::to_string(energy_model_->negative_weight_count())});
  summary.write(out_ / "energy.csv");
  CsvTable history({"entry", "energy"});
  for (std::size_t i = 0; i < energy_.history.size(); ++i) {
    history.row({std::to_string(i), fmt(energy_.history[i])});
  }
  history.write(out_ / "energy_history.csv");

  std::vector<SummaryLine> lines;
  lines.push_back({"solver converged", energy_.converged,
                   "sweeps = " + std::to_string(energy_.sweeps) + ", max move = " +
                       fmt(energy_.max_move) + ", band: max move < tol = " + fmt(config_.solver.tol)});
  lines.push_back({"energy monotone", energy_.monotone,
                   "energy history nonincreasing per sweep, band: relative increase <= 1e-12"});
  return lines;
}

void Experiment::ensure_solution() {
  if (mesh_) return;
  const std::filesystem::path mesh_path = out_ / "mesh.txt", ckpt = out_ / "checkpoint.txt";
  if (!std::filesystem::exists(mesh_path) || !std::filesystem::exists(ckpt)) {
    throw Error("no solution in " + out_.string() + "; run solve first");
  }
  mesh_ = std::make_unique<Mesh>(read_mesh(mesh_path));
  energy_model_ =
      std::make_unique<EnergyModel>(*mesh_, build_metric(config_.metric, config_.domain.n));
  long sweeps = 0;
  values_ = read_checkpoint(ckpt, space_, &sweeps);
  if (static_cast<int>(values_.size()) != mesh_->vertex_count()) {
    throw Error("checkpoint does not match the mesh");
  }
  energy_ = total_energy(*energy_model_, space_, values_);
  energy_.sweeps = sweeps;
}

std::vector<SummaryLine> Experiment::analyze() {
  ensure_solution();
  const AnalysisSpec& a = config_.analysis;
  const AcceptanceSpec& acc = config_.acceptance;
  const int n = config_.domain.n;
  MapAnalysis map(*energy_model_, space_, values_, ball_);
  std::vector<SummaryLine> lines;

  double alpha_hat = 1.0;
  if (a.profile) {
    const std::vector<double> radii = log_radii(a.sigma_max, a.octaves, a.per_octave);
    profile_ = radial_profile(map, ModelPoint{}, radii);
    order_ = order_profile(*profile_);
    std::vector<std::string> header{"sigma", "energy", "moment", "alpha"};
    const int qc = space_.coordinate_count();
    if (space_.kind() == TargetSpace::Kind::tree) header.push_back("q_edge");
    for (int c = 0; c < qc; ++c) header.push_back("q" + std::to_string(c));
    CsvTable t(header);
    for (std::size_t j = 0; j < profile_->sigma.size(); ++j) {
      std::vector<std::string> row{fmt(profile_->sigma[j]), fmt(profile_->energy[j]),
                                   fmt(profile_->moment[j]), fmt(profile_->alpha[j])};
      if (space_.kind() == TargetSpace::Kind::tree) row.push_back(std::to_string(profile_->q[j].edge));
      for (int c = 0; c < qc; ++c) row.push_back(fmt(profile_->q[j].x[c]));
      t.row(row);
    }
    t.write(out_ / "profile.csv");
    CsvTable o({"alpha_min_sigma", "alpha_extrapolated", "uncertainty", "infinite"});
    o.row({fmt(order_->alpha_min_sigma), fmt(order_->extrapolated), fmt(order_->uncertainty),
           order_->infinite ? "1" : "0"});
    o.write(out_ / "order.csv");

    if (order_->infinite) {
      lines.push_back({"order finite", false, "sphere values constant at some radius"});
    } else {
      alpha_hat = order_->extrapolated;
      if (acc.alpha) {
        lines.push_back({"order alpha", acc.alpha->contains(alpha_hat),
                         "alpha = " + fmt(alpha_hat) + " +- " + fmt(order_->uncertainty) +
                             ", band " + band_text(*acc.alpha)});
      }
      const double q = n - 2 + 2.0 * alpha_hat;
      monotonicity_ = monotonicity_check(*profile_, q, a.monotonicity_tolerance);
      CsvTable m({"exponent", "octaves", "worst_violation", "tolerance", "pass"});
      m.row({fmt(q), std::to_string(monotonicity_->octaves), fmt(monotonicity_->worst_violation),
             fmt(monotonicity_->tolerance), monotonicity_->pass() ? "1" : "0"});
      m.write(out_ / "monotonicity.csv");
      lines.push_back({"monotonicity", monotonicity_->pass(),
                       "worst decrease of E/sigma^q per octave = " +
                           fmt(monotonicity_->worst_violation) + " with q = n-2+2alpha = " + fmt(q) +
                           ", band [0, " + fmt(a.monotonicity_tolerance) + "]"});
    }
  }

  if (a.holder) {
    HolderOptions ho;
    ho.policy = a.holder_policy;
    ho.pairs = a.holder_pairs;
    ho.seed = config_.seed;
    holder_ = holder_fit(map, a.holder_center, a.holder_radius, ho);
    CsvTable t({"policy", "center_wedge", "center_rho", "center_phi", "radius", "pairs", "bins_used",
                "exponent", "constant", "residual", "valid"});
    t.row({to_string(holder_->policy), std::to_string(a.holder_center.wedge),
           fmt(a.holder_center.rho), fmt(a.holder_center.phi), fmt(a.holder_radius),
           std::to_string(holder_->pairs), std::to_string(holder_->bins_used),
           fmt(holder_->exponent), fmt(holder_->constant), fmt(holder_->residual),
           holder_->valid ? "1" : "0"});
    t.write(out_ / "holder.csv");
    if (acc.holder) {
      lines.push_back({"holder exponent", holder_->valid && acc.holder->contains(holder_->exponent),
                       "gamma = " + fmt(holder_->exponent) + " (residual " + fmt(holder_->residual) +
                           ", " + to_string(holder_->policy) + " pairs), band " +
                           band_text(*acc.holder)});
    }
  }

  if (!a.blowup_lambdas.empty()) {
    std::vector<BlowUpFrame> frames;
    for (double l : a.blowup_lambdas) frames.push_back(blow_up(map, l));
    blowup_deviation_ = homogeneity_check(frames, alpha_hat);
    CsvTable t({"lambda", "moment", "mu", "alpha", "deviation", "degenerate"});
    for (std::size_t i = 0; i < frames.size(); ++i) {
      t.row({fmt(frames[i].lambda), fmt(frames[i].moment), fmt(frames[i].mu), fmt(alpha_hat),
             fmt(blowup_deviation_[i]), frames[i].degenerate ? "1" : "0"});
    }
    t.write(out_ / "blowup.csv");
    if (acc.blowup_decreasing) {
      bool dec = true;
      std::string seq;
      for (std::size_t i = 0; i < blowup_deviation_.size(); ++i) {
        if (i > 0 && !(blowup_deviation_[i] < blowup_deviation_[i - 1])) dec = false;
        seq += (i ? ", " : "") + fmt(blowup_deviation_[i]);
      }
      lines.push_back({"blow-up homogeneity", dec,
                       "deviation per lambda {" + seq + "}, band: strictly decreasing as lambda halves"});
    }
  }
  return lines;
}

std::vector<SummaryLine> Experiment::link() {
  const AnalysisSpec& a = config_.analysis;
  std::vector<SummaryLine> lines;
  if (!a.link) return lines;
  const LocalModel model = build_model(config_.domain);
  const LinkGraph g = extract_link(model, build_metric(config_.metric, config_.domain.n));
  EigenOptions eo;
  eo.subdivision = a.link_subdivision;
  eo.seed = config_.seed;
  eigen_real_ = lambda1_real(g, eo);
  if (a.link_tripod) {
    EigenOptions to = eo;
    to.subdivision = a.tripod_subdivision;
    to.restarts = a.tripod_restarts;
    eigen_tripod_ = lambda1_tripod(g, to);
  }
  CsvTable t({"link", "target", "subdivision", "lambda1", "trend", "predicted_alpha", "lipschitz",
              "spread", "converged"});
  auto add = [&](const EigenResult& r) {
    std::string trend;
    for (std::size_t i = 0; i < r.trend.size(); ++i) trend += (i ? ";" : "") + fmt(r.trend[i]);
    const ExponentPrediction p = predicted_exponent(r.lambda1, config_.domain.n, 0);
    t.row({g.description, to_string(r.target), std::to_string(r.subdivision), fmt(r.lambda1), trend,
           fmt(p.alpha), p.lipschitz ? "1" : "0", fmt(r.spread), r.converged ? "1" : "0"});
  };
  add(*eigen_real_);
  if (eigen_tripod_) add(*eigen_tripod_);
  t.write(out_ / "eigen.csv");
  if (config_.acceptance.lambda1) {
    lines.push_back({"link lambda1", config_.acceptance.lambda1->contains(eigen_real_->lambda1),
                     "lambda1 = " + fmt(eigen_real_->lambda1) + " (real target, subdivision " +
                         std::to_string(eigen_real_->subdivision) + "), band " +
                         band_text(*config_.acceptance.lambda1)});
  }
  if (config_.acceptance.tripod_below_real && eigen_tripod_) {
    const bool ok = eigen_tripod_->lambda1 <= eigen_real_->lambda1 + 1e-9;
    lines.push_back({"tripod below real", ok,
                     "tripod lambda1 = " + fmt(eigen_tripod_->lambda1) + " vs real " +
                         fmt(eigen_real_->lambda1) + ", band: tripod <= real + 1e-9"});
  }
  return lines;
}

std::optional<double> Experiment::predicted_alpha() const {
  if (!eigen_real_) return std::nullopt;
  return predicted_exponent(eigen_real_->lambda1, config_.domain.n, 0).alpha;
}

std::vector<SummaryLine> Experiment::report(std::vector<SummaryLine> lines) {
  const AcceptanceSpec& acc = config_.acceptance;
  if (acc.prediction_rel) {
    const std::optional<double> pred = predicted_alpha();
    if (!pred || !holder_) {
      lines.push_back({"exponent prediction", false, "needs both a link eigenvalue and a Holder fit"});
    } else {
      const double rel = std::abs(holder_->exponent - *pred) / *pred;
      lines.push_back({"exponent prediction", rel <= *acc.prediction_rel,
                       "measured gamma = " + fmt(holder_->exponent) + " vs predicted alpha = " +
                           fmt(*pred) + ", relative gap " + fmt(rel) + ", band [0, " +
                           fmt(*acc.prediction_rel) + "]"});
    }
  }
  write_text(out_ / "summary.txt", format_summary(lines));
  return lines;
}

std::vector<SummaryLine> run_experiment(Experiment& experiment) {
  std::vector<SummaryLine> lines = experiment.solve();
  for (auto& l : experiment.analyze()) lines.push_back(std::move(l));
  for (auto& l : experiment.link()) lines.push_back(std::move(l));
  return experiment.report(std::move(lines));
}

// ---------------------------------------------------------------------------
// Oracles

bool OracleSuite::pass() const {
  return std::all_of(summary.begin(), summary.end(), [](const SummaryLine& l) { return l.pass; });
}

OracleSuite run_oracle_suite(const OracleOptions& options, const std::filesystem::path& out) {
  OracleSuite suite;
  suite.reports = run_all_oracles(options);
  const std::vector<double> eps{0.001, 0.01, 0.1};
  const std::vector<double> deltas{0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
  OracleOptions sweep_opts = options;
  sweep_opts.samples = std::min<long>(options.samples, 20000);
  suite.sweeps = sweep_quadrilateral(eps, deltas, sweep_opts);
  const std::vector<double> hs{0.1, 0.05, 0.025};
  for (EstimateFamily f : {EstimateFamily::estimate_equal_eta, EstimateFamily::estimate_linear_gap,
                           EstimateFamily::tri1_linear}) {
    suite.families.push_back(run_scale_family(f, hs, 2000, options.seed));
  }

  std::string csv = oracle_csv_header() + "\n";
  for (const OracleReport& r : suite.reports) csv += oracle_csv_row(r) + "\n";
  write_text(out / "oracles.csv", csv);
  CsvTable sw({"eps0", "delta0", "violations", "threshold"});
  for (const QuadrilateralSweep& s : suite.sweeps) {
    for (std::size_t i = 0; i < s.delta0.size(); ++i) {
      sw.row({fmt(s.eps0), fmt(s.delta0[i]), std::to_string(s.violations[i]), fmt(s.threshold)});
    }
  }
  sw.write(out / "quadrilateral_sweep.csv");
  CsvTable fam({"family", "h", "envelope", "worst_margin", "slope", "cubic_constant"});
  for (const ScaleFamilyReport& f : suite.families) {
    for (std::size_t i = 0; i < f.h.size(); ++i) {
      fam.row({to_string(f.family), fmt(f.h[i]), fmt(f.envelope[i]), fmt(f.worst_margin[i]),
               fmt(f.slope), fmt(f.cubic_constant)});
    }
  }
  fam.write(out / "scale_families.csv");

  for (const OracleReport& r : suite.reports) {
    std::string text = std::to_string(r.violations) + " violations in " + std::to_string(r.samples) +
                       " samples, worst margin " + fmt(r.worst_margin) + ", band: 0 violations at tol " +
                       fmt(kViolationTol);
    if (r.vacuous()) text += " (vacuous: no samples)";
    suite.summary.push_back({r.lemma, r.pass(), text});
  }
  // Thresholds should not shrink when more slack is allowed.
  bool monotone = true;
  for (std::size_t i = 1; i < suite.sweeps.size(); ++i) {
    if (suite.sweeps[i].threshold < suite.sweeps[i - 1].threshold) monotone = false;
  }
  std::string thr;
  for (const QuadrilateralSweep& s : suite.sweeps) {
    thr += (thr.empty() ? "" : ", ") + fmt(s.eps0) + " -> " + fmt(s.threshold);
  }
  suite.summary.push_back({"quadrilateral threshold", monotone,
                           "empirical delta0(eps0) {" + thr + "}, band: nondecreasing in eps0"});
  for (const ScaleFamilyReport& f : suite.families) {
    suite.summary.push_back({"scale family " + to_string(f.family), f.slope >= 2.8,
                             "log-log slope " + fmt(f.slope) + " over h = 0.1, 0.05, 0.025, band [2.8, inf)"});
  }
  return suite;
}

std::filesystem::path resolve_output(const ExperimentConfig& config, const std::string& flag) {
  const char* env = std::getenv("POLYHARM_OUT");
  const std::filesystem::path root = env && *env ? std::filesystem::path(env) : std::filesystem::path("out");
  if (!config.output_dir.empty()) {
    const std::filesystem::path p(config.output_dir);
    return p.is_absolute() ? p : root / p;
  }
  if (!flag.empty()) return flag;
  return root / config.name;
}

}  // namespace polyharm
