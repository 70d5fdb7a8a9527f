// Command-line front end: solve, analyze, link, report, run and oracles.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

#include "polyharm/csv.hpp"
#include "polyharm/experiment.hpp"

using namespace polyharm;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<double> h, grading, tol, omega;
  std::optional<long> max_sweeps;
  std::optional<std::uint64_t> seed;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory when the config has none");
  cmd->add_option("--mesh-size", o.h, "mesh size when the config has none");
  cmd->add_option("--grading", o.grading, "radial grading when the config has none");
  cmd->add_option("--seed", o.seed, "seed when the config has none");
  cmd->add_option("--tol", o.tol, "solver tolerance when the config has none");
  cmd->add_option("--max-sweeps", o.max_sweeps, "solver sweep limit when the config has none");
  cmd->add_option("--omega", o.omega, "relaxation factor when the config has none");
}

// Flags only fill fields that the config file leaves unset.
ExperimentConfig load_with_overrides(const Overrides& o) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(o.config));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(o.config + ": config is not valid JSON: " + e.what());
  }
  auto fill = [&](const char* section, const char* key, const auto& value) {
    if (!value) return;
    nlohmann::json& s = section ? j[section] : j;
    if (!s.contains(key)) s[key] = *value;
  };
  fill("domain", "h", o.h);
  fill("domain", "grading", o.grading);
  fill(nullptr, "seed", o.seed);
  fill("solver", "tol", o.tol);
  fill("solver", "max_sweeps", o.max_sweeps);
  fill("solver", "omega", o.omega);
  try {
    return parse_config(j.dump());
  } catch (const Error& e) {
    throw Error(o.config + ": " + e.what());
  }
}

int finish(const std::vector<SummaryLine>& lines) {
  std::cout << format_summary(lines);
  for (const SummaryLine& l : lines) {
    if (!l.pass) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polyharm: discrete harmonic maps from singular domains into curved targets"};
  app.require_subcommand(1);

  Overrides o;
  std::vector<std::pair<std::string, CLI::App*>> stages;
  for (const char* verb : {"solve", "analyze", "link", "report", "run"}) {
    const char* help = std::string(verb) == "solve"     ? "mesh and minimize the energy"
                       : std::string(verb) == "analyze" ? "order, monotonicity, Holder and blow-up analytics"
                       : std::string(verb) == "link"    ? "first eigenvalue of the link at the origin"
                       : std::string(verb) == "report"  ? "analytics, link and acceptance summary from a solved run"
                                                        : "solve, analyze, link and report";
    CLI::App* cmd = app.add_subcommand(verb, help);
    add_config_flags(cmd, o);
    stages.emplace_back(verb, cmd);
  }

  OracleOptions oracle_opts;
  std::string oracle_out = "out/oracles";
  CLI::App* oracles = app.add_subcommand("oracles", "run the comparison inequality oracles");
  oracles->add_option("--seed", oracle_opts.seed, "root seed");
  oracles->add_option("--samples", oracle_opts.samples, "samples per oracle")->check(CLI::NonNegativeNumber);
  oracles->add_flag("--adversarial", oracle_opts.adversarial, "shift every bound by -1e-3");
  oracles->add_option("--out", oracle_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (oracles->parsed()) {
      const char* env = std::getenv("POLYHARM_OUT");
      if (oracles->count("--out") == 0 && env && *env) oracle_out = std::string(env) + "/oracles";
      const OracleSuite suite = run_oracle_suite(oracle_opts, oracle_out);
      return finish(suite.summary);
    }
    for (const auto& [verb, cmd] : stages) {
      if (!cmd->parsed()) continue;
      const ExperimentConfig config = load_with_overrides(o);
      Experiment e(config, resolve_output(config, o.out));
      if (verb == "solve") return finish(e.solve());
      if (verb == "analyze") return finish(e.analyze());
      if (verb == "link") return finish(e.link());
      if (verb == "report") {
        std::vector<SummaryLine> lines = e.analyze();
        for (auto& l : e.link()) lines.push_back(std::move(l));
        return finish(e.report(std::move(lines)));
      }
      return finish(run_experiment(e));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
