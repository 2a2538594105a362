// Command-line driver: scatterloc {predict|trajectory|ensemble|sweep} [options]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scatterloc/scatterloc.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kAdmissibilityError = 3, kRuntimeError = 4 };

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::int64_t> traj;
  std::optional<std::int64_t> events;
  std::optional<std::int64_t> bins;
  std::vector<std::string> sets;
  unsigned threads = 0;
};

scatterloc::RunConfig resolve(const Flags& f) {
  using nlohmann::json;
  json doc = f.config_path.empty() ? json::object() : scatterloc::read_json_file(f.config_path);
  std::vector<std::pair<std::string, json>> overrides;
  for (const auto& s : f.sets) overrides.push_back(scatterloc::parse_override(s));
  if (f.seed) overrides.emplace_back("master_seed", *f.seed);
  if (f.out) overrides.emplace_back("output_path", *f.out);
  if (f.traj) overrides.emplace_back("n_traj", *f.traj);
  if (f.events) overrides.emplace_back("n_events", *f.events);
  if (f.bins) overrides.emplace_back("n_bins", *f.bins);
  return scatterloc::parse_config(doc, overrides);
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON config file");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--traj", f.traj, "number of trajectories");
  sub->add_option("--events", f.events, "detection events per trajectory");
  sub->add_option("--bins", f.bins, "angle histogram bins");
  sub->add_option("--set", f.sets, "override a config key, KEY=VALUE (repeatable)");
  sub->add_option("--threads", f.threads, "worker threads for ensembles (0: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic scattering-measurement simulator for bosons in a 1D lattice"};
  app.require_subcommand(1);
  Flags flags;
  auto* predict = app.add_subcommand("predict", "ground state, initial scatter density, class predictions");
  auto* trajectory = app.add_subcommand("trajectory", "one stochastic realization with per-event log");
  auto* ensemble = app.add_subcommand("ensemble", "many trajectories: class proportions and angle histogram");
  auto* sweep = app.add_subcommand("sweep", "one ensemble per U/J value in uj_values");
  for (auto* sub : {predict, trajectory, ensemble, sweep}) add_common(sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    const auto config = resolve(flags);
    scatterloc::CommandOutput out;
    if (predict->parsed()) out = scatterloc::cmd_predict(config);
    else if (trajectory->parsed()) out = scatterloc::cmd_trajectory(config);
    else if (ensemble->parsed()) out = scatterloc::cmd_ensemble(config, flags.threads);
    else out = scatterloc::cmd_sweep(config, flags.threads);
    for (const auto& [name, sum] : out.checksums) std::cout << config.output_path << "/" << name << "  " << sum << "\n";
    std::cout << config.output_path << "/manifest.json\n";
    return kOk;
  } catch (const scatterloc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const scatterloc::CapacityError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const scatterloc::CouplingTooStrong& e) {
    std::cerr << "admissibility error: " << e.what() << "\n";
    return kAdmissibilityError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
