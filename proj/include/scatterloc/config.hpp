#pragma once

// Run configuration: a flat JSON object of keys, with command-line overrides.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scatterloc/analysis.hpp"
#include "scatterloc/errors.hpp"
#include "scatterloc/fock_lattice.hpp"
#include "scatterloc/scattering_kernel.hpp"

namespace scatterloc {

/// All settings of a run. Energies are in units of J unless J = 0; angles are radians; a = 1.
struct RunConfig {
  int M = 0;
  int N = 0;
  Boundary boundary = Boundary::Open;
  double U = 0.05;
  double J = 1.0;
  double gN = 0.1;
  double k0_a = kPi;
  Envelope envelope = Envelope::Uniform;
  double sigma_a = 0.2;
  int n_theta = 2048;
  std::int64_t n_events = 3000;
  std::int64_t n_traj = 1000;
  std::uint64_t master_seed = 1;
  std::int64_t n_bins = 600;
  std::string output_path = "out";
  std::int64_t snapshot_stride = 50;
  std::vector<double> uj_values;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  LatticeSpec lattice() const { return {M, N, boundary}; }
  HubbardParams hubbard() const { return {J, U}; }
  ScatteringSetup setup() const { return {k0_a, gN, envelope, sigma_a, n_theta}; }

  EnsembleOptions ensemble_options(unsigned threads = 0) const {
    EnsembleOptions o;
    o.n_traj = static_cast<std::size_t>(n_traj);
    o.n_events = static_cast<std::size_t>(n_events);
    o.master_seed = master_seed;
    o.n_bins = static_cast<std::size_t>(n_bins);
    o.threads = threads;
    return o;
  }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "M",      "N",       "boundary", "U",           "J",           "gN",          "k0_a",
      "envelope", "sigma_a", "n_theta", "n_events",   "n_traj",      "master_seed", "n_bins",
      "output_path", "snapshot_stride", "uj_values"};
  return keys;
}

namespace detail {

inline double finite_number(const std::string& key, const nlohmann::json& v) {
  if (!v.is_number()) throw ConfigError(key, "expected a number, got " + v.dump());
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
  return d;
}

inline std::int64_t integer(const std::string& key, const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw ConfigError(key, "expected an integer, got " + v.dump());
}

inline std::string text(const std::string& key, const nlohmann::json& v) {
  if (!v.is_string()) throw ConfigError(key, "expected a string, got " + v.dump());
  return v.get<std::string>();
}

inline double angle_value(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "pi") return kPi;
    throw ConfigError(key, "expected a number or \"pi\", got \"" + s + "\"");
  }
  return finite_number(key, v);
}

inline double ratio_value(const std::string& key, const nlohmann::json& v) {
  if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw ConfigError(key, "expected a number or \"inf\", got " + v.dump());
  const double d = v.get<double>();
  if (std::isnan(d)) throw ConfigError(key, "must not be NaN");
  return d;
}

}  // namespace detail

/// Sets one key. Unknown keys and ill-typed values are ConfigErrors naming the key.
inline void apply_config_value(RunConfig& c, const std::string& key, const nlohmann::json& v) {
  using namespace detail;
  if (key == "M") c.M = static_cast<int>(integer(key, v));
  else if (key == "N") c.N = static_cast<int>(integer(key, v));
  else if (key == "boundary") {
    const auto s = text(key, v);
    if (s == "open") c.boundary = Boundary::Open;
    else if (s == "periodic") c.boundary = Boundary::Periodic;
    else throw ConfigError(key, "expected \"open\" or \"periodic\", got \"" + s + "\"");
  } else if (key == "U") c.U = finite_number(key, v);
  else if (key == "J") c.J = finite_number(key, v);
  else if (key == "gN") c.gN = finite_number(key, v);
  else if (key == "k0_a") c.k0_a = angle_value(key, v);
  else if (key == "envelope") {
    const auto s = text(key, v);
    if (s == "uniform") c.envelope = Envelope::Uniform;
    else if (s == "gaussian") c.envelope = Envelope::Gaussian;
    else throw ConfigError(key, "expected \"uniform\" or \"gaussian\", got \"" + s + "\"");
  } else if (key == "sigma_a") c.sigma_a = finite_number(key, v);
  else if (key == "n_theta") c.n_theta = static_cast<int>(integer(key, v));
  else if (key == "n_events") c.n_events = integer(key, v);
  else if (key == "n_traj") c.n_traj = integer(key, v);
  else if (key == "master_seed") {
    if (v.is_number_unsigned()) c.master_seed = v.get<std::uint64_t>();
    else {
      const auto s = integer(key, v);
      if (s < 0) throw ConfigError(key, "must be >= 0");
      c.master_seed = static_cast<std::uint64_t>(s);
    }
  } else if (key == "n_bins") c.n_bins = integer(key, v);
  else if (key == "output_path") c.output_path = text(key, v);
  else if (key == "snapshot_stride") c.snapshot_stride = integer(key, v);
  else if (key == "uj_values") {
    if (!v.is_array()) throw ConfigError(key, "expected an array of U/J values");
    c.uj_values.clear();
    for (std::size_t i = 0; i < v.size(); ++i) c.uj_values.push_back(ratio_value(key + "[" + std::to_string(i) + "]", v[i]));
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
}

/// Checks every invariant before any computation starts.
inline void validate(const RunConfig& c) {
  if (c.M == 0) throw ConfigError("M", "missing required key");
  if (c.N == 0) throw ConfigError("N", "missing required key");
  c.lattice().validate();
  if (c.J < 0) throw ConfigError("J", "tunneling must be >= 0");
  if (c.J == 0 && c.U == 0) throw ConfigError("U", "U and J cannot both be zero (degenerate ground state)");
  c.setup().validate();
  if (c.n_events < 1) throw ConfigError("n_events", "must be >= 1");
  if (c.n_traj < 1) throw ConfigError("n_traj", "must be >= 1");
  if (c.n_bins < 1) throw ConfigError("n_bins", "must be >= 1");
  if (c.snapshot_stride < 1) throw ConfigError("snapshot_stride", "must be >= 1");
  if (c.output_path.empty()) throw ConfigError("output_path", "must not be empty");
  for (std::size_t i = 0; i < c.uj_values.size(); ++i)
    if (!(c.uj_values[i] >= 0)) throw ConfigError("uj_values[" + std::to_string(i) + "]", "U/J must be >= 0");
}

/// Parses a JSON config document and applies `overrides` (already-parsed key/value pairs) on top.
inline RunConfig parse_config(const nlohmann::json& doc,
                              const std::vector<std::pair<std::string, nlohmann::json>>& overrides = {}) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : doc.items()) apply_config_value(c, key, value);
  for (const auto& [key, value] : overrides) apply_config_value(c, key, value);
  validate(c);
  return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  try {
    return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", "malformed config file " + path + ": " + e.what());
  }
}

/// Turns `KEY=VALUE` into a key and a JSON value. VALUE is read as JSON when it
/// parses (numbers, arrays, quoted strings) and as a bare string otherwise.
inline std::pair<std::string, nlohmann::json> parse_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("", "override must look like KEY=VALUE: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  auto parsed = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) parsed = raw;
  return {key, parsed};
}

/// Every config value, in a form parse_config reads back to an equal RunConfig.
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["M"] = c.M;
  j["N"] = c.N;
  j["boundary"] = to_string(c.boundary);
  j["U"] = c.U;
  j["J"] = c.J;
  j["gN"] = c.gN;
  j["k0_a"] = c.k0_a;
  j["envelope"] = to_string(c.envelope);
  j["sigma_a"] = c.sigma_a;
  j["n_theta"] = c.n_theta;
  j["n_events"] = c.n_events;
  j["n_traj"] = c.n_traj;
  j["master_seed"] = c.master_seed;
  j["n_bins"] = c.n_bins;
  j["output_path"] = c.output_path;
  j["snapshot_stride"] = c.snapshot_stride;
  auto uj = nlohmann::json::array();
  for (double r : c.uj_values) {
    if (std::isinf(r)) uj.push_back("inf");
    else uj.push_back(r);
  }
  j["uj_values"] = uj;
  return j;
}

}  // namespace scatterloc
