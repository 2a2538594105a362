#pragma once

// The predict / trajectory / ensemble / sweep commands. Each writes CSV files
// plus manifest.json into config.output_path.

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "scatterloc/analysis.hpp"
#include "scatterloc/config.hpp"
#include "scatterloc/io.hpp"
#include "scatterloc/version.hpp"

namespace scatterloc {

/// Files written by a command and a JSON summary for the manifest.
struct CommandOutput {
  std::map<std::string, std::string> checksums;  // file name -> fnv1a64
  nlohmann::json summary = nlohmann::json::object();
};

namespace detail {

inline std::filesystem::path prepare_output_dir(const RunConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_path, ec);
  if (ec) throw IoError("cannot create output directory " + c.output_path + ": " + ec.message());
  return c.output_path;
}

inline void emit(CommandOutput& out, const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  write_atomic(dir / name, text);
  out.checksums[name] = hex64(fnv1a64(text));
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& command, const RunConfig& c,
                           const CommandOutput& out) {
  nlohmann::json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["config"] = to_json(c);
  m["checksums"] = out.checksums;
  m["checksum_algorithm"] = "fnv1a64";
  m["summary"] = out.summary;
  write_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

inline std::string join_labels(const FockBasis& basis, const std::vector<std::size_t>& members) {
  std::string s;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) s += ';';
    s += state_label(basis[members[i]]);
  }
  return s;
}

inline std::string join_signature(const Signature& sig) {
  std::string s;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(sig[i]);
  }
  return s;
}

inline std::string ratio_text(double r) { return std::isinf(r) ? "inf" : format_double(r); }

inline std::vector<std::string> class_columns(const std::string& prefix, std::size_t k) {
  std::vector<std::string> cols;
  for (std::size_t i = 1; i <= k; ++i) cols.push_back(prefix + std::to_string(i));
  return cols;
}

}  // namespace detail

/// Ground state, energy spectrum, initial scatter density and class predictions.
inline CommandOutput cmd_predict(const RunConfig& c) {
  validate(c);
  const auto ex = Experiment::prepare(c.lattice(), c.hubbard(), c.setup());
  const auto dir = detail::prepare_output_dir(c);
  CommandOutput out;
  const FockBasis& basis = *ex.basis;
  const auto lookup = class_lookup(ex.classes, basis.size());

  {
    CsvBuilder csv({"level", "energy"});
    const auto evals = spectrum(build_hamiltonian(basis, c.hubbard()));
    for (Eigen::Index i = 0; i < evals.size(); ++i) csv.row({std::to_string(i), format_double(evals(i))});
    detail::emit(out, dir, "spectrum.csv", csv.str());
  }
  {
    std::vector<std::string> header{"index", "state"};
    for (int j = 1; j <= c.M; ++j) header.push_back("n_" + std::to_string(j));
    for (const char* h : {"re", "im", "probability", "class"}) header.emplace_back(h);
    CsvBuilder csv(header);
    for (std::size_t u = 0; u < basis.size(); ++u) {
      std::vector<std::string> row{std::to_string(u), state_label(basis[u])};
      for (int n : basis[u]) row.push_back(std::to_string(n));
      row.push_back(format_double(ex.ground[u].real()));
      row.push_back(format_double(ex.ground[u].imag()));
      row.push_back(format_double(ex.ground.probability(u)));
      row.push_back(std::to_string(lookup[u] + 1));
      csv.row(row);
    }
    detail::emit(out, dir, "ground_state.csv", csv.str());
  }
  {
    const auto density = scatter_density(ex.ground, *ex.table);
    const double total = quadrature(density, ex.table->step());
    CsvBuilder csv({"theta", "density", "conditional_density"});
    for (std::size_t i = 0; i < density.size(); ++i)
      csv.row({format_double(ex.table->theta()[i]), format_double(density[i]),
               format_double(total > 0 ? density[i] / total : 0.0)});
    detail::emit(out, dir, "scatter_density.csv", csv.str());
    out.summary["scatter_probability"] = total;
    out.summary["nonscatter_probability"] = nonscatter_prob(ex.ground, *ex.table);
  }
  {
    const auto probs = class_probabilities_initial(ex.ground, ex.classes);
    CsvBuilder csv({"class", "signature", "members", "size", "predicted_probability"});
    for (std::size_t k = 0; k < ex.classes.size(); ++k)
      csv.row({std::to_string(k + 1), detail::join_signature(ex.classes[k].signature),
               detail::join_labels(basis, ex.classes[k].members), std::to_string(ex.classes[k].members.size()),
               format_double(probs[k])});
    detail::emit(out, dir, "classes.csv", csv.str());
  }
  out.summary["ground_energy"] = ex.ground_energy;
  out.summary["basis_dimension"] = basis.size();
  out.summary["n_classes"] = ex.classes.size();
  detail::write_manifest(dir, "predict", c, out);
  return out;
}

/// A single realization seeded with master_seed: per-event log and coefficient snapshots.
inline CommandOutput cmd_trajectory(const RunConfig& c) {
  validate(c);
  const auto ex = Experiment::prepare(c.lattice(), c.hubbard(), c.setup());
  const auto dir = detail::prepare_output_dir(c);
  const FockBasis& basis = *ex.basis;
  const auto stride = static_cast<std::size_t>(c.snapshot_stride);
  const auto n_events = static_cast<std::size_t>(c.n_events);

  std::vector<std::string> ev_header{"m", "kind", "theta", "overlap_sq"};
  for (auto& col : detail::class_columns("w_", ex.classes.size())) ev_header.push_back(col);
  CsvBuilder events(ev_header);
  std::vector<std::string> snap_header{"m"};
  for (const auto& s : basis.states()) snap_header.push_back("p_" + state_label(s));
  CsvBuilder snaps(snap_header);

  auto snapshot = [&](std::size_t m, const ManyBodyState& s) {
    std::vector<std::string> row{std::to_string(m)};
    for (std::size_t u = 0; u < s.size(); ++u) row.push_back(format_double(s.probability(u)));
    snaps.row(row);
  };
  auto event_row = [&](std::size_t m, const char* kind, const std::string& theta, const ManyBodyState& s) {
    std::vector<std::string> row{std::to_string(m), kind, theta, format_double(std::norm(overlap(ex.ground, s)))};
    for (double w : class_weights(s, ex.classes)) row.push_back(format_double(w));
    events.row(row);
  };

  event_row(0, "initial", "", ex.ground);
  snapshot(0, ex.ground);
  TrajectoryOptions topt;
  topt.record_overlap = false;
  const auto rec = run_trajectory(ex.ground, n_events, *ex.table, ex.classes, c.master_seed, topt,
                                  [&](std::size_t m, const ManyBodyState& s, const DetectionEvent& ev) {
                                    event_row(m, ev.scattered() ? "scatter" : "nonscatter",
                                              ev.scattered() ? format_double(ev.theta) : std::string{}, s);
                                    if (m % stride == 0 || m == n_events) snapshot(m, s);
                                  });

  CommandOutput out;
  detail::emit(out, dir, "events.csv", events.str());
  detail::emit(out, dir, "snapshots.csv", snaps.str());
  out.summary["seed"] = rec.seed;
  out.summary["events_done"] = rec.n_events_done;
  out.summary["n_scatter"] = rec.n_scatter;
  out.summary["converged"] = rec.converged;
  out.summary["aborted"] = rec.aborted;
  out.summary["final_class"] = rec.final_class() + 1;
  out.summary["final_class_weights"] = rec.class_weights_final;
  out.summary["settle_event"] = rec.settle_event ? nlohmann::json(*rec.settle_event) : nlohmann::json(nullptr);
  out.summary["ground_energy"] = ex.ground_energy;
  detail::write_manifest(dir, "trajectory", c, out);
  return out;
}

namespace detail {

inline void emit_ensemble(CommandOutput& out, const std::filesystem::path& dir, const Experiment& ex,
                          const EnsembleStats& st) {
  {
    CsvBuilder csv({"class", "signature", "members", "count", "empirical", "predicted", "sigma"});
    for (std::size_t k = 0; k < ex.classes.size(); ++k)
      csv.row({std::to_string(k + 1), join_signature(ex.classes[k].signature), join_labels(*ex.basis, ex.classes[k].members),
               std::to_string(st.class_counts[k]), format_double(st.class_proportions[k]),
               format_double(st.class_proportions_predicted[k]), format_double(st.proportion_sigma(k))});
    emit(out, dir, "class_proportions.csv", csv.str());
  }
  {
    CsvBuilder csv({"bin_center", "count", "predicted_density", "predicted_count"});
    for (std::size_t b = 0; b < st.histogram.size(); ++b)
      csv.row({format_double(bin_center(b, st.histogram.size())), std::to_string(st.histogram[b]),
               format_double(st.density_predicted[b]),
               format_double(st.histogram_predicted[b] * static_cast<double>(st.total_scatter))});
    emit(out, dir, "histogram.csv", csv.str());
  }
  {
    CsvBuilder csv({"n_traj", "n_events", "n_converged", "n_aborted", "convergence_rate", "total_scatter",
                    "mean_settle_event", "histogram_l1"});
    csv.row({std::to_string(st.n_traj), std::to_string(st.n_events), std::to_string(st.n_converged),
             std::to_string(st.n_aborted), format_double(st.convergence_rate), std::to_string(st.total_scatter),
             format_double(st.mean_settle_event), format_double(st.histogram_l1())});
    emit(out, dir, "convergence.csv", csv.str());
  }
  out.summary["n_converged"] = st.n_converged;
  out.summary["n_aborted"] = st.n_aborted;
  out.summary["total_scatter"] = st.total_scatter;
  out.summary["ground_energy"] = ex.ground_energy;
}

}  // namespace detail

/// n_traj trajectories from the ground state: class proportions, angle histogram, convergence.
inline CommandOutput cmd_ensemble(const RunConfig& c, unsigned threads = 0) {
  validate(c);
  const auto ex = Experiment::prepare(c.lattice(), c.hubbard(), c.setup());
  const auto dir = detail::prepare_output_dir(c);
  const auto st = run_ensemble(ex.ground, *ex.table, ex.classes, c.ensemble_options(threads));
  CommandOutput out;
  detail::emit_ensemble(out, dir, ex, st);
  detail::write_manifest(dir, "ensemble", c, out);
  return out;
}

/// One ensemble per entry of uj_values (J = 1, U = value; "inf" is J = 0).
inline CommandOutput cmd_sweep(const RunConfig& c, unsigned threads = 0) {
  validate(c);
  const auto dir = detail::prepare_output_dir(c);
  const auto rows = sweep_uj(c.uj_values, c.lattice(), c.setup(), c.ensemble_options(threads));
  const auto classes = build_classes(*enumerate_basis(c.lattice()));

  std::vector<std::string> header{"u_over_j", "n_converged", "convergence_rate"};
  for (auto& col : detail::class_columns("empirical_", classes.size())) header.push_back(col);
  for (auto& col : detail::class_columns("predicted_", classes.size())) header.push_back(col);
  CsvBuilder csv(header);
  for (const auto& r : rows) {
    std::vector<std::string> row{detail::ratio_text(r.u_over_j), std::to_string(r.stats.n_converged),
                                 format_double(r.stats.convergence_rate)};
    for (double p : r.stats.class_proportions) row.push_back(format_double(p));
    for (double p : r.stats.class_proportions_predicted) row.push_back(format_double(p));
    csv.row(row);
  }
  CommandOutput out;
  detail::emit(out, dir, "sweep.csv", csv.str());
  out.summary["n_rows"] = rows.size();
  detail::write_manifest(dir, "sweep", c, out);
  return out;
}

}  // namespace scatterloc
