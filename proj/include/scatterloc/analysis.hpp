#pragma once

// Ensembles of trajectories and the statistics compared against the
// initial-state predictions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <thread>
#include <vector>

#include "scatterloc/equivalence.hpp"
#include "scatterloc/fock_lattice.hpp"
#include "scatterloc/scattering_kernel.hpp"
#include "scatterloc/trajectory.hpp"

namespace scatterloc {

/// Everything that depends only on the physical parameters, built once and
/// shared read-only by all trajectories.
struct Experiment {
  BasisPtr basis;
  std::vector<EquivalenceClass> classes;
  std::shared_ptr<const PatternTable> table;
  double ground_energy = 0;
  ManyBodyState ground;

  static Experiment prepare(const LatticeSpec& lattice, const HubbardParams& hubbard, const ScatteringSetup& setup) {
    Experiment e;
    e.basis = enumerate_basis(lattice);
    e.classes = build_classes(*e.basis);
    e.table = std::make_shared<const PatternTable>(e.basis, setup);
    e.set_hubbard(hubbard);
    return e;
  }

  void set_hubbard(const HubbardParams& hubbard) {
    auto gs = ground_state(build_hamiltonian(*basis, hubbard), basis);
    ground_energy = gs.energy;
    ground = std::move(gs.state);
  }
};

/// Bin index of `theta` among n_bins left-closed bins on [-pi, pi).
inline std::size_t angle_bin(double theta, std::size_t n_bins) {
  const double x = (theta + kPi) / (2.0 * kPi) * static_cast<double>(n_bins);
  if (!(x > 0)) return 0;
  return std::min(static_cast<std::size_t>(x), n_bins - 1);
}

inline double bin_center(std::size_t b, std::size_t n_bins) {
  return -kPi + (static_cast<double>(b) + 0.5) * 2.0 * kPi / static_cast<double>(n_bins);
}

/// Counts of scatter angles; NonScatter events are ignored.
inline std::vector<std::uint64_t> angle_histogram(std::span<const TrajectoryRecord> records, std::size_t n_bins) {
  if (n_bins < 1) throw std::invalid_argument("angle_histogram: n_bins must be >= 1");
  std::vector<std::uint64_t> counts(n_bins, 0);
  for (const auto& rec : records)
    for (const auto& ev : rec.events)
      if (ev.scattered()) ++counts[angle_bin(ev.theta, n_bins)];
  return counts;
}

/// Probability of each histogram bin under the conditional angular density of `state`.
inline std::vector<double> predicted_bin_probabilities(const ManyBodyState& state, const PatternTable& table,
                                                       std::size_t n_bins) {
  std::vector<double> out(n_bins, 0.0);
  const double total = scatter_cdf(state, table, kPi);
  if (!(total > 0)) return out;
  double prev = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double edge = -kPi + static_cast<double>(b + 1) * 2.0 * kPi / static_cast<double>(n_bins);
    const double cur = b + 1 == n_bins ? total : scatter_cdf(state, table, edge);
    out[b] = (cur - prev) / total;
    prev = cur;
  }
  return out;
}

/// Conditional angular density (integrates to 1) at `theta`, linear between grid points.
inline double conditional_density(const ManyBodyState& state, const PatternTable& table, double theta) {
  const std::size_t n = table.n_theta();
  const double x = (theta + kPi) / table.step();
  std::size_t cell = std::min(static_cast<std::size_t>(std::max(x, 0.0)), n - 1);
  const double t = std::clamp(x - static_cast<double>(cell), 0.0, 1.0);
  double f0 = 0, f1 = 0, total = 0;
  for (std::size_t u = 0; u < state.size(); ++u) {
    const double p = state.probability(u);
    if (p == 0) continue;
    const auto w = table.pattern(u);
    f0 += p * w[cell];
    f1 += p * w[(cell + 1) % n];
    total += p * table.scatter_prob(u);
  }
  return total > 0 ? ((1 - t) * f0 + t * f1) / total : 0.0;
}

struct EnsembleOptions {
  std::size_t n_traj = 1000;
  std::size_t n_events = 1000;
  std::uint64_t master_seed = 1;
  std::size_t n_bins = 600;
  unsigned threads = 0;  // 0: hardware concurrency
  double converge_threshold = 0.99;
  std::vector<std::size_t> weight_checkpoints;
  bool keep_records = false;
};

struct EnsembleStats {
  std::size_t n_traj = 0;
  std::size_t n_events = 0;
  std::size_t n_converged = 0;
  std::size_t n_aborted = 0;
  std::vector<std::size_t> class_counts;  // converged trajectories only
  std::vector<double> class_proportions;
  std::vector<double> class_proportions_predicted;
  std::vector<std::uint64_t> histogram;
  std::vector<double> histogram_predicted;  // bin probabilities, sums to 1
  std::vector<double> density_predicted;    // conditional density at bin centers
  std::uint64_t total_scatter = 0;
  double convergence_rate = 0;
  double mean_settle_event = 0;  // over converged trajectories
  std::vector<std::uint64_t> seeds;
  /// Mean and standard error of the class weights at each checkpoint.
  std::vector<std::vector<double>> checkpoint_mean;
  std::vector<std::vector<double>> checkpoint_stderr;
  std::vector<TrajectoryRecord> records;  // filled when options.keep_records

  /// Standard deviation of the proportion of class k under multinomial sampling
  /// with the predicted probabilities.
  double proportion_sigma(std::size_t k) const {
    if (n_converged == 0) return 0;
    const double p = class_proportions_predicted[k];
    return std::sqrt(p * (1 - p) / static_cast<double>(n_converged));
  }

  /// L1 distance between the normalized histogram and histogram_predicted.
  double histogram_l1() const {
    if (total_scatter == 0) return 0;
    double d = 0;
    for (std::size_t b = 0; b < histogram.size(); ++b)
      d += std::abs(static_cast<double>(histogram[b]) / static_cast<double>(total_scatter) - histogram_predicted[b]);
    return d;
  }
};

/// Runs independent seeded trajectories (in parallel when threads > 1) and
/// reduces them in trajectory-index order, so the result depends only on the
/// master seed.
inline EnsembleStats run_ensemble(const ManyBodyState& initial, const PatternTable& table,
                                  std::span<const EquivalenceClass> classes, const EnsembleOptions& opt) {
  if (opt.n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj must be >= 1");
  if (opt.n_bins < 1) throw std::invalid_argument("run_ensemble: n_bins must be >= 1");

  TrajectoryOptions topt;
  topt.keep_nonscatter_events = false;
  topt.record_overlap = false;
  topt.converge_threshold = opt.converge_threshold;
  topt.weight_checkpoints = opt.weight_checkpoints;

  std::vector<TrajectoryRecord> records(opt.n_traj);
  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, opt.n_traj));
  auto work = [&](unsigned worker) {
    for (std::size_t i = worker; i < opt.n_traj; i += threads)
      records[i] = run_trajectory(initial, opt.n_events, table, classes, trajectory_seed(opt.master_seed, i), topt);
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }

  EnsembleStats st;
  st.n_traj = opt.n_traj;
  st.n_events = opt.n_events;
  st.class_counts.assign(classes.size(), 0);
  st.class_proportions.assign(classes.size(), 0.0);
  st.class_proportions_predicted = class_probabilities_initial(initial, classes);
  st.histogram = angle_histogram(records, opt.n_bins);
  st.histogram_predicted = predicted_bin_probabilities(initial, table, opt.n_bins);
  st.density_predicted.resize(opt.n_bins);
  for (std::size_t b = 0; b < opt.n_bins; ++b)
    st.density_predicted[b] = conditional_density(initial, table, bin_center(b, opt.n_bins));

  double settle_sum = 0;
  for (const auto& rec : records) {
    st.seeds.push_back(rec.seed);
    st.total_scatter += rec.n_scatter;
    if (rec.aborted) ++st.n_aborted;
    if (rec.converged) {
      ++st.n_converged;
      ++st.class_counts[rec.final_class()];
      settle_sum += static_cast<double>(rec.settle_event.value_or(rec.n_events_done));
    }
  }
  for (std::size_t k = 0; k < classes.size(); ++k)
    if (st.n_converged) st.class_proportions[k] = static_cast<double>(st.class_counts[k]) / static_cast<double>(st.n_converged);
  st.convergence_rate = static_cast<double>(st.n_converged) / static_cast<double>(st.n_traj);
  st.mean_settle_event = st.n_converged ? settle_sum / static_cast<double>(st.n_converged) : 0.0;

  const std::size_t nck = opt.weight_checkpoints.size();
  st.checkpoint_mean.assign(nck, std::vector<double>(classes.size(), 0.0));
  st.checkpoint_stderr.assign(nck, std::vector<double>(classes.size(), 0.0));
  for (std::size_t c = 0; c < nck; ++c) {
    std::size_t count = 0;
    std::vector<double> sum(classes.size(), 0.0), sq(classes.size(), 0.0);
    for (const auto& rec : records) {
      const auto& w = rec.checkpoint_weights[c];
      if (w.empty()) continue;  // aborted before reaching this checkpoint
      ++count;
      for (std::size_t k = 0; k < w.size(); ++k) {
        sum[k] += w[k];
        sq[k] += w[k] * w[k];
      }
    }
    if (count == 0) continue;
    const double n = static_cast<double>(count);
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const double mean = sum[k] / n;
      const double var = std::max(sq[k] / n - mean * mean, 0.0);
      st.checkpoint_mean[c][k] = mean;
      st.checkpoint_stderr[c][k] = count > 1 ? std::sqrt(var * n / (n - 1) / n) : 0.0;
    }
  }
  if (opt.keep_records) st.records = std::move(records);
  return st;
}

/// U/J value for a sweep; infinity means the J = 0 (U = 1) Mott limit.
inline HubbardParams hubbard_for_ratio(double u_over_j) {
  if (std::isinf(u_over_j)) return {0.0, 1.0};
  return {1.0, u_over_j};
}

struct SweepRow {
  double u_over_j = 0;
  EnsembleStats stats;
};

/// One ensemble per U/J value, each starting from that value's ground state.
inline std::vector<SweepRow> sweep_uj(std::span<const double> uj_values, const LatticeSpec& lattice,
                                      const ScatteringSetup& setup, const EnsembleOptions& opt) {
  std::vector<SweepRow> rows;
  if (uj_values.empty()) return rows;
  for (double r : uj_values)
    if (!(r >= 0)) throw ConfigError("uj_values", "U/J values must be >= 0");
  Experiment ex = Experiment::prepare(lattice, hubbard_for_ratio(uj_values.front()), setup);
  for (double r : uj_values) {
    ex.set_hubbard(hubbard_for_ratio(r));
    rows.push_back({r, run_ensemble(ex.ground, *ex.table, ex.classes, opt)});
  }
  return rows;
}

}  // namespace scatterloc
