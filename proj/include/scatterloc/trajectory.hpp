#pragma once

// One stochastic realization of repeated probe detections: sample an outcome,
// project onto it, renormalize, repeat.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scatterloc/equivalence.hpp"
#include "scatterloc/fock_lattice.hpp"
#include "scatterloc/rng.hpp"
#include "scatterloc/scattering_kernel.hpp"

namespace scatterloc {

struct DetectionEvent {
  enum class Kind { NonScatter, Scatter };
  Kind kind = Kind::NonScatter;
  double theta = 0;       // meaningful for Scatter only, in [-pi, pi)
  std::size_t index = 0;  // m, counted from 1

  bool scattered() const noexcept { return kind == Kind::Scatter; }
  static DetectionEvent nonscatter(std::size_t m) { return {Kind::NonScatter, 0.0, m}; }
  static DetectionEvent scatter(double theta, std::size_t m) { return {Kind::Scatter, theta, m}; }
};

inline void project_scatter(ManyBodyState& state, double theta, const PatternTable& table) {
  const double env = envelope_I(theta, table.setup());
  const FockBasis& basis = *table.basis();
  state.project([&](std::size_t u) { return env * structure_amplitude(basis[u], theta, table.setup()); });
}

inline void project_nonscatter(ManyBodyState& state, const PatternTable& table) {
  const auto a = table.nonscatter_amplitude();
  state.project([&](std::size_t u) { return Complex(a[u]); });
}

/// State after detecting a probe scattered at `theta`.
inline ManyBodyState apply_scatter(ManyBodyState state, double theta, const PatternTable& table) {
  project_scatter(state, theta, table);
  return state;
}

/// State after detecting that the probe passed unscattered.
inline ManyBodyState apply_nonscatter(ManyBodyState state, const PatternTable& table) {
  project_nonscatter(state, table);
  return state;
}

namespace detail {

struct Weighted {
  double p;
  std::size_t u;
};

/// Angle at which the piecewise-linear scatter CDF of the mixture sum_u p_u W_u
/// reaches `fraction` of its total.
inline double invert_scatter_cdf(std::span<const Weighted> mix, const PatternTable& table, double fraction) {
  const std::size_t n = table.n_theta();
  const double step = table.step();
  auto mass_at = [&](std::size_t edge) {
    double m = 0;
    for (const auto& w : mix) m += w.p * table.cumulative(w.u)[edge];
    return m;
  };
  const double target = fraction * mass_at(n);

  // Largest cell whose left-edge mass is <= target. The edge masses are sums of
  // nondecreasing terms in a fixed order, so they are monotone in floating point too.
  std::size_t lo = 0, hi = n;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (mass_at(mid) <= target) lo = mid;
    else hi = mid;
  }
  const double rest = target - mass_at(lo);
  double f0 = 0, f1 = 0;
  for (const auto& w : mix) {
    const auto pat = table.pattern(w.u);
    f0 += w.p * pat[lo];
    f1 += w.p * pat[(lo + 1) % n];
  }
  // Solve f0 s + (f1 - f0) s^2 / (2 step) = rest for s in [0, step].
  const double a = 0.5 * (f1 - f0) / step;
  const double disc = f0 * f0 + 4.0 * a * rest;
  double s = 0;
  const double denom = f0 + std::sqrt(std::max(disc, 0.0));
  if (denom > 0) s = 2.0 * rest / denom;
  s = std::clamp(s, 0.0, step);

  double theta = table.theta()[lo] + s;
  if (theta >= kPi) theta -= 2.0 * kPi;
  if (theta < -kPi) theta = -kPi;
  return theta;
}

}  // namespace detail

/// Draws the next detection outcome. A single uniform r decides both branches:
/// r < P_NS gives NonScatter, otherwise (r - P_NS) / (1 - P_NS) is the
/// inverse-CDF target of the conditional angular density.
inline DetectionEvent sample_event(const ManyBodyState& state, const PatternTable& table, RngStream& rng,
                                   std::size_t m = 1) {
  const auto a2 = table.nonscatter_prob_by_state();
  std::vector<detail::Weighted> mix;
  mix.reserve(state.size());
  double p_ns = 0;
  for (std::size_t u = 0; u < state.size(); ++u) {
    const double p = state.probability(u);
    if (p == 0) continue;
    mix.push_back({p, u});
    p_ns += p * a2[u];
  }
  const double r = rng.uniform();
  if (r < p_ns || p_ns >= 1.0) return DetectionEvent::nonscatter(m);
  const double fraction = std::min((r - p_ns) / (1.0 - p_ns), 1.0);
  return DetectionEvent::scatter(detail::invert_scatter_cdf(mix, table, fraction), m);
}

inline void apply_event(ManyBodyState& state, const DetectionEvent& event, const PatternTable& table) {
  if (event.scattered()) project_scatter(state, event.theta, table);
  else project_nonscatter(state, table);
}

/// One detection: sample, project, normalize.
inline std::pair<ManyBodyState, DetectionEvent> step(ManyBodyState state, const PatternTable& table, RngStream& rng,
                                                     std::size_t m = 1) {
  const DetectionEvent ev = sample_event(state, table, rng, m);
  apply_event(state, ev, table);
  return {std::move(state), ev};
}

struct TrajectoryOptions {
  /// Store NonScatter events in the record. Ensembles switch this off to save memory.
  bool keep_nonscatter_events = true;
  bool record_overlap = true;
  double converge_threshold = 0.99;
  /// Event counts m after which the class-weight vector is stored.
  std::vector<std::size_t> weight_checkpoints;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<DetectionEvent> events;
  std::vector<double> overlap_sq_series;  // |<psi_0|psi_m>|^2 for m = 1..n_events
  std::vector<double> class_weights_final;
  std::vector<std::vector<double>> checkpoint_weights;  // aligned with options.weight_checkpoints
  bool converged = false;
  bool aborted = false;
  std::size_t n_events_done = 0;
  std::size_t n_scatter = 0;
  /// First m at which max class weight exceeded the threshold (0: already at start).
  std::optional<std::size_t> settle_event;

  /// Index of the dominant class at the end.
  std::size_t final_class() const {
    return static_cast<std::size_t>(std::max_element(class_weights_final.begin(), class_weights_final.end()) -
                                    class_weights_final.begin());
  }
};

struct NoObserver {
  void operator()(std::size_t, const ManyBodyState&, const DetectionEvent&) const noexcept {}
};

/// Runs n_events detections from `initial`. `observer(m, state, event)` sees the
/// state after every event.
template <class Observer = NoObserver>
TrajectoryRecord run_trajectory(const ManyBodyState& initial, std::size_t n_events, const PatternTable& table,
                                std::span<const EquivalenceClass> classes, std::uint64_t seed,
                                const TrajectoryOptions& options = {}, Observer&& observer = {}) {
  if (n_events < 1) throw std::invalid_argument("run_trajectory: n_events must be >= 1");
  if (initial.basis() != table.basis() && !(initial.basis() && initial.size() == table.dim()))
    throw BasisMismatch("initial state and pattern table use different bases");

  TrajectoryRecord rec;
  rec.seed = seed;
  if (options.record_overlap) rec.overlap_sq_series.reserve(n_events);
  rec.checkpoint_weights.resize(options.weight_checkpoints.size());

  auto dominant = [&](const std::vector<double>& w) { return *std::max_element(w.begin(), w.end()); };
  auto store_checkpoints = [&](std::size_t m, const ManyBodyState& s) {
    for (std::size_t k = 0; k < options.weight_checkpoints.size(); ++k)
      if (options.weight_checkpoints[k] == m) rec.checkpoint_weights[k] = class_weights(s, classes);
  };

  ManyBodyState state = initial;
  RngStream rng(seed);
  auto weights = class_weights(state, classes);
  if (dominant(weights) > options.converge_threshold) rec.settle_event = 0;
  store_checkpoints(0, state);

  for (std::size_t m = 1; m <= n_events; ++m) {
    const DetectionEvent ev = sample_event(state, table, rng, m);
    try {
      apply_event(state, ev, table);
    } catch (const ZeroNormProjection&) {
      rec.aborted = true;
      rec.events.push_back(ev);
      break;
    }
    rec.n_events_done = m;
    if (ev.scattered()) ++rec.n_scatter;
    if (ev.scattered() || options.keep_nonscatter_events) rec.events.push_back(ev);
    if (options.record_overlap) rec.overlap_sq_series.push_back(std::norm(overlap(initial, state)));
    if (!rec.settle_event || !options.weight_checkpoints.empty()) {
      weights = class_weights(state, classes);
      if (!rec.settle_event && dominant(weights) > options.converge_threshold) rec.settle_event = m;
      store_checkpoints(m, state);
    }
    observer(m, state, ev);
  }

  rec.class_weights_final = class_weights(state, classes);
  rec.converged = !rec.aborted && dominant(rec.class_weights_final) > options.converge_threshold;
  return rec;
}

}  // namespace scatterloc
