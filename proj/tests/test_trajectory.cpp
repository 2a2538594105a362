#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "scatterloc/analysis.hpp"
#include "scatterloc/trajectory.hpp"

using namespace scatterloc;

namespace {

constexpr double pi = std::numbers::pi;

struct Fixture {
  BasisPtr basis = enumerate_basis({3, 3});
  std::vector<EquivalenceClass> classes = build_classes(*basis);
  PatternTable table;

  explicit Fixture(double gN = 0.1) : table(basis, make_setup(gN)) {}

  static ScatteringSetup make_setup(double gN) {
    ScatteringSetup s;
    s.coupling_gN = gN;
    return s;
  }

  ManyBodyState state(std::initializer_list<std::pair<FockState, Complex>> terms) const {
    std::vector<Complex> c(basis->size());
    for (const auto& [occ, amp] : terms) c[basis->index_of(occ)] = amp;
    return {basis, std::move(c)};
  }
};

double fidelity(const ManyBodyState& a, const ManyBodyState& b) { return std::norm(overlap(a, b)); }

}  // namespace

TEST(ApplyScatter, BasisStatesAreEigenstates) {
  Fixture f;
  for (std::size_t u = 0; u < f.basis->size(); ++u) {
    const auto s = ManyBodyState::basis_state(f.basis, u);
    for (double theta : {0.4, -1.1, 2.9}) EXPECT_NEAR(fidelity(apply_scatter(s, theta, f.table), s), 1.0, 1e-14);
  }
}

TEST(ApplyScatter, ForwardScatterIsIdentity) {
  Fixture f;
  std::mt19937_64 gen(5);
  std::normal_distribution<double> g;
  std::vector<Complex> c(f.basis->size());
  for (auto& x : c) x = {g(gen), g(gen)};
  const ManyBodyState s(f.basis, c);
  const auto t = apply_scatter(s, 0.0, f.table);
  for (std::size_t u = 0; u < s.size(); ++u) EXPECT_NEAR(std::abs(t[u] - s[u]), 0.0, 1e-15);
}

TEST(ApplyScatter, WithinClassWeightsKeptPhaseChanged) {
  Fixture f;
  const auto s = f.state({{{2, 0, 1}, 0.8}, {{1, 0, 2}, 0.6}});
  const auto i201 = f.basis->index_of({2, 0, 1}), i102 = f.basis->index_of({1, 0, 2});
  const auto t = apply_scatter(s, 1.0, f.table);
  EXPECT_NEAR(std::abs(t[i201]) / std::abs(t[i102]), 0.8 / 0.6, 1e-14);
  const double phase_before = std::arg(s[i201] / s[i102]);
  const double phase_after = std::arg(t[i201] / t[i102]);
  EXPECT_GT(std::abs(phase_after - phase_before), 1e-3);
}

TEST(ApplyScatter, ZeroNormProjection) {
  // With k0 a = 2 pi / 3 the three phases of |111> cancel at theta = pi / 2, up to rounding.
  auto basis = enumerate_basis({3, 3});
  ScatteringSetup setup;
  setup.k0_a = 2 * pi / 3;
  PatternTable table(basis, setup);
  EXPECT_LT(std::abs(structure_amplitude(std::vector{1, 1, 1}, pi / 2, setup)), 1e-15);
  auto mott = ManyBodyState::basis_state(basis, FockState{1, 1, 1});
  EXPECT_THROW(mott.project([](std::size_t) { return Complex(0.0); }), ZeroNormProjection);
  EXPECT_THROW(mott.project([](std::size_t) { return Complex(1e-301); }), ZeroNormProjection);
}

TEST(ApplyNonscatter, EigenstatesAndBias) {
  Fixture f;
  for (std::size_t u = 0; u < f.basis->size(); ++u) {
    const auto s = ManyBodyState::basis_state(f.basis, u);
    EXPECT_NEAR(fidelity(apply_nonscatter(s, f.table), s), 1.0, 1e-15);
  }
  const auto s = f.state({{{3, 0, 0}, 1.0}, {{1, 1, 1}, 1.0}});
  const auto t = apply_nonscatter(s, f.table);
  // |111> scatters less, so a null detection shifts weight towards it.
  EXPECT_GT(t.probability(f.basis->index_of({1, 1, 1})), 0.5);
  EXPECT_LT(t.probability(0), 0.5);
}

TEST(ApplyNonscatter, UniformAmplitudesLeaveStateUnchanged) {
  // All-on-one-site states share one pattern, hence one A_u.
  Fixture f;
  const auto s = f.state({{{3, 0, 0}, 0.3}, {{0, 3, 0}, Complex(0, 0.4)}, {{0, 0, 3}, -0.5}});
  const auto t = apply_nonscatter(s, f.table);
  for (std::size_t u = 0; u < s.size(); ++u) EXPECT_NEAR(std::abs(t[u] - s[u]), 0.0, 1e-15);
}

TEST(SampleEvent, SingleSiteStateRatesAndUniformAngles) {
  Fixture f;
  const auto s = ManyBodyState::basis_state(f.basis, 0);
  RngStream rng(99);
  const int draws = 200000;
  int scatter = 0;
  std::vector<int> quarter(4, 0);
  for (int i = 0; i < draws; ++i) {
    const auto ev = sample_event(s, f.table, rng);
    if (!ev.scattered()) continue;
    ++scatter;
    ASSERT_GE(ev.theta, -pi);
    ASSERT_LT(ev.theta, pi);
    ++quarter[angle_bin(ev.theta, 4)];
  }
  const double p = 0.01, sigma = std::sqrt(p * (1 - p) / draws);
  EXPECT_NEAR(static_cast<double>(scatter) / draws, p, 4 * sigma);
  for (int q : quarter) EXPECT_NEAR(q, scatter / 4.0, 4 * std::sqrt(scatter * 0.25 * 0.75));
}

TEST(SampleEvent, HistogramMatchesDensity) {
  Fixture f(0.9);
  const auto gs = ground_state(build_hamiltonian(*f.basis, {1.0, 0.0}), f.basis);
  RngStream rng(2024);
  const std::size_t bins = 64;
  std::vector<double> counts(bins, 0.0);
  double total = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    const auto ev = sample_event(gs.state, f.table, rng);
    if (!ev.scattered()) continue;
    counts[angle_bin(ev.theta, bins)] += 1;
    total += 1;
  }
  const auto expected = predicted_bin_probabilities(gs.state, f.table, bins);
  int outside = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double mean = total * expected[b];
    const double sigma = std::sqrt(total * expected[b] * (1 - expected[b]));
    if (std::abs(counts[b] - mean) > 3 * sigma) ++outside;
  }
  // 3 sigma per bin: allow a couple of the 64 bins to fall outside by chance.
  EXPECT_LE(outside, 2);
}

TEST(SampleEvent, Deterministic) {
  Fixture f;
  const auto gs = ground_state(build_hamiltonian(*f.basis, {1.0, 0.05}), f.basis);
  auto a = run_trajectory(gs.state, 2000, f.table, f.classes, 42);
  auto b = run_trajectory(gs.state, 2000, f.table, f.classes, 42);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    EXPECT_EQ(a.events[i].kind, b.events[i].kind);
    EXPECT_EQ(a.events[i].theta, b.events[i].theta);
  }
  EXPECT_EQ(a.overlap_sq_series, b.overlap_sq_series);
  EXPECT_EQ(a.class_weights_final, b.class_weights_final);
}

TEST(Step, FixedPointStaysPut) {
  Fixture f(0.5);
  auto s = ManyBodyState::basis_state(f.basis, FockState{1, 1, 1});
  const auto start = s;
  RngStream rng(1);
  for (std::size_t m = 1; m <= 500; ++m) {
    auto [next, ev] = step(s, f.table, rng, m);
    EXPECT_EQ(ev.index, m);
    s = std::move(next);
    ASSERT_NEAR(fidelity(s, start), 1.0, 1e-12);
  }
}

TEST(RunTrajectory, MottStartConvergesImmediately) {
  Fixture f(0.1);
  const auto mott = ManyBodyState::basis_state(f.basis, FockState{1, 1, 1});
  const auto rec = run_trajectory(mott, 3000, f.table, f.classes, 7);
  EXPECT_TRUE(rec.converged);
  EXPECT_EQ(rec.final_class(), 3u);
  EXPECT_GT(rec.n_scatter, 0u);
  EXPECT_EQ(rec.settle_event, 0u);
  EXPECT_EQ(rec.events.size(), 3000u);
  for (double o : rec.overlap_sq_series) EXPECT_NEAR(o, 1.0, 1e-12);
}

TEST(RunTrajectory, RejectsZeroEvents) {
  Fixture f;
  const auto s = ManyBodyState::basis_state(f.basis, 0);
  EXPECT_THROW(run_trajectory(s, 0, f.table, f.classes, 1), std::invalid_argument);
}

TEST(RunTrajectory, WeakCouplingSuperfluidSettles) {
  Fixture f(0.1);
  const auto gs = ground_state(build_hamiltonian(*f.basis, {1.0, 0.05}), f.basis);
  int jumps = 0, drifts = 0;
  double prev = 1.0;
  const auto rec = run_trajectory(gs.state, 3000, f.table, f.classes, 3, {},
                                  [&](std::size_t, const ManyBodyState& s, const DetectionEvent& ev) {
                                    const double o = std::norm(overlap(gs.state, s));
                                    if (ev.scattered() && std::abs(o - prev) > 1e-3) ++jumps;
                                    if (!ev.scattered() && std::abs(o - prev) > 0 && std::abs(o - prev) < 1e-2) ++drifts;
                                    prev = o;
                                  });
  EXPECT_FALSE(rec.aborted);
  EXPECT_GT(rec.n_scatter, 0u);
  EXPECT_GT(jumps, 0);
  EXPECT_GT(drifts, 0);
  for (double o : rec.overlap_sq_series) {
    EXPECT_GE(o, 0.0);
    EXPECT_LE(o, 1.0 + 1e-12);
  }
  double sum = 0;
  for (double w : rec.class_weights_final) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(RunTrajectory, NormalizationAndWithinClassProfile) {
  Fixture f(0.5);
  const auto s = f.state({{{2, 1, 0}, 0.1}, {{1, 2, 0}, Complex(0, 0.2)}, {{0, 1, 2}, 0.3}, {{0, 2, 1}, -0.4}});
  std::vector<double> profile;
  for (std::size_t u = 0; u < s.size(); ++u) profile.push_back(std::abs(s[u]));
  run_trajectory(s, 1000, f.table, f.classes, 17, {}, [&](std::size_t, const ManyBodyState& st, const DetectionEvent&) {
    ASSERT_NEAR(st.norm_squared(), 1.0, 1e-10);
    for (std::size_t u = 0; u < st.size(); ++u) ASSERT_NEAR(std::abs(st[u]), profile[u], 1e-10);
  });
}

TEST(RunTrajectory, CheckpointsRecorded) {
  Fixture f(0.5);
  const auto gs = ground_state(build_hamiltonian(*f.basis, {1.0, 0.0}), f.basis);
  TrajectoryOptions opt;
  opt.weight_checkpoints = {0, 10, 100};
  const auto rec = run_trajectory(gs.state, 100, f.table, f.classes, 4, opt);
  ASSERT_EQ(rec.checkpoint_weights.size(), 3u);
  EXPECT_EQ(rec.checkpoint_weights[0], class_probabilities_initial(gs.state, f.classes));
  EXPECT_EQ(rec.checkpoint_weights[2], rec.class_weights_final);
}
