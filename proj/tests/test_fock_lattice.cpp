#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "scatterloc/fock_lattice.hpp"

using namespace scatterloc;

namespace {

LatticeSpec chain(int m, int n, Boundary b = Boundary::Open) { return {m, n, b}; }

}  // namespace

TEST(EnumerateBasis, ThreeSitesThreeAtomsHasTenStates) {
  auto basis = enumerate_basis(chain(3, 3));
  ASSERT_EQ(basis->size(), 10u);
  EXPECT_EQ((*basis)[0], (FockState{3, 0, 0}));
  EXPECT_EQ((*basis)[4], (FockState{1, 1, 1}));
  EXPECT_EQ((*basis)[9], (FockState{0, 0, 3}));
}

TEST(EnumerateBasis, SingleSite) {
  auto basis = enumerate_basis(chain(1, 5));
  ASSERT_EQ(basis->size(), 1u);
  EXPECT_EQ((*basis)[0], FockState{5});
}

TEST(EnumerateBasis, MatchesBruteForceEnumeration) {
  for (auto [m, n] : {std::pair{5, 5}, {3, 3}, {4, 2}, {2, 6}, {6, 3}}) {
    auto basis = enumerate_basis(chain(m, n));
    const auto expected = oracle::brute_force_basis(m, n);
    ASSERT_EQ(basis->states(), expected) << "M=" << m << " N=" << n;
    EXPECT_EQ(basis->size(), binomial(static_cast<std::uint64_t>(n + m - 1), static_cast<std::uint64_t>(n)));
  }
  EXPECT_EQ(enumerate_basis(chain(5, 5))->size(), 126u);
}

TEST(EnumerateBasis, IndexLookupIsBijective) {
  auto basis = enumerate_basis(chain(4, 4));
  for (std::size_t u = 0; u < basis->size(); ++u) EXPECT_EQ(basis->index_of((*basis)[u]), u);
  EXPECT_EQ(basis->index_of(FockState{5, 0, 0, 0}), basis->size());
}

TEST(EnumerateBasis, CapacityAndValidation) {
  EXPECT_THROW(enumerate_basis(chain(20, 20)), CapacityError);
  EXPECT_THROW(enumerate_basis(chain(3, 3), 9), CapacityError);
  EXPECT_THROW(enumerate_basis(chain(0, 3)), ConfigError);
  EXPECT_THROW(enumerate_basis(chain(3, 0)), ConfigError);
  EXPECT_THROW(enumerate_basis(chain(2, 2, Boundary::Periodic)), ConfigError);
  EXPECT_NO_THROW(enumerate_basis(chain(3, 2, Boundary::Periodic)));
}

TEST(Hamiltonian, TwoSitesOneAtom) {
  auto basis = enumerate_basis(chain(2, 1));
  const auto h = build_hamiltonian(*basis, {1.0, 7.5});
  Eigen::Matrix2d expected;
  expected << 0, -1, -1, 0;
  EXPECT_EQ(h, expected);
}

TEST(Hamiltonian, NoHoppingIsDiagonalInteraction) {
  auto basis = enumerate_basis(chain(3, 3));
  const auto h = build_hamiltonian(*basis, {0.0, 1.0});
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      if (i != j) {
        EXPECT_EQ(h(i, j), 0.0);
      }
  EXPECT_EQ(h(0, 0), 3.0);  // |300>
  EXPECT_EQ(h(basis->index_of({2, 1, 0}), basis->index_of({2, 1, 0})), 1.0);
  EXPECT_EQ(h(basis->index_of({1, 1, 1}), basis->index_of({1, 1, 1})), 0.0);
}

TEST(Hamiltonian, SingleParticleOpenChainSpectrum) {
  auto basis = enumerate_basis(chain(3, 1));
  const auto evals = spectrum(build_hamiltonian(*basis, {1.0, 0.0}));
  // Closed form for the tridiagonal chain: -2 cos(pi k / 4), k = 1..3.
  EXPECT_NEAR(evals(0), -std::numbers::sqrt2, 1e-13);
  EXPECT_NEAR(evals(1), 0.0, 1e-13);
  EXPECT_NEAR(evals(2), std::numbers::sqrt2, 1e-13);
}

TEST(Hamiltonian, PeriodicRingSingleParticle) {
  auto basis = enumerate_basis(chain(4, 1, Boundary::Periodic));
  const auto evals = spectrum(build_hamiltonian(*basis, {1.0, 0.0}));
  // -2 cos(2 pi k / 4): -2, 0, 0, 2
  EXPECT_NEAR(evals(0), -2.0, 1e-13);
  EXPECT_NEAR(evals(3), 2.0, 1e-13);
}

TEST(Hamiltonian, SymmetricAndNumberConserving) {
  for (auto b : {Boundary::Open, Boundary::Periodic}) {
    auto basis = enumerate_basis(chain(4, 3, b));
    const auto h = build_hamiltonian(*basis, {0.7, 2.3});
    EXPECT_EQ(h, h.transpose());
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      for (Eigen::Index j = 0; j < h.cols(); ++j) {
        if (h(i, j) == 0 || i == j) continue;
        const auto& a = (*basis)[static_cast<std::size_t>(i)];
        const auto& c = (*basis)[static_cast<std::size_t>(j)];
        int diff = 0;
        for (std::size_t k = 0; k < a.size(); ++k) diff += std::abs(a[k] - c[k]);
        EXPECT_EQ(diff, 2) << "element connects states more than one hop apart";
      }
  }
}

TEST(Hamiltonian, RejectsNegativeTunneling) {
  auto basis = enumerate_basis(chain(3, 3));
  EXPECT_THROW(build_hamiltonian(*basis, {-1.0, 0.0}), ConfigError);
  EXPECT_THROW(build_hamiltonian(*basis, {1.0, 0.0}, 5), CapacityError);
}

TEST(GroundState, MottLimitIsExactlyUnitFilling) {
  auto basis = enumerate_basis(chain(3, 3));
  const auto gs = ground_state(build_hamiltonian(*basis, {0.0, 1.0}), basis);
  EXPECT_EQ(gs.energy, 0.0);
  const auto idx = basis->index_of({1, 1, 1});
  for (std::size_t u = 0; u < basis->size(); ++u) EXPECT_EQ(gs.state[u], Complex(u == idx ? 1.0 : 0.0));
}

TEST(GroundState, NonInteractingMatchesMultinomialOracle) {
  for (int m : {2, 3, 4}) {
    for (int n : {1, 2, 3}) {
      auto basis = enumerate_basis(chain(m, n));
      const auto gs = ground_state(build_hamiltonian(*basis, {1.0, 0.0}), basis);
      EXPECT_NEAR(gs.energy, n * oracle::open_chain_energy(m, 1.0), 1e-12);
      const auto v = oracle::open_chain_orbital(m);
      for (std::size_t u = 0; u < basis->size(); ++u)
        EXPECT_NEAR(gs.state[u].real(), oracle::multinomial_coefficient((*basis)[u], v), 1e-8);
    }
  }
}

TEST(GroundState, NonInteractingThreeSiteValues) {
  auto basis = enumerate_basis(chain(3, 3));
  const auto gs = ground_state(build_hamiltonian(*basis, {1.0, 0.0}), basis);
  EXPECT_NEAR(gs.energy, -3.0 * std::numbers::sqrt2, 1e-12);
  EXPECT_NEAR(gs.state.probability(basis->index_of({1, 1, 1})), 0.1875, 1e-12);
}

TEST(GroundState, ResidualAndPhaseContract) {
  auto basis = enumerate_basis(chain(4, 4, Boundary::Periodic));
  const auto h = build_hamiltonian(*basis, {1.0, 3.0});
  const auto gs = ground_state(h, basis);
  Eigen::VectorXd v(static_cast<Eigen::Index>(basis->size()));
  std::size_t big = 0;
  for (std::size_t u = 0; u < basis->size(); ++u) {
    v(static_cast<Eigen::Index>(u)) = gs.state[u].real();
    EXPECT_EQ(gs.state[u].imag(), 0.0);
    if (std::abs(gs.state[u]) > std::abs(gs.state[big])) big = u;
  }
  EXPECT_GT(gs.state[big].real(), 0.0);
  EXPECT_LE((h * v - gs.energy * v).norm(), 1e-10 * operator_norm(spectrum(h)));
  EXPECT_NEAR(gs.state.norm_squared(), 1.0, 1e-12);
}

TEST(Overlap, BasicIdentities) {
  auto basis = enumerate_basis(chain(3, 3));
  const auto a = ManyBodyState::basis_state(basis, FockState{1, 1, 1});
  const auto b = ManyBodyState::basis_state(basis, FockState{3, 0, 0});
  EXPECT_EQ(overlap(a, a), Complex(1.0));
  EXPECT_EQ(overlap(a, b), Complex(0.0));

  const auto gs = ground_state(build_hamiltonian(*basis, {1.0, 0.05}), basis);
  const auto c111 = gs.state[basis->index_of({1, 1, 1})];
  EXPECT_NEAR(std::abs(overlap(gs.state, a) - c111), 0.0, 1e-15);
  EXPECT_LE(std::abs(overlap(gs.state, gs.state)), 1.0 + 1e-12);
}

TEST(Overlap, BasisMismatchThrows) {
  const auto a = ManyBodyState::basis_state(enumerate_basis(chain(3, 3)), 0);
  const auto b = ManyBodyState::basis_state(enumerate_basis(chain(3, 2)), 0);
  EXPECT_THROW(overlap(a, b), BasisMismatch);
}

TEST(ManyBodyState, NormalizesOnConstruction) {
  auto basis = enumerate_basis(chain(2, 1));
  ManyBodyState s(basis, {Complex(3, 0), Complex(0, 4)});
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-15);
  EXPECT_NEAR(s.probability(0), 0.36, 1e-15);
  EXPECT_THROW(ManyBodyState(basis, {Complex(0), Complex(0)}), ZeroNormProjection);
  EXPECT_THROW(ManyBodyState(basis, {Complex(1)}), BasisMismatch);
}
