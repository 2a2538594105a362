#pragma once

// Bosonic Fock basis on a 1D lattice, the Bose-Hubbard Hamiltonian and its
// ground state.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scatterloc/errors.hpp"

namespace scatterloc {

using Complex = std::complex<double>;

enum class Boundary { Open, Periodic };

inline const char* to_string(Boundary b) { return b == Boundary::Open ? "open" : "periodic"; }

/// Lattice geometry. Sites sit at (0, j*a) with a = 1.
struct LatticeSpec {
  int sites = 3;  // M
  int atoms = 3;  // N
  Boundary boundary = Boundary::Open;

  void validate() const {
    if (sites < 1) throw ConfigError("M", "site count must be >= 1");
    if (atoms < 1) throw ConfigError("N", "atom count must be >= 1");
    if (boundary == Boundary::Periodic && sites <= 2)
      throw ConfigError("boundary", "periodic boundary needs M >= 3 (bonds would be double counted)");
  }

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// Occupation numbers (n_1, ..., n_M) of one number-basis state.
using FockState = std::vector<int>;

/// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (r > 1.8e19L) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(std::llround(r));
}

inline constexpr std::size_t kDefaultMaxBasisDim = 1'000'000;
inline constexpr std::size_t kDefaultMaxDenseDim = 4096;

/// All occupation vectors of N bosons on M sites, in lexicographically
/// descending order: (N,0,...,0) first, (0,...,0,N) last.
class FockBasis {
 public:
  FockBasis(LatticeSpec spec, std::vector<FockState> states)
      : spec_(spec), states_(std::move(states)) {}

  const LatticeSpec& lattice() const noexcept { return spec_; }
  std::size_t size() const noexcept { return states_.size(); }
  const FockState& operator[](std::size_t u) const { return states_[u]; }
  const std::vector<FockState>& states() const noexcept { return states_; }

  /// Index of `s` in the basis, or size() if absent. O(M log D).
  std::size_t index_of(std::span<const int> s) const {
    auto it = std::lower_bound(states_.begin(), states_.end(), s, [](const FockState& a, std::span<const int> b) {
      return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
    });
    if (it == states_.end() || !std::equal(it->begin(), it->end(), s.begin(), s.end())) return states_.size();
    return static_cast<std::size_t>(it - states_.begin());
  }

  std::size_t index_of(const FockState& s) const { return index_of(std::span<const int>(s)); }

 private:
  LatticeSpec spec_;
  std::vector<FockState> states_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

inline BasisPtr enumerate_basis(const LatticeSpec& spec, std::size_t max_dim = kDefaultMaxBasisDim) {
  spec.validate();
  const auto dim = binomial(static_cast<std::uint64_t>(spec.atoms + spec.sites - 1), static_cast<std::uint64_t>(spec.atoms));
  if (dim > max_dim)
    throw CapacityError("basis dimension " + std::to_string(dim) + " exceeds limit " + std::to_string(max_dim));

  std::vector<FockState> states;
  states.reserve(static_cast<std::size_t>(dim));
  FockState cur(static_cast<std::size_t>(spec.sites), 0);
  // Depth-first, largest occupation first, yields descending lexicographic order.
  std::function<void(int, int)> fill = [&](int site, int left) {
    if (site == spec.sites - 1) {
      cur[static_cast<std::size_t>(site)] = left;
      states.push_back(cur);
      return;
    }
    for (int n = left; n >= 0; --n) {
      cur[static_cast<std::size_t>(site)] = n;
      fill(site + 1, left - n);
    }
  };
  fill(0, spec.atoms);
  return std::make_shared<const FockBasis>(spec, std::move(states));
}

struct HubbardParams {
  double tunneling = 1.0;    // J
  double interaction = 0.0;  // U
};

/// Nearest-neighbor bonds (i, j) with i < j for the lattice boundary.
inline std::vector<std::pair<int, int>> lattice_bonds(const LatticeSpec& spec) {
  std::vector<std::pair<int, int>> bonds;
  for (int j = 0; j + 1 < spec.sites; ++j) bonds.emplace_back(j, j + 1);
  if (spec.boundary == Boundary::Periodic && spec.sites > 2) bonds.emplace_back(0, spec.sites - 1);
  return bonds;
}

/// Dense Bose-Hubbard matrix
///   H = -J sum_<i,j> (b_i^+ b_j + h.c.) + (U/2) sum_j n_j (n_j - 1)
/// in the basis order of `basis`.
inline Eigen::MatrixXd build_hamiltonian(const FockBasis& basis, const HubbardParams& params,
                                         std::size_t max_dim = kDefaultMaxDenseDim) {
  if (params.tunneling < 0 || !std::isfinite(params.tunneling)) throw ConfigError("J", "tunneling must be finite and >= 0");
  if (!std::isfinite(params.interaction)) throw ConfigError("U", "interaction must be finite");
  const std::size_t dim = basis.size();
  if (dim > max_dim)
    throw CapacityError("dense Hamiltonian of dimension " + std::to_string(dim) + " exceeds limit " + std::to_string(max_dim));

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const auto bonds = lattice_bonds(basis.lattice());
  FockState hopped;
  for (std::size_t u = 0; u < dim; ++u) {
    const FockState& s = basis[u];
    long pairs = 0;
    for (int n : s) pairs += static_cast<long>(n) * (n - 1);
    h(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(u)) = 0.5 * params.interaction * static_cast<double>(pairs);
    if (params.tunneling == 0.0) continue;

    // Fill row u with b_to^+ b_from |u>; the transpose entry comes from the reverse hop.
    for (auto [a, b] : bonds) {
      for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
        const int nf = s[static_cast<std::size_t>(from)];
        if (nf == 0) continue;
        const int nt = s[static_cast<std::size_t>(to)];
        hopped = s;
        --hopped[static_cast<std::size_t>(from)];
        ++hopped[static_cast<std::size_t>(to)];
        const std::size_t v = basis.index_of(hopped);
        const double amp = -params.tunneling * std::sqrt(static_cast<double>(static_cast<long>(nf) * (nt + 1)));
        h(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) += amp;
      }
    }
  }
  return h;
}

/// Normalized coefficient vector {c_u} over a Fock basis.
class ManyBodyState {
 public:
  ManyBodyState() = default;

  /// Takes ownership of `coeffs` and normalizes them. Throws ZeroNormProjection on a null vector.
  ManyBodyState(BasisPtr basis, std::vector<Complex> coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (!basis_) throw BasisMismatch("state has no basis");
    if (coeffs_.size() != basis_->size()) throw BasisMismatch("coefficient count does not match basis dimension");
    normalize();
  }

  static ManyBodyState basis_state(BasisPtr basis, std::size_t u) {
    std::vector<Complex> c(basis->size());
    c.at(u) = 1.0;
    return {std::move(basis), std::move(c)};
  }

  static ManyBodyState basis_state(BasisPtr basis, const FockState& occupations) {
    const std::size_t u = basis->index_of(occupations);
    if (u == basis->size()) throw BasisMismatch("occupation vector is not in the basis");
    return basis_state(std::move(basis), u);
  }

  const BasisPtr& basis() const noexcept { return basis_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<const Complex> coefficients() const noexcept { return coeffs_; }
  const Complex& operator[](std::size_t u) const { return coeffs_[u]; }

  double probability(std::size_t u) const { return std::norm(coeffs_[u]); }

  double norm_squared() const {
    double s = 0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return s;
  }

  /// Multiplies each c_u by factor(u) and renormalizes. Used by the projections.
  template <class Factor>
  void project(Factor&& factor) {
    for (std::size_t u = 0; u < coeffs_.size(); ++u)
      if (coeffs_[u] != Complex{}) coeffs_[u] *= factor(u);
    normalize();
  }

 private:
  void normalize() {
    const double n2 = norm_squared();
    if (!(std::sqrt(n2) >= 1e-300)) throw ZeroNormProjection("state norm " + std::to_string(std::sqrt(n2)) + " is below 1e-300");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& c : coeffs_) c *= inv;
  }

  BasisPtr basis_;
  std::vector<Complex> coeffs_;
};

inline bool same_basis(const ManyBodyState& a, const ManyBodyState& b) {
  if (a.basis() == b.basis()) return true;
  return a.basis() && b.basis() && a.basis()->lattice() == b.basis()->lattice() && a.size() == b.size();
}

/// <s1|s2> = sum_u conj(c1_u) c2_u.
inline Complex overlap(const ManyBodyState& s1, const ManyBodyState& s2) {
  if (!same_basis(s1, s2)) throw BasisMismatch("overlap of states over different bases");
  Complex acc{};
  for (std::size_t u = 0; u < s1.size(); ++u) acc += std::conj(s1[u]) * s2[u];
  return acc;
}

struct GroundState {
  double energy = 0;
  ManyBodyState state;
  double residual = 0;  // ||Hv - Ev||
};

/// Largest |eigenvalue|, used as ||H|| in the residual check.
inline double operator_norm(const Eigen::VectorXd& eigenvalues) {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

/// Full spectrum, ascending.
inline Eigen::VectorXd spectrum(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver did not converge");
  return solver.eigenvalues();
}

/// Lowest eigenpair of H, with the largest-magnitude coefficient made real positive.
inline GroundState ground_state(const Eigen::MatrixXd& h, BasisPtr basis) {
  if (h.rows() != h.cols()) throw BasisMismatch("Hamiltonian is not square");
  if (!basis || static_cast<std::size_t>(h.rows()) != basis->size()) throw BasisMismatch("Hamiltonian does not match basis");
  if (h.rows() == 0) throw BasisMismatch("empty Hamiltonian");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver did not converge");
  const double e0 = solver.eigenvalues()(0);
  Eigen::VectorXd v = solver.eigenvectors().col(0);
  v.normalize();

  Eigen::Index big = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(big))) big = i;
  if (v(big) < 0) v = -v;

  const double residual = (h * v - e0 * v).norm();
  const double hnorm = operator_norm(solver.eigenvalues());
  if (residual > 1e-10 * hnorm)
    throw ConvergenceError("ground-state residual " + std::to_string(residual) + " exceeds 1e-10 * ||H||");

  std::vector<Complex> c(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) c[static_cast<std::size_t>(i)] = v(i);
  return {e0, ManyBodyState(std::move(basis), std::move(c)), residual};
}

}  // namespace scatterloc
