#pragma once

// Scattering of a probe wave off a Fock-space lattice state: the angular
// pattern of each basis state, the no-scatter amplitudes and the tables the
// trajectory engine samples from.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "scatterloc/errors.hpp"
#include "scatterloc/fock_lattice.hpp"

namespace scatterloc {

inline constexpr double kPi = std::numbers::pi;

enum class Envelope { Uniform, Gaussian };

inline const char* to_string(Envelope e) { return e == Envelope::Uniform ? "uniform" : "gaussian"; }

struct ScatteringSetup {
  double k0_a = kPi;       // probe wave-number times site spacing
  double coupling_gN = 0.1;
  Envelope envelope = Envelope::Uniform;
  double sigma_a = 0.2;    // Wannier width / spacing, Gaussian only
  int n_theta = 2048;

  void validate() const {
    if (!std::isfinite(k0_a)) throw ConfigError("k0_a", "must be finite");
    if (!(coupling_gN > 0) || !std::isfinite(coupling_gN)) throw ConfigError("gN", "coupling must be finite and > 0");
    if (envelope == Envelope::Gaussian && (!(sigma_a > 0) || !std::isfinite(sigma_a)))
      throw ConfigError("sigma_a", "Gaussian width must be finite and > 0");
    if (n_theta < 64 || n_theta % 2 != 0) throw ConfigError("n_theta", "angular grid must be even and >= 64");
  }

  /// Per-atom coupling g = gN / N.
  double coupling(int atoms) const { return coupling_gN / atoms; }
};

/// k(theta) / k0 = (1 - cos theta, -sin theta).
inline std::array<double, 2> momentum_transfer(double theta, double k0 = 1.0) {
  return {k0 * (1.0 - std::cos(theta)), -k0 * std::sin(theta)};
}

/// Fourier transform of the on-site density |w(r)|^2 at k(theta).
inline double envelope_I(double theta, const ScatteringSetup& setup) {
  if (setup.envelope == Envelope::Uniform) return 1.0;
  const double s = setup.k0_a * setup.sigma_a;
  return std::exp(-s * s * (1.0 - std::cos(theta)));
}

/// F_u(theta) = sum_j n_j exp(-i j k0 a sin theta), sites indexed from 0.
inline Complex structure_amplitude(std::span<const int> occupations, double theta, const ScatteringSetup& setup) {
  const double phase = -setup.k0_a * std::sin(theta);
  Complex acc{};
  for (std::size_t j = 0; j < occupations.size(); ++j) {
    if (occupations[j] == 0) continue;
    acc += static_cast<double>(occupations[j]) * std::polar(1.0, phase * static_cast<double>(j));
  }
  return acc;
}

/// Uniform periodic grid on [-pi, pi). Point i and point n - i are exact negatives.
inline std::vector<double> theta_grid(int n_theta) {
  std::vector<double> grid(static_cast<std::size_t>(n_theta));
  const double step = 2.0 * kPi / n_theta;
  const int half = n_theta / 2;
  for (int i = 0; i < n_theta; ++i) grid[static_cast<std::size_t>(i)] = (i - half) * step;
  grid[0] = -kPi;
  return grid;
}

/// Per-basis-state scattering patterns, precomputed once per (basis, setup)
/// and shared read-only by every trajectory.
class PatternTable {
 public:
  PatternTable(BasisPtr basis, const ScatteringSetup& setup) : basis_(std::move(basis)), setup_(setup) {
    setup_.validate();
    const std::size_t dim = basis_->size();
    const std::size_t n = static_cast<std::size_t>(setup_.n_theta);
    grid_ = theta_grid(setup_.n_theta);
    step_ = 2.0 * kPi / setup_.n_theta;

    const double g = setup_.coupling(basis_->lattice().atoms);
    const double prefactor = g * g / (2.0 * kPi);

    W_.assign(dim * n, 0.0);
    cumulative_.assign(dim * (n + 1), 0.0);
    A2_.assign(dim, 0.0);
    A_.assign(dim, 0.0);

    std::vector<double> envelope2(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double env = envelope_I(grid_[i], setup_);
      envelope2[i] = env * env;
    }

    double worst = 1.0;
    std::size_t worst_u = 0;
    for (std::size_t u = 0; u < dim; ++u) {
      double* w = &W_[u * n];
      for (std::size_t i = 0; i < n; ++i)
        w[i] = prefactor * envelope2[i] * std::norm(structure_amplitude((*basis_)[u], grid_[i], setup_));

      // Trapezoid cumulative mass; the last cell wraps from theta_{n-1} to pi == -pi.
      double* cum = &cumulative_[u * (n + 1)];
      cum[0] = 0.0;
      for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + 0.5 * step_ * (w[i] + w[(i + 1) % n]);

      double quad = 0.0;
      for (std::size_t i = 0; i < n; ++i) quad += w[i];
      quad *= step_;
      A2_[u] = 1.0 - quad;
      if (A2_[u] < worst) {
        worst = A2_[u];
        worst_u = u;
      }
    }
    if (worst < 0) {
      std::string occ;
      for (int x : (*basis_)[worst_u]) occ += std::to_string(x);
      throw CouplingTooStrong("|A_u|^2 = " + std::to_string(worst) + " < 0 for basis state |" + occ +
                              "> (gN too large for the weak-probe regime)");
    }
    for (std::size_t u = 0; u < dim; ++u) A_[u] = std::sqrt(A2_[u]);
  }

  const BasisPtr& basis() const noexcept { return basis_; }
  const ScatteringSetup& setup() const noexcept { return setup_; }
  std::size_t dim() const noexcept { return A2_.size(); }
  std::size_t n_theta() const noexcept { return grid_.size(); }
  double step() const noexcept { return step_; }
  std::span<const double> theta() const noexcept { return grid_; }

  /// W_u on the grid.
  std::span<const double> pattern(std::size_t u) const { return {&W_[u * grid_.size()], grid_.size()}; }
  /// Trapezoid cumulative integral of W_u at the n_theta + 1 cell edges (-pi ... pi).
  std::span<const double> cumulative(std::size_t u) const {
    return {&cumulative_[u * (grid_.size() + 1)], grid_.size() + 1};
  }
  std::span<const double> nonscatter_prob_by_state() const noexcept { return A2_; }
  std::span<const double> nonscatter_amplitude() const noexcept { return A_; }

  /// Quadrature of W_u over the full circle; equals 1 - |A_u|^2.
  double scatter_prob(std::size_t u) const { return cumulative(u).back(); }

 private:
  BasisPtr basis_;
  ScatteringSetup setup_;
  std::vector<double> grid_;
  double step_ = 0;
  std::vector<double> W_;           // dim x n_theta, row-major
  std::vector<double> cumulative_;  // dim x (n_theta + 1)
  std::vector<double> A2_;
  std::vector<double> A_;
};

/// P(theta_i) = sum_u |c_u|^2 W_u(theta_i).
inline std::vector<double> scatter_density(const ManyBodyState& state, const PatternTable& table) {
  std::vector<double> out(table.n_theta(), 0.0);
  for (std::size_t u = 0; u < state.size(); ++u) {
    const double p = state.probability(u);
    if (p == 0) continue;
    const auto w = table.pattern(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p * w[i];
  }
  return out;
}

/// Periodic trapezoid rule over the theta grid.
inline double quadrature(std::span<const double> values, double step) {
  double s = 0;
  for (double v : values) s += v;
  return s * step;
}

/// P_NS = sum_u |c_u|^2 |A_u|^2.
inline double nonscatter_prob(const ManyBodyState& state, const PatternTable& table) {
  const auto a2 = table.nonscatter_prob_by_state();
  double p = 0;
  for (std::size_t u = 0; u < state.size(); ++u) p += state.probability(u) * a2[u];
  return p;
}

/// Unconditional scatter mass in [-pi, theta] under the piecewise-linear density
/// model (linear interpolation of the grid density within each cell).
inline double scatter_cdf(const ManyBodyState& state, const PatternTable& table, double theta) {
  const std::size_t n = table.n_theta();
  const double step = table.step();
  double x = (theta + kPi) / step;
  if (x <= 0) return 0.0;
  if (x >= static_cast<double>(n)) x = static_cast<double>(n);
  std::size_t cell = static_cast<std::size_t>(x);
  if (cell >= n) cell = n - 1;
  const double s = (x - static_cast<double>(cell)) * step;  // offset inside cell

  double mass = 0, f0 = 0, f1 = 0;
  for (std::size_t u = 0; u < state.size(); ++u) {
    const double p = state.probability(u);
    if (p == 0) continue;
    const auto w = table.pattern(u);
    mass += p * table.cumulative(u)[cell];
    f0 += p * w[cell];
    f1 += p * w[(cell + 1) % n];
  }
  return mass + f0 * s + 0.5 * (f1 - f0) * s * s / step;
}

}  // namespace scatterloc
