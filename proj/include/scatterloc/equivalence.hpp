#pragma once

// Scattering-equivalence classes: basis states whose pair autocorrelation
// C_d = sum_j n_j n_{j+d} agrees produce identical scattering patterns.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "scatterloc/fock_lattice.hpp"

namespace scatterloc {

using Signature = std::vector<long>;

/// (C_0, ..., C_{M-1}) along the open line; the scattering geometry never wraps.
inline Signature autocorrelation(std::span<const int> occupations) {
  const std::size_t m = occupations.size();
  Signature c(m, 0);
  for (std::size_t d = 0; d < m; ++d)
    for (std::size_t j = 0; j + d < m; ++j) c[d] += static_cast<long>(occupations[j]) * occupations[j + d];
  return c;
}

struct EquivalenceClass {
  Signature signature;
  std::vector<std::size_t> members;  // basis indices, ascending
};

/// Partition of the basis by signature, classes ordered by descending signature
/// (all-on-one-site first, the most spread-out configuration last).
inline std::vector<EquivalenceClass> build_classes(const FockBasis& basis) {
  std::map<Signature, std::vector<std::size_t>, std::greater<>> groups;
  for (std::size_t u = 0; u < basis.size(); ++u) groups[autocorrelation(basis[u])].push_back(u);
  std::vector<EquivalenceClass> out;
  out.reserve(groups.size());
  for (auto& [sig, members] : groups) out.push_back({sig, std::move(members)});
  return out;
}

/// Class index of each basis state.
inline std::vector<std::size_t> class_lookup(std::span<const EquivalenceClass> classes, std::size_t dim) {
  std::vector<std::size_t> lookup(dim, 0);
  for (std::size_t k = 0; k < classes.size(); ++k)
    for (std::size_t u : classes[k].members) lookup[u] = k;
  return lookup;
}

/// w_k = sum over members u of |c_u|^2.
inline std::vector<double> class_weights(const ManyBodyState& state, std::span<const EquivalenceClass> classes) {
  std::vector<double> w(classes.size(), 0.0);
  for (std::size_t k = 0; k < classes.size(); ++k)
    for (std::size_t u : classes[k].members) w[k] += state.probability(u);
  return w;
}

/// Predicted end-state class probabilities: the class weights of the initial state.
inline std::vector<double> class_probabilities_initial(const ManyBodyState& initial,
                                                       std::span<const EquivalenceClass> classes) {
  return class_weights(initial, classes);
}

}  // namespace scatterloc
