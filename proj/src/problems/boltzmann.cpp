#include "gna/problems/boltzmann.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gna::problems {

BoltzmannTable boltzmann_from_energies(std::vector<double> energies, double beta) {
  if (energies.empty()) throw std::invalid_argument("empty energy table");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be finite and non-negative");
  BoltzmannTable t;
  t.energies = std::move(energies);
  const std::size_t m = t.energies.size();
  t.log_probabilities.resize(m);
  for (std::size_t k = 0; k < m; ++k) t.log_probabilities[k] = -beta * t.energies[k];
  const double top = *std::max_element(t.log_probabilities.begin(), t.log_probabilities.end());
  double s = 0.0;
  for (double v : t.log_probabilities) s += std::exp(v - top);
  t.log_partition = top + std::log(s);
  t.probabilities.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    t.log_probabilities[k] -= t.log_partition;
    t.probabilities[k] = std::exp(t.log_probabilities[k]);
  }
  return t;
}

BoltzmannTable exact_boltzmann_table(const Problem& problem, double beta) {
  const std::size_t n = problem.dimension();
  if (n > kMaxEnumerationSize) {
    throw std::invalid_argument("exact Boltzmann table refused for n = " + std::to_string(n) + " (limit " +
                                std::to_string(kMaxEnumerationSize) + ")");
  }
  return boltzmann_from_energies(evaluate_all(problem, all_bitstrings(n)), beta);
}

}  // namespace gna::problems
