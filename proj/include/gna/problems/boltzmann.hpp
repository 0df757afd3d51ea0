#pragma once

#include <vector>

#include "gna/problems/problem.hpp"

namespace gna::problems {

inline constexpr std::size_t kMaxEnumerationSize = 20;

// p(x, beta) = exp(-beta f(x)) / Z(beta) over every configuration. Entry k belongs to the
// configuration whose bit i is bit i of k, matching all_bitstrings().
struct BoltzmannTable {
  std::vector<double> energies;  // f(x)
  std::vector<double> probabilities;
  std::vector<double> log_probabilities;
  double log_partition = 0.0;  // ln Z(beta)
};

BoltzmannTable exact_boltzmann_table(const Problem& problem, double beta);
// Same table for explicit objective values.
BoltzmannTable boltzmann_from_energies(std::vector<double> energies, double beta);

}  // namespace gna::problems
