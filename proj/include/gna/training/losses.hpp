#pragma once

#include <vector>

#include "gna/model/sampler.hpp"
#include "gna/model/transformer.hpp"
#include "gna/training/replay_buffer.hpp"

namespace gna::training {

// KL(p~ || q~) between the Boltzmann and model distributions renormalized over the given
// distinct configurations. Differentiable through the model only. Needs >= 2 configurations.
nn::Var partial_kl_loss(nn::Tape& tape, const model::Transformer& model, const std::vector<BitString>& configs,
                        const std::vector<double>& energies, double beta);
double partial_kl_loss(const model::Transformer& model, const std::vector<BitString>& configs,
                       const std::vector<double>& energies, double beta);
// Deduplicates the split first.
double partial_kl_loss(const model::Transformer& model, const ReplayBuffer& buffer, double beta, Split split);

// F_loc(x) = f(x) + log q(x) / beta
std::vector<double> local_free_energy(const std::vector<double>& energies, const std::vector<double>& log_q,
                                      double beta);

// Weighted mean and (population) variance of F_loc.
struct FreeEnergyStats {
  double mean = 0.0;
  double variance = 0.0;
};
FreeEnergyStats free_energy_stats(const std::vector<double>& energies, const std::vector<double>& log_q,
                                  const std::vector<double>& weights, double beta);

struct FreeEnergyGradient {
  nn::Gradients grads;
  FreeEnergyStats stats;
};

// REINFORCE estimate <(F_loc - <F_loc>) grad log q> with batch-weighted means for both the
// baseline and the outer expectation. `energies` holds f for each batch configuration.
FreeEnergyGradient free_energy_gradient(const model::Transformer& model, const model::WeightedSampleBatch& batch,
                                        const std::vector<double>& energies, double beta);

}  // namespace gna::training
