#include "gna/training/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gna/nn/ops.hpp"

namespace gna::training {

namespace {

// Normalized Boltzmann log-weights over the given configurations.
std::vector<double> log_partial_boltzmann(const std::vector<double>& energies, double beta) {
  std::vector<double> lp(energies.size());
  for (std::size_t i = 0; i < lp.size(); ++i) lp[i] = -beta * energies[i];
  const double top = *std::max_element(lp.begin(), lp.end());
  double s = 0.0;
  for (double v : lp) s += std::exp(v - top);
  const double lse = top + std::log(s);
  for (double& v : lp) v -= lse;
  return lp;
}

void check_inputs(const std::vector<BitString>& configs, const std::vector<double>& energies, double beta) {
  if (configs.size() != energies.size()) throw std::invalid_argument("one objective value per configuration expected");
  if (configs.size() < 2) throw std::invalid_argument("partial KL needs at least 2 configurations");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
}

}  // namespace

nn::Var partial_kl_loss(nn::Tape& tape, const model::Transformer& model, const std::vector<BitString>& configs,
                        const std::vector<double>& energies, double beta) {
  check_inputs(configs, energies, beta);
  const std::size_t b = configs.size();
  const auto log_p = log_partial_boltzmann(energies, beta);
  nn::Tensor p({1, b});
  double neg_entropy = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    p[i] = std::exp(log_p[i]);
    if (p[i] > 0.0) neg_entropy += p[i] * log_p[i];
  }
  const nn::Var log_q = nn::log_softmax(nn::reshape(model.log_prob(tape, configs, beta), {1, b}));
  return nn::add_scalar(nn::scale(nn::dot(log_q, p), -1.0), neg_entropy);
}

double partial_kl_loss(const model::Transformer& model, const std::vector<BitString>& configs,
                       const std::vector<double>& energies, double beta) {
  check_inputs(configs, energies, beta);
  const auto log_p = log_partial_boltzmann(energies, beta);
  auto log_q = model.log_prob(configs, beta);
  const double top = *std::max_element(log_q.begin(), log_q.end());
  double s = 0.0;
  for (double v : log_q) s += std::exp(v - top);
  const double lse = top + std::log(s);
  double kl = 0.0;
  for (std::size_t i = 0; i < log_p.size(); ++i) {
    const double p = std::exp(log_p[i]);
    if (p > 0.0) kl += p * (log_p[i] - (log_q[i] - lse));
  }
  return kl;
}

double partial_kl_loss(const model::Transformer& model, const ReplayBuffer& buffer, double beta, Split split) {
  const auto u = buffer.unique(split);
  return partial_kl_loss(model, u.configs, u.energies, beta);
}

std::vector<double> local_free_energy(const std::vector<double>& energies, const std::vector<double>& log_q,
                                      double beta) {
  if (energies.size() != log_q.size()) throw std::invalid_argument("one log q per objective value expected");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  std::vector<double> out(energies.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = energies[i] + log_q[i] / beta;
  return out;
}

FreeEnergyStats free_energy_stats(const std::vector<double>& energies, const std::vector<double>& log_q,
                                  const std::vector<double>& weights, double beta) {
  const auto floc = local_free_energy(energies, log_q, beta);
  if (weights.size() != floc.size()) throw std::invalid_argument("one weight per configuration expected");
  double total = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < floc.size(); ++i) {
    total += weights[i];
    mean += weights[i] * floc[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights must have a positive sum");
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < floc.size(); ++i) var += weights[i] * (floc[i] - mean) * (floc[i] - mean);
  return {mean, var / total};
}

FreeEnergyGradient free_energy_gradient(const model::Transformer& model, const model::WeightedSampleBatch& batch,
                                        const std::vector<double>& energies, double beta) {
  if (energies.size() != batch.size()) throw std::invalid_argument("one objective value per configuration expected");
  for (double f : energies) {
    if (!std::isfinite(f)) throw std::domain_error("objective returned a non-finite value");
  }
  nn::Tape tape(&model.params());
  const nn::Var log_q = model.log_prob(tape, batch.configs, beta);
  const auto lq = log_q.value().data();
  std::vector<double> log_q_values(lq.begin(), lq.end());
  std::vector<double> weights(batch.size());
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = static_cast<double>(batch.weights[i]);

  FreeEnergyGradient out;
  out.stats = free_energy_stats(energies, log_q_values, weights, beta);
  const auto floc = local_free_energy(energies, log_q_values, beta);
  const double total = static_cast<double>(batch.total_weight());
  nn::Tensor coeff({batch.size()});
  for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] = weights[i] / total * (floc[i] - out.stats.mean);
  out.grads = tape.backward(nn::dot(log_q, coeff));
  return out;
}

}  // namespace gna::training
