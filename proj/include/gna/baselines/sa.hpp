#pragma once

#include "gna/problems/problem.hpp"
#include "gna/random.hpp"
#include "gna/training/history.hpp"

namespace gna::baselines {

// Simulated annealing with one objective evaluation per proposed single-bit flip.
struct SaConfig {
  double beta_start = 0.057;
  double beta_final = 69.7;
  std::size_t budget = 200;  // objective evaluations, the initial state included

  void validate() const;
  // Geometric beta for evaluation k in [0, budget); both endpoints exact.
  double beta_at(std::size_t k) const;
};

// Metropolis single-bit-flip chain on a black-box objective.
class MetropolisChain {
 public:
  MetropolisChain(const problems::Problem& problem, BitString start);

  // Proposes one uniformly chosen flip, evaluates it (one query) and accepts with
  // probability min(1, exp(-beta * delta)). Returns whether the flip was accepted.
  bool step(double beta, Rng& rng);

  const BitString& state() const { return x_; }
  double value() const { return f_; }
  const BitString& last_proposal() const { return proposal_; }
  double last_proposal_value() const { return proposal_f_; }
  std::size_t queries() const { return queries_; }

 private:
  const problems::Problem& problem_;
  BitString x_;
  double f_;
  BitString proposal_;
  double proposal_f_;
  std::size_t queries_ = 1;
};

// Acceptance probability of a move that changes the objective by delta.
double metropolis_acceptance(double delta, double beta);

training::RunHistory sa_run(const problems::Problem& problem, const SaConfig& cfg, Rng& rng);

}  // namespace gna::baselines
