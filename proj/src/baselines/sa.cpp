#include "gna/baselines/sa.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace gna::baselines {

void SaConfig::validate() const {
  if (!(beta_start > 0.0) || !(beta_start < beta_final) || !std::isfinite(beta_final)) {
    throw std::invalid_argument("SA schedule needs 0 < beta_start < beta_final");
  }
  if (budget < 1) throw std::invalid_argument("SA budget must be at least 1");
}

double SaConfig::beta_at(std::size_t k) const {
  if (budget <= 1 || k == 0) return beta_start;
  if (k + 1 >= budget) return beta_final;
  const double s = static_cast<double>(k) / static_cast<double>(budget - 1);
  return beta_start * std::pow(beta_final / beta_start, s);
}

double metropolis_acceptance(double delta, double beta) {
  if (delta <= 0.0) return 1.0;
  return std::exp(-beta * delta);
}

MetropolisChain::MetropolisChain(const problems::Problem& problem, BitString start)
    : problem_(problem), x_(std::move(start)), f_(problem.evaluate(x_)), proposal_(x_), proposal_f_(f_) {}

bool MetropolisChain::step(double beta, Rng& rng) {
  const std::size_t i = std::uniform_int_distribution<std::size_t>(0, x_.size() - 1)(rng);
  proposal_ = x_;
  proposal_.flip(i);
  proposal_f_ = problem_.evaluate(proposal_);
  ++queries_;
  const double delta = proposal_f_ - f_;
  const bool accept = delta <= 0.0 || uniform01(rng) < metropolis_acceptance(delta, beta);
  if (accept) {
    x_ = proposal_;
    f_ = proposal_f_;
  }
  return accept;
}

training::RunHistory sa_run(const problems::Problem& problem, const SaConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  training::RunHistory hist;
  hist.solver = "sa";
  try {
    BitString x(problem.dimension());
    for (std::size_t i = 0; i < x.size(); ++i) x.set(i, uniform01(rng) < 0.5);
    MetropolisChain chain(problem, std::move(x));
    hist.queries = 1;
    hist.append(1, chain.state(), chain.value(), cfg.beta_at(0), elapsed());
    for (std::size_t k = 1; k < cfg.budget; ++k) {
      const double beta = cfg.beta_at(k);
      chain.step(beta, rng);
      ++hist.queries;
      hist.append(k + 1, chain.last_proposal(), chain.last_proposal_value(), beta, elapsed());
    }
  } catch (const std::exception& e) {
    hist.failed = true;
    hist.error = e.what();
  }
  return hist;
}

}  // namespace gna::baselines
