#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gna/problems/benchmarks.hpp"

namespace gna::problems {

namespace {

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

const std::vector<std::pair<int, int>>& IsingSparsification::edges() {
  static const std::vector<std::pair<int, int>> list = [] {
    std::vector<std::pair<int, int>> e;
    for (int r = 0; r < kSide; ++r) {
      for (int c = 0; c < kSide; ++c) {
        const int i = r * kSide + c;
        if (c + 1 < kSide) e.emplace_back(i, i + 1);
        if (r + 1 < kSide) e.emplace_back(i, i + kSide);
      }
    }
    return e;
  }();
  return list;
}

IsingSparsification::IsingSparsification(std::vector<double> couplings, double lambda, std::uint64_t seed)
    : Problem(seed), couplings_(std::move(couplings)), lambda_(lambda) {
  if (couplings_.size() != kEdges) throw std::invalid_argument("ising instance needs 24 couplings");
  const auto& e = edges();
  const std::uint32_t states = 1u << kSpins;
  agree_.resize(states);
  for (std::uint32_t z = 0; z < states; ++z) {
    std::uint32_t mask = 0;
    for (std::size_t k = 0; k < kEdges; ++k) {
      const bool a = (z >> e[k].first) & 1u;
      const bool b = (z >> e[k].second) & 1u;
      if (a == b) mask |= 1u << k;
    }
    agree_[z] = mask;
  }
  energy_p_.resize(states);
  for (std::uint32_t z = 0; z < states; ++z) energy_p_[z] = energy(z, nullptr);
  log_z_p_ = log_partition(nullptr);
  p_.resize(states);
  for (std::uint32_t z = 0; z < states; ++z) p_[z] = std::exp(energy_p_[z] - log_z_p_);
}

IsingSparsification IsingSparsification::generate(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> magnitude(0.05, 5.0);
  std::vector<double> j(kEdges);
  for (auto& v : j) {
    const double m = magnitude(rng);
    v = uniform01(rng) < 0.5 ? -m : m;
  }
  return IsingSparsification(std::move(j), kDefaultLambda, seed);
}

// Unnormalized log-weight sum_e J_e s_i s_j over the kept edges (all edges when keep is null).
double IsingSparsification::energy(std::uint32_t z, const BitString* keep) const {
  const std::uint32_t mask = agree_[z];
  double s = 0.0;
  for (std::size_t k = 0; k < kEdges; ++k) {
    if (keep && !(*keep)[k]) continue;
    s += ((mask >> k) & 1u) ? couplings_[k] : -couplings_[k];
  }
  return s;
}

double IsingSparsification::log_partition(const BitString* keep) const {
  std::vector<double> w(agree_.size());
  for (std::uint32_t z = 0; z < w.size(); ++z) w[z] = energy(z, keep);
  return log_sum_exp(w);
}

double IsingSparsification::kl_divergence(const BitString& x) const {
  check_length(x);
  std::vector<double> w(agree_.size());
  for (std::uint32_t z = 0; z < w.size(); ++z) w[z] = energy(z, &x);
  const double log_z_q = log_sum_exp(w);
  double cross = 0.0;
  for (std::uint32_t z = 0; z < w.size(); ++z) cross += p_[z] * (energy_p_[z] - w[z]);
  return std::max(0.0, cross - log_z_p_ + log_z_q);
}

double IsingSparsification::evaluate(const BitString& x) const {
  return kl_divergence(x) + lambda_ * static_cast<double>(x.count());
}

}  // namespace gna::problems
