#include <cmath>
#include <stdexcept>

#include "gna/problems/benchmarks.hpp"

namespace gna::problems {

double sample_beta_one(double b, Rng& rng) {
  if (!(b > 0.0)) throw std::invalid_argument("Beta(1, b) needs b > 0");
  // 1 - U lies in (0, 1], so the draw lies in [0, 1).
  return 1.0 - std::pow(1.0 - uniform01(rng), 1.0 / b);
}

ContaminationControl::ContaminationControl(std::size_t n, std::vector<double> z0, std::vector<double> lambda,
                                           std::vector<double> gamma, std::uint64_t seed)
    : Problem(seed), n_(n), z0_(std::move(z0)), lambda_(std::move(lambda)), gamma_(std::move(gamma)) {
  if (z0_.size() != kReplicas || lambda_.size() != kReplicas * n_ || gamma_.size() != kReplicas * n_) {
    throw std::invalid_argument("contamination instance needs 100 replicas of stage draws");
  }
  for (const auto* v : {&z0_, &lambda_, &gamma_}) {
    for (double d : *v) {
      if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("contamination draws must lie in [0, 1]");
    }
  }
}

ContaminationControl ContaminationControl::generate(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> z0(kReplicas), lambda(kReplicas * n), gamma(kReplicas * n);
  for (std::size_t r = 0; r < kReplicas; ++r) {
    z0[r] = sample_beta_one(30.0, rng);
    for (std::size_t i = 0; i < n; ++i) {
      lambda[r * n + i] = sample_beta_one(17.0 / 3.0, rng);
      gamma[r * n + i] = sample_beta_one(3.0 / 7.0, rng);
    }
  }
  return ContaminationControl(n, std::move(z0), std::move(lambda), std::move(gamma), seed);
}

double ContaminationControl::evaluate(const BitString& x) const {
  check_length(x);
  double cost = 0.0;
  for (std::size_t i = 0; i < n_; ++i) cost += kCost * x[i];
  double penalty = 0.0;
  for (std::size_t r = 0; r < kReplicas; ++r) {
    double z = z0_[r];
    for (std::size_t i = 0; i < n_; ++i) {
      const double lam = lambda_[r * n_ + i];
      const double gam = gamma_[r * n_ + i];
      z = lam * (1 - x[i]) * (1.0 - z) + (1.0 - gam * x[i]) * z;
      penalty += kPenalty * ((z >= kThreshold ? 1.0 : 0.0) - kTolerance);
    }
  }
  return cost + penalty / static_cast<double>(kReplicas);
}

}  // namespace gna::problems
