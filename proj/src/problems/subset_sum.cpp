#include <cmath>
#include <stdexcept>

#include "gna/problems/benchmarks.hpp"

namespace gna::problems {

namespace {

// Uniform integer in [1, 2^bits].
BigInt uniform_value(std::size_t bits, Rng& rng) {
  BigInt v = 0;
  std::size_t filled = 0;
  while (filled < bits) {
    const std::size_t take = std::min<std::size_t>(64, bits - filled);
    std::uint64_t word = rng();
    if (take < 64) word &= (std::uint64_t{1} << take) - 1;
    v |= BigInt(word) << filled;
    filled += take;
  }
  return v + 1;
}

}  // namespace

SubsetSum::SubsetSum(std::vector<BigInt> values, BigInt target, std::optional<BitString> planted, std::uint64_t seed)
    : Problem(seed), values_(std::move(values)), target_(std::move(target)), planted_(std::move(planted)) {
  if (values_.empty()) throw std::invalid_argument("subset sum needs at least one value");
  for (const auto& a : values_)
    if (a < 1) throw std::invalid_argument("subset-sum values must be positive");
  if (target_ < 0) throw std::invalid_argument("subset-sum target must be non-negative");
  if (planted_ && planted_->size() != values_.size()) {
    throw std::invalid_argument("planted assignment has the wrong length");
  }
}

SubsetSum SubsetSum::generate(std::size_t n, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("subset sum needs at least 3 values");
  Rng rng = make_rng(seed);
  std::vector<BigInt> values(n);
  for (auto& a : values) a = uniform_value(n, rng);
  BitString plant(n);
  BigInt target = 0;
  for (std::size_t i = 0; i < n; ++i) {
    plant.set(i, uniform01(rng) < 0.5);
    if (plant[i]) target += values[i];
  }
  return SubsetSum(std::move(values), std::move(target), std::move(plant), seed);
}

BigInt SubsetSum::difference(const BitString& x) const {
  check_length(x);
  BigInt s = 0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (x[i]) s += values_[i];
  s -= target_;
  return s < 0 ? BigInt(-s) : s;
}

double SubsetSum::evaluate(const BitString& x) const {
  return std::log1p(difference(x).convert_to<double>());
}

}  // namespace gna::problems
