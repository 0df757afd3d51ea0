#pragma once

#include <cstdint>
#include <vector>

#include "gna/bitstring.hpp"
#include "gna/model/transformer.hpp"
#include "gna/random.hpp"

namespace gna::model {

// Distinct configurations with occurrence counts standing in for a much larger batch.
struct WeightedSampleBatch {
  std::vector<BitString> configs;
  std::vector<std::uint64_t> weights;
  std::vector<double> log_q;

  std::uint64_t total_weight() const;
  std::size_t size() const { return configs.size(); }
};

inline constexpr std::uint64_t kDefaultBatch = 1'000'000;
inline constexpr std::uint64_t kDefaultUnique = 1'000;

// Splits `n_batch` virtual samples prefix by prefix with binomial draws. Once the number
// of distinct prefixes exceeds `n_unique`, branching stops and every prefix is completed
// by one ordinary autoregressive draw carrying the prefix's whole count.
WeightedSampleBatch sample_unique_reweighted(const Transformer& model, double beta, std::uint64_t n_batch,
                                             std::uint64_t n_unique, Rng& rng);

// Weighted mean of a per-configuration statistic.
double weighted_mean(const WeightedSampleBatch& batch, const std::vector<double>& values);

}  // namespace gna::model
