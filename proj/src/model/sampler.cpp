#include "gna/model/sampler.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gna/nn/kernels.hpp"

namespace gna::model {

std::uint64_t WeightedSampleBatch::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
}

WeightedSampleBatch sample_unique_reweighted(const Transformer& model, double beta, std::uint64_t n_batch,
                                             std::uint64_t n_unique, Rng& rng) {
  if (n_unique < 1 || n_batch < n_unique) {
    throw std::invalid_argument("reweighted sampling needs n_batch >= n_unique >= 1");
  }
  const std::size_t n = model.config().n_vars;
  IncrementalDecoder dec(model, beta, 1);

  std::vector<std::vector<std::uint8_t>> prefixes(1);
  std::vector<std::uint64_t> counts{n_batch};
  std::vector<double> log_q{0.0};
  std::vector<int> tokens{0};
  bool branching = true;

  for (std::size_t t = 0; t < n; ++t) {
    const auto& logits = dec.step(tokens);
    const std::size_t rows = prefixes.size();
    if (branching) {
      std::vector<std::vector<std::uint8_t>> next;
      std::vector<std::uint64_t> next_counts;
      std::vector<double> next_log_q;
      std::vector<std::size_t> parents;
      std::vector<int> next_tokens;
      for (std::size_t r = 0; r < rows; ++r) {
        double lp[2];
        nn::kernels::log_softmax_row(&logits[2 * r], 2, lp);
        const double p1 = std::exp(lp[1]);
        const std::uint64_t ones =
            p1 >= 1.0 ? counts[r] : std::binomial_distribution<std::uint64_t>(counts[r], p1)(rng);
        const std::uint64_t split[2] = {counts[r] - ones, ones};
        for (int bit = 0; bit < 2; ++bit) {
          if (split[bit] == 0) continue;
          auto child = prefixes[r];
          child.push_back(static_cast<std::uint8_t>(bit));
          next.push_back(std::move(child));
          next_counts.push_back(split[bit]);
          next_log_q.push_back(log_q[r] + lp[bit]);
          parents.push_back(r);
          next_tokens.push_back(bit);
        }
      }
      prefixes = std::move(next);
      counts = std::move(next_counts);
      log_q = std::move(next_log_q);
      tokens = std::move(next_tokens);
      if (t + 1 < n) dec.select(parents);
      if (prefixes.size() > n_unique) branching = false;
    } else {
      for (std::size_t r = 0; r < rows; ++r) {
        double lp[2];
        nn::kernels::log_softmax_row(&logits[2 * r], 2, lp);
        const int bit = uniform01(rng) < std::exp(lp[1]) ? 1 : 0;
        prefixes[r].push_back(static_cast<std::uint8_t>(bit));
        log_q[r] += lp[bit];
        tokens[r] = bit;
      }
    }
  }

  WeightedSampleBatch out;
  out.configs.reserve(prefixes.size());
  for (auto& p : prefixes) out.configs.emplace_back(std::move(p));
  out.weights = std::move(counts);
  out.log_q = std::move(log_q);
  return out;
}

double weighted_mean(const WeightedSampleBatch& batch, const std::vector<double>& values) {
  if (values.size() != batch.size()) throw std::invalid_argument("one value per configuration expected");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) total += static_cast<double>(batch.weights[i]) * values[i];
  return total / static_cast<double>(batch.total_weight());
}

}  // namespace gna::model
