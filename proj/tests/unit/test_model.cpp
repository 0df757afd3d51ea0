#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "gna/model/checkpoint.hpp"
#include "gna/model/sampler.hpp"
#include "gna/model/transformer.hpp"

using namespace gna;
using namespace gna::model;

namespace {

ModelConfig small_config(std::size_t n, std::size_t layers = 2, std::size_t hidden = 8) {
  return ModelConfig{n, layers, hidden, 1, 2};
}

// Wider initialization so the distribution is visibly non-uniform.
Transformer random_model(std::size_t n, std::uint64_t seed, std::size_t layers = 2, std::size_t hidden = 8) {
  Rng rng(seed);
  return Transformer::initialized(small_config(n, layers, hidden), rng, 0.5);
}

Transformer saturated_model(std::size_t n) {
  Transformer m(small_config(n));
  m.params()[m.head_bias_slot()][1] = 30.0;
  return m;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

std::size_t index_of(const BitString& x) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) idx |= static_cast<std::size_t>(x[i]) << i;
  return idx;
}

}  // namespace

TEST_CASE("presets match the two regimes") {
  CHECK(ModelConfig::limited_query(25) == ModelConfig{25, 3, 20, 1, 2});
  CHECK(ModelConfig::unlimited_query(20) == ModelConfig{20, 4, 32, 1, 2});
  CHECK_THROWS(ModelConfig{10, 2, 8, 2, 2}.validate());
  CHECK_THROWS(ModelConfig{10, 2, 8, 1, 3}.validate());
}

TEST_CASE("positional embeddings have a start-token row") {
  Transformer m(small_config(7));
  CHECK(m.params()[m.position_embedding_slot()].shape() == nn::Shape{8, 8});
  CHECK(m.params()[m.temperature_weight_slot()].shape() == nn::Shape{1, 8});
}

TEST_CASE("zero network predicts fair coins") {
  Transformer m(small_config(8));
  const auto logits = m.forward_logits(BitString::from_string("0110"), 3.0);
  CHECK(logits[0] == 0.0);
  CHECK(logits[1] == 0.0);
  const double lp = m.log_prob(BitString::from_string("01101001"), 0.7);
  CHECK(lp == doctest::Approx(8.0 * std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("forward_logits rejects bad input") {
  Transformer m(small_config(4));
  CHECK_THROWS_AS(m.forward_logits(BitString(2), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(m.forward_logits(BitString(2), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(m.forward_logits(BitString(4), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(m.log_prob(BitString(5), 1.0), std::invalid_argument);
}

TEST_CASE("log_prob normalizes over all configurations") {
  const auto all = all_bitstrings(10);
  for (std::uint64_t seed : {1u, 2u}) {
    const Transformer m = random_model(10, seed);
    for (double beta : {0.1, 1.0, 10.0}) {
      const auto lp = m.log_prob(all, beta);
      double total = 0.0;
      for (double v : lp) total += std::exp(v);
      CHECK(std::abs(total - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("log_prob equals the sum of per-step log-softmax values") {
  const Transformer m = random_model(9, 3);
  Rng rng(4);
  for (const auto& x : m.sample(1.3, 5, rng)) {
    double total = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      std::vector<std::uint8_t> prefix(x.bits().begin(), x.bits().begin() + static_cast<long>(t));
      const auto logits = m.forward_logits(BitString(prefix), 1.3);
      const double lse = std::max(logits[0], logits[1]) +
                         std::log(std::exp(logits[0] - std::max(logits[0], logits[1])) +
                                  std::exp(logits[1] - std::max(logits[0], logits[1])));
      total += logits[x[t]] - lse;
    }
    CHECK(std::abs(total - m.log_prob(x, 1.3)) < 1e-12);
  }
}

TEST_CASE("sampled log_q matches log_prob") {
  const Transformer m = random_model(7, 5);
  Rng rng(6);
  std::vector<double> lq;
  const auto xs = m.sample(0.4, 20, rng, lq);
  const auto lp = m.log_prob(xs, 0.4);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(lq[i] - lp[i]) < 1e-12);
}

TEST_CASE("temperature changes the logits only through the projection") {
  Transformer m = random_model(6, 7);
  const BitString prefix = BitString::from_string("101");
  const auto a = m.forward_logits(prefix, 0.5);
  const auto b = m.forward_logits(prefix, 5.0);
  CHECK(std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) > 1e-6);

  m.params()[m.temperature_weight_slot()].fill(0.0);
  const BitString x = BitString::from_string("100110");
  const double ref = m.log_prob(x, 1.0);
  for (double beta : {0.01, 0.3, 7.0, 100.0}) CHECK(m.log_prob(x, beta) == ref);
}

TEST_CASE("changing bit j leaves earlier conditionals untouched") {
  const Transformer m = random_model(8, 8);
  Rng rng(9);
  const auto xs = m.sample(1.0, 4, rng);
  for (const auto& x : xs) {
    for (std::size_t j = 0; j < 8; ++j) {
      BitString y = x;
      y.flip(j);
      const ForwardTrace a = m.trace(std::span(&x, 1), 1.0);
      const ForwardTrace b = m.trace(std::span(&y, 1), 1.0);
      // output position t predicts x_t (0-based) from x_0..x_{t-1}
      for (std::size_t t = 0; t <= j; ++t) {
        CHECK(a.logits.at(t, 0) == b.logits.at(t, 0));
        CHECK(a.logits.at(t, 1) == b.logits.at(t, 1));
      }
    }
  }
}

TEST_CASE("zero network samples fair bits") {
  Transformer m(small_config(12));
  Rng rng(10);
  const auto xs = m.sample(1.0, 100000, rng);
  std::vector<double> mean(12, 0.0);
  for (const auto& x : xs)
    for (std::size_t i = 0; i < 12; ++i) mean[i] += x[i];
  for (double v : mean) {
    CHECK(v / 1e5 >= 0.494);
    CHECK(v / 1e5 <= 0.506);
  }
}

TEST_CASE("saturated head always emits ones") {
  const Transformer m = saturated_model(10);
  Rng rng(11);
  for (const auto& x : m.sample(2.0, 1000, rng)) CHECK(x.count() == 10);
}

TEST_CASE("empirical sampling distribution matches log_prob") {
  const Transformer m = random_model(6, 12, 1, 8);
  const auto all = all_bitstrings(6);
  const auto lp = m.log_prob(all, 0.8);
  std::vector<double> exact(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) exact[i] = std::exp(lp[i]);
  Rng rng(13);
  std::vector<double> empirical(64, 0.0);
  const std::size_t draws = 1'000'000;
  for (const auto& x : m.sample(0.8, draws, rng)) empirical[index_of(x)] += 1.0 / draws;
  CHECK(tv_distance(exact, empirical) < 0.02);
}

TEST_CASE("reweighted sampler exhausts tiny spaces") {
  const Transformer m = random_model(4, 14);
  Rng rng(15);
  const auto batch = sample_unique_reweighted(m, 1.0, 1'000'000, 1000, rng);
  CHECK(batch.size() == 16);
  CHECK(batch.total_weight() == 1'000'000);
  std::map<std::string, int> seen;
  for (const auto& x : batch.configs) seen[x.to_string()]++;
  CHECK(seen.size() == 16);
  const auto lp = m.log_prob(batch.configs, 1.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(batch.weights[i] > 0);
    CHECK(std::abs(batch.log_q[i] - lp[i]) < 1e-12);
    // counts follow the multinomial: within 6 sigma of the expectation
    const double p = std::exp(lp[i]);
    CHECK(std::abs(static_cast<double>(batch.weights[i]) - 1e6 * p) < 6.0 * std::sqrt(1e6 * p * (1 - p)) + 1.0);
  }
}

TEST_CASE("reweighted sampler on a deterministic model returns one configuration") {
  const Transformer m = saturated_model(9);
  Rng rng(16);
  const auto batch = sample_unique_reweighted(m, 1.0, 1'000'000, 1000, rng);
  REQUIRE(batch.size() == 1);
  CHECK(batch.weights[0] == 1'000'000);
  CHECK(batch.configs[0].count() == 9);
}

TEST_CASE("reweighted sampler freezes once prefixes exceed the unique budget") {
  const Transformer m = random_model(12, 17);
  Rng rng(18);
  const auto batch = sample_unique_reweighted(m, 1.0, 100000, 50, rng);
  CHECK(batch.size() > 50);
  CHECK(batch.size() <= 100);
  CHECK(batch.total_weight() == 100000);
  std::map<std::string, int> seen;
  for (const auto& x : batch.configs) seen[x.to_string()]++;
  CHECK(seen.size() == batch.size());
  CHECK_THROWS(sample_unique_reweighted(m, 1.0, 10, 20, rng));
}

TEST_CASE("reweighted estimates are unbiased") {
  const Transformer m = random_model(8, 19);
  const auto all = all_bitstrings(8);
  auto statistic = [](const BitString& x) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) v += (i % 3 == 0 ? 2.0 : 1.0) * x[i];
    return v + (x[0] == x[7] ? 3.0 : 0.0);
  };
  const auto lp = m.log_prob(all, 1.5);
  double exact = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) exact += std::exp(lp[i]) * statistic(all[i]);

  auto estimate = [&](std::uint64_t seed, std::uint64_t n_unique, std::uint64_t n_batch = 100000) {
    Rng rng(seed);
    const auto batch = sample_unique_reweighted(m, 1.5, n_batch, n_unique, rng);
    std::vector<double> values;
    for (const auto& x : batch.configs) values.push_back(statistic(x));
    return weighted_mean(batch, values);
  };

  // Default budgets, per-seed relative error averaged over 20 seeds.
  double mean_error = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    mean_error += std::abs(estimate(100 + seed, kDefaultUnique, kDefaultBatch) - exact) / exact / 20.0;
  }
  CHECK(mean_error < 0.01);

  // Tiny unique budget: large per-batch noise, but no bias beyond 4 standard errors.
  const int runs = 400;
  double s1 = 0.0, s2 = 0.0;
  for (int r = 0; r < runs; ++r) {
    const double e = estimate(1000 + r, 4);
    s1 += e;
    s2 += e * e;
  }
  const double mean = s1 / runs;
  const double se = std::sqrt((s2 / runs - mean * mean) / (runs - 1));
  CHECK(std::abs(mean - exact) < 4.0 * se);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  Transformer m = random_model(5, 20, 2, 6);
  Rng rng(21);
  rng.discard(17);
  const std::string text = checkpoint_to_string(m, rng);
  Checkpoint back = checkpoint_from_string(text);
  CHECK(back.model.config() == m.config());
  CHECK(back.model.params() == m.params());
  CHECK(back.rng == rng);
  CHECK(checkpoint_to_string(back.model, back.rng) == text);
  CHECK_THROWS(checkpoint_from_string(R"({"format":"other"})"));
}
