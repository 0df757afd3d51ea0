#include <cmath>
#include <numeric>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "gna/nn/ops.hpp"
#include "gna/problems/benchmarks.hpp"
#include "gna/problems/boltzmann.hpp"
#include "gna/training/losses.hpp"
#include "gna/training/runner.hpp"
#include "gradcheck.hpp"

using namespace gna;
using namespace gna::training;

namespace {

model::Transformer random_model(std::size_t n, std::uint64_t seed, double stddev = 0.5) {
  Rng rng(seed);
  return model::Transformer::initialized(model::ModelConfig{n, 2, 8, 1, 2}, rng, stddev);
}

// Objective that fails on a chosen configuration.
class BrokenProblem final : public problems::Problem {
 public:
  explicit BrokenProblem(std::size_t n) : Problem(0), n_(n) {}
  problems::ProblemKind kind() const override { return problems::ProblemKind::Xorsat; }
  std::size_t dimension() const override { return n_; }
  double evaluate(const BitString& x) const override {
    return x.count() == n_ ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(x.count());
  }

 private:
  std::size_t n_;
};

}  // namespace

TEST_CASE("limited schedule endpoints and log-linear ramp") {
  const auto s = AnnealSchedule::limited(Variant::PT);
  CHECK(s.beta_max(0.0) == 0.057);
  CHECK(s.beta_max(0.33) == 69.7);
  CHECK(s.beta_max(0.9) == 69.7);
  CHECK(s.beta_min() == 0.057);
  double prev = 0.0;
  for (int k = 0; k <= 33; ++k) {
    const double b = s.beta_max(k / 100.0);
    CHECK(b >= prev);
    // equally spaced in log beta
    CHECK(std::log(b) == doctest::Approx(std::log(0.057) + k / 33.0 * (std::log(69.7) - std::log(0.057))));
    prev = b;
  }
}

TEST_CASE("unlimited schedule is truncated, not rescaled") {
  const auto s = AnnealSchedule::unlimited(Variant::PT);
  CHECK(s.beta_max(0.0) == 1.0);
  CHECK(s.beta_max(1.0) == 100.0);
  CHECK(s.beta_max(0.5) == doctest::Approx(10.0));
  // 1000 steps of a 2e4-step ramp
  CHECK(s.beta_max(1000.0 / AnnealSchedule::kUnlimitedRampSteps) == doctest::Approx(std::pow(100.0, 0.05)));
  CHECK_THROWS(AnnealSchedule(0.0, 1.0, 2.0, 1.0, Variant::SA));
  CHECK_THROWS(AnnealSchedule(1.0, 0.5, 2.0, 1.0, Variant::SA));
}

TEST_CASE("training temperature per variant") {
  Rng rng(1);
  const auto sa = AnnealSchedule::limited(Variant::SA);
  const auto pt = AnnealSchedule::limited(Variant::PT);
  double lo = 1e9, hi = 0.0;
  for (int i = 0; i < 2000; ++i) {
    CHECK(sa.training_beta(0.2, rng) == sa.beta_max(0.2));
    const double b = pt.training_beta(0.2, rng);
    CHECK(b >= pt.beta_min());
    CHECK(b <= pt.beta_max(0.2));
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  CHECK(hi - lo > 0.9 * (pt.beta_max(0.2) - pt.beta_min()));
}

TEST_CASE("replay buffer bookkeeping") {
  ReplayBuffer b;
  b.add(BitString::from_string("000"), 3.0, Split::Train);
  b.add(BitString::from_string("001"), 1.0, Split::Validation);
  b.add(BitString::from_string("011"), 1.0, Split::Train);
  b.add(BitString::from_string("000"), 3.0, Split::Train);
  CHECK(b.best_index() == 1);
  CHECK(b.count(Split::Train) == 3);
  CHECK(b.unique(Split::Train).configs.size() == 2);
  CHECK(b.contains(BitString::from_string("011")));
  CHECK_FALSE(b.contains(BitString::from_string("111")));
}

TEST_CASE("partial KL hand example") {
  const model::Transformer uniform(model::ModelConfig{3, 1, 4, 1, 2});
  const std::vector<BitString> xs{BitString::from_string("000"), BitString::from_string("101")};
  const double loss = partial_kl_loss(uniform, xs, {0.0, 1.0}, std::log(2.0));
  const double expected = 2.0 / 3.0 * std::log(4.0 / 3.0) + 1.0 / 3.0 * std::log(2.0 / 3.0);
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
  CHECK(loss == doctest::Approx(0.0566).epsilon(1e-3));
  // equal objective values against a uniform model
  CHECK(std::abs(partial_kl_loss(uniform, xs, {2.0, 2.0}, 3.0)) < 1e-15);
  CHECK_THROWS(partial_kl_loss(uniform, {xs[0]}, {0.0}, 1.0));
}

TEST_CASE("partial KL is non-negative, shift invariant and matches its tape value") {
  Rng rng(2);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    model::Transformer m = random_model(7, 10 + seed);
    const auto xs = m.sample(1.0, 30, rng);
    std::vector<BitString> uniq;
    for (const auto& x : xs)
      if (std::find(uniq.begin(), uniq.end(), x) == uniq.end()) uniq.push_back(x);
    std::vector<double> f;
    for (std::size_t i = 0; i < uniq.size(); ++i) f.push_back(uniform01(rng) * 5.0);
    std::vector<double> shifted = f;
    for (double& v : shifted) v += 123.0;

    const double loss = partial_kl_loss(m, uniq, f, 0.7);
    CHECK(loss >= 0.0);
    CHECK(std::abs(partial_kl_loss(m, uniq, shifted, 0.7) - loss) < 1e-10);

    nn::Tape t1(&m.params()), t2(&m.params());
    const nn::Var l1 = partial_kl_loss(t1, m, uniq, f, 0.7);
    const nn::Var l2 = partial_kl_loss(t2, m, uniq, shifted, 0.7);
    CHECK(std::abs(l1.value().item() - loss) < 1e-12);
    const auto g1 = t1.backward(l1);
    const auto g2 = t2.backward(l2);
    double worst = 0.0;
    for (std::size_t p = 0; p < g1.size(); ++p)
      for (std::size_t i = 0; i < g1[p].size(); ++i) worst = std::max(worst, std::abs(g1[p][i] - g2[p][i]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("partial KL gradient agrees with finite differences") {
  model::Transformer m = random_model(5, 3, 0.3);
  const auto all = all_bitstrings(5);
  std::vector<BitString> xs(all.begin(), all.begin() + 12);
  std::vector<double> f;
  for (std::size_t i = 0; i < xs.size(); ++i) f.push_back(static_cast<double>((i * 7) % 5));
  const double err = testing::max_gradient_error(m.params(), [&](nn::Tape& t) {
    return partial_kl_loss(t, m, xs, f, 1.3);
  });
  CHECK(err < 1e-5);
}

TEST_CASE("partial KL on a buffer deduplicates each split") {
  const model::Transformer m = random_model(4, 4);
  ReplayBuffer b;
  b.add(BitString::from_string("0000"), 1.0, Split::Train);
  b.add(BitString::from_string("0110"), 0.0, Split::Train);
  b.add(BitString::from_string("0000"), 1.0, Split::Train);
  b.add(BitString::from_string("1111"), 2.0, Split::Validation);
  const double direct =
      partial_kl_loss(m, {BitString::from_string("0000"), BitString::from_string("0110")}, {1.0, 0.0}, 2.0);
  CHECK(partial_kl_loss(m, b, 2.0, Split::Train) == direct);
  CHECK_THROWS(partial_kl_loss(m, b, 2.0, Split::Validation));
}

TEST_CASE("constant local free energy gives an exactly zero gradient") {
  const model::Transformer m(model::ModelConfig{6, 2, 8, 1, 2});
  Rng rng(5);
  const auto batch = model::sample_unique_reweighted(m, 1.0, 10000, 100, rng);
  const std::vector<double> f(batch.size(), 2.5);
  const auto g = free_energy_gradient(m, batch, f, 1.0);
  for (const auto& t : g.grads)
    for (double v : t.data()) CHECK(v == 0.0);
  CHECK(g.stats.variance == 0.0);
}

TEST_CASE("exact Boltzmann table has zero-variance local free energy") {
  const auto p = problems::Xorsat::generate(6, 6);
  for (double beta : {0.3, 1.0, 4.0}) {
    const auto table = problems::exact_boltzmann_table(p, beta);
    const std::vector<double> w(table.energies.size(), 1.0);
    const auto s = free_energy_stats(table.energies, table.log_probabilities, w, beta);
    CHECK(s.variance < 1e-10);
    CHECK(std::abs(s.mean + table.log_partition / beta) < 1e-9);
  }
}

TEST_CASE("exact free-energy gradient oracle agrees with finite differences") {
  model::Transformer m = random_model(4, 7, 0.3);
  const auto p = problems::Xorsat::generate(4, 8);
  const auto table = problems::exact_boltzmann_table(p, 1.0);
  const auto all = all_bitstrings(4);
  const nn::Tensor f({all.size()}, table.energies);
  const double err = testing::max_gradient_error(m.params(), [&](nn::Tape& t) {
    const nn::Var lq = m.log_prob(t, all, 0.8);
    const nn::Var q = nn::exp(lq);
    return nn::add(nn::dot(q, f), nn::scale(nn::sum(nn::mul(q, lq)), 1.0 / 0.8));
  });
  CHECK(err < 1e-5);
}

TEST_CASE("REINFORCE estimate matches the enumerated gradient") {
  const model::Transformer m = random_model(6, 9, 0.3);
  const auto p = problems::Xorsat::generate(6, 10);
  const auto table = problems::exact_boltzmann_table(p, 1.0);
  for (double beta : {0.5, 2.0}) {
    const auto exact = testing::exact_free_energy_gradient(m, table.energies, beta);
    Rng rng(11);
    nn::Gradients mean = nn::zeros_like(m.params());
    const int batches = 20;
    for (int b = 0; b < batches; ++b) {
      const auto batch = model::sample_unique_reweighted(m, beta, 100000, 1000, rng);
      const auto g = free_energy_gradient(m, batch, problems::evaluate_all(p, batch.configs), beta);
      for (std::size_t t = 0; t < mean.size(); ++t)
        for (std::size_t i = 0; i < mean[t].size(); ++i) mean[t][i] += g.grads[t][i] / batches;
    }
    CHECK(testing::cosine_similarity(mean, exact) > 0.99);
  }
}

TEST_CASE("non-finite objective values abort the gradient") {
  const model::Transformer m(model::ModelConfig{3, 1, 4, 1, 2});
  Rng rng(12);
  const auto batch = model::sample_unique_reweighted(m, 1.0, 1000, 10, rng);
  std::vector<double> f(batch.size(), 1.0);
  f[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(free_energy_gradient(m, batch, f, 1.0), std::domain_error);
}

TEST_CASE("checkpoint reversion picks the lowest validation loss") {
  model::Transformer m = random_model(3, 13);
  auto tagged = [&](double v) {
    nn::ParameterSet p = m.params();
    p[0][0] = v;
    return p;
  };
  CheckpointWindow w;
  nn::ParameterSet target = m.params();
  CHECK_FALSE(checkpoint_revert(w, target));
  CHECK(target == m.params());

  w.push(tagged(10.0), 5.0);
  CHECK(checkpoint_revert(w, target) == 0);
  CHECK(target[0][0] == 10.0);

  w.clear();
  for (double loss : {3.0, 1.0, 2.0}) w.push(tagged(loss), loss);
  CHECK(checkpoint_revert(w, target) == 1);
  CHECK(target[0][0] == 1.0);

  w.clear();
  for (double loss : {4.0, 3.0, 2.0, 1.0}) w.push(tagged(loss), loss);
  CHECK(w.best_index() == 3);

  w.clear();
  w.push(tagged(1.0), 0.5);
  w.push(tagged(2.0), 0.5);
  CHECK(w.best_index() == 1);
}

TEST_CASE("query selection") {
  Rng rng(14);
  model::Transformer saturated(model::ModelConfig{5, 1, 4, 1, 2});
  saturated.params()[saturated.head_bias_slot()][1] = 40.0;
  ReplayBuffer b;
  b.add(BitString(5, 1), 0.0, Split::Train);
  const auto q = select_queries(saturated, 1.0, b, rng, 3, 5);
  REQUIRE(q.size() == 3);
  for (const auto& x : q) CHECK(x == BitString(5, 1));

  // untrained model: fair coins, and fresh queries avoid the buffer
  const model::Transformer fresh = model::Transformer::initialized(model::ModelConfig::limited_query(25), rng);
  const auto xs = select_queries(fresh, 1.0, b, rng, 400);
  double ones = 0.0;
  for (const auto& x : xs) {
    ones += static_cast<double>(x.count());
    CHECK_FALSE(b.contains(x));
  }
  const double trials = 400.0 * 25.0;
  CHECK(std::abs(ones / trials - 0.5) < 4.0 * std::sqrt(0.25 / trials));
  CHECK_THROWS(select_queries(fresh, 1.0, b, rng, 0));
}

TEST_CASE("budget equal to the initial queries") {
  const auto p = problems::Xorsat::generate(10, 15);
  auto cfg = TrainRunConfig::limited(Variant::PT, 20);
  Rng rng(16);
  Rng init_rng(16);
  const model::Transformer init = model::Transformer::initialized(cfg.model_config(10), init_rng, cfg.init_stddev);
  const auto res = run_limited(p, cfg, AnnealSchedule::limited(Variant::PT), rng);
  CHECK_FALSE(res.history.failed);
  CHECK(res.history.records.size() == 20);
  CHECK(res.history.queries == 20);
  CHECK_FALSE(res.model.params() == init.params());
}

TEST_CASE("limited run history") {
  const auto p = problems::Xorsat::generate(10, 17);
  for (Variant v : {Variant::SA, Variant::PT}) {
    auto cfg = TrainRunConfig::limited(v, 60);
    cfg.steps_per_query = 3;
    Rng rng(18);
    const auto res = run_limited(p, cfg, AnnealSchedule::limited(v), rng);
    REQUIRE_FALSE(res.history.failed);
    REQUIRE(res.history.records.size() == 60);
    for (std::size_t i = 0; i < 60; ++i) CHECK(res.history.records[i].m == i + 1);
    CHECK(res.history.best_is_monotone());
    CHECK(p.evaluate(*res.history.best_x) == *res.history.final_best());
    CHECK(res.history.solver == "gna-" + variant_name(v));

    Rng again(18);
    const auto rerun = run_limited(p, cfg, AnnealSchedule::limited(v), again);
    for (std::size_t i = 0; i < 60; ++i) {
      CHECK(rerun.history.records[i].f == res.history.records[i].f);
      CHECK(rerun.history.records[i].beta == res.history.records[i].beta);
    }
  }
}

TEST_CASE("run configurations are validated") {
  const auto p = problems::Xorsat::generate(10, 19);
  Rng rng(20);
  auto cfg = TrainRunConfig::limited(Variant::SA, 10);
  CHECK_THROWS_AS(run_limited(p, cfg, AnnealSchedule::limited(Variant::SA), rng), std::invalid_argument);
  CHECK_THROWS_AS(run_unlimited(p, TrainRunConfig::unlimited(0), AnnealSchedule::unlimited(Variant::PT), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_unlimited(p, TrainRunConfig::limited(Variant::SA), AnnealSchedule::unlimited(Variant::PT), rng),
                  std::invalid_argument);
  CHECK(default_step_cap(problems::ProblemKind::ThreeSat, 20) == 1000);
  CHECK(default_step_cap(problems::ProblemKind::Xorsat, 20) == 10000);
}

TEST_CASE("unlimited run stops on the first batch containing the optimum") {
  const auto p = problems::Xorsat::generate(5, 21);
  Rng rng(22);
  auto cfg = TrainRunConfig::unlimited(50);
  cfg.n_layers = 1;
  cfg.hidden = 8;
  const auto res = run_unlimited(p, cfg, AnnealSchedule::unlimited(Variant::PT), rng);
  CHECK(res.history.steps_to_solve == 1);
  CHECK(res.history.records.size() == 1);
  CHECK(res.history.queries == 32);
  CHECK(*res.history.final_best() == 0.0);
}

TEST_CASE("unlimited run records every step when it does not stop") {
  const auto p = problems::ThreeSat::generate(8, 23);
  Rng rng(24);
  auto cfg = TrainRunConfig::unlimited(5);
  cfg.n_layers = 1;
  cfg.hidden = 8;
  cfg.n_batch = 1000;
  cfg.n_unique = 20;
  cfg.stop_at_optimum = false;
  const auto res = run_unlimited(p, cfg, AnnealSchedule::unlimited(Variant::PT), rng);
  CHECK(res.history.records.size() == 5);
  CHECK_FALSE(res.history.steps_to_solve);
  CHECK(res.history.best_is_monotone());
  for (const auto& r : res.history.records) {
    CHECK(r.beta >= 0.1);
    CHECK(r.beta <= 100.0);
  }
}

TEST_CASE("evaluator failures abort with the partial history kept") {
  const BrokenProblem p(3);
  Rng rng(25);
  auto cfg = TrainRunConfig::unlimited(10);
  cfg.n_layers = 1;
  cfg.hidden = 4;
  const auto res = run_unlimited(p, cfg, AnnealSchedule::unlimited(Variant::PT), rng);
  CHECK(res.history.failed);
  CHECK(res.history.error.find("non-finite") != std::string::npos);

  auto lim = TrainRunConfig::limited(Variant::SA, 40);
  lim.init_random_queries = 20;
  Rng rng2(26);
  const auto lres = run_limited(p, lim, AnnealSchedule::limited(Variant::SA), rng2);
  CHECK(lres.history.failed);
  CHECK(lres.history.records.size() < 40);
}

TEST_CASE("fitting a full buffer recovers the Boltzmann table") {
  const auto p = problems::ThreeSat::generate(6, 27, 3.0);
  const double beta = 1.0;
  const auto table = problems::exact_boltzmann_table(p, beta);
  const auto all = all_bitstrings(6);
  Rng rng(28);
  model::Transformer m = model::Transformer::initialized(model::ModelConfig{6, 2, 16, 1, 2}, rng);
  nn::AdamOptimizer opt(m.params(), nn::OptimizerConfig{1e-2});
  for (int step = 0; step < 1500; ++step) {
    nn::Tape tape(&m.params());
    opt.step(m.params(), tape.backward(partial_kl_loss(tape, m, all, table.energies, beta)));
  }
  CHECK(partial_kl_loss(m, all, table.energies, beta) < 1e-3);
  const auto lq = m.log_prob(all, beta);
  std::vector<double> q(lq.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::exp(lq[i]);
  CHECK(testing::total_variation(q, table.probabilities) < 0.05);
}

TEST_CASE("history CSV round-trip") {
  RunHistory h;
  h.append(1, BitString::from_string("01"), 3.0, 0.057, 0.25);
  h.append(2, BitString::from_string("11"), 1.0 / 3.0, 0.1, 0.5);
  h.append(3, BitString::from_string("10"), 2.0, 0.2, 0.75);
  CHECK(h.best_is_monotone());
  CHECK(h.records[2].best_f == 1.0 / 3.0);
  CHECK(h.best_x == BitString::from_string("11"));
  const std::string csv = history_to_csv(h);
  CHECK(csv.rfind("m,f,best_f,beta,elapsed_s\n", 0) == 0);
  const RunHistory back = history_from_csv(csv);
  REQUIRE(back.records.size() == 3);
  CHECK(back.records[1].f == 1.0 / 3.0);
  CHECK(back.records[2].best_f == 1.0 / 3.0);
  CHECK_THROWS(history_from_csv("x,y\n"));
  CHECK_THROWS(history_from_csv("m,f,best_f,beta,elapsed_s\n1,2,3\n"));
}
