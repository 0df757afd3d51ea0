#include "gna/training/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gna/model/sampler.hpp"
#include "gna/training/losses.hpp"

namespace gna::training {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

BitString uniform_bits(std::size_t n, Rng& rng) {
  BitString x(n);
  for (std::size_t i = 0; i < n; ++i) x.set(i, uniform01(rng) < 0.5);
  return x;
}

double evaluate_checked(const problems::Problem& problem, const BitString& x) {
  const double f = problem.evaluate(x);
  if (!std::isfinite(f)) throw std::domain_error("objective returned a non-finite value for x = " + x.to_string());
  return f;
}

void fit_step(model::Transformer& model, nn::AdamOptimizer& opt, const ReplayBuffer::Unique& data, double beta) {
  if (data.configs.size() < 2) return;
  nn::Tape tape(&model.params());
  const nn::Var loss = partial_kl_loss(tape, model, data.configs, data.energies, beta);
  opt.step(model.params(), tape.backward(loss));
}

std::string solver_label(Variant v) { return "gna-" + variant_name(v); }

}  // namespace

std::string regime_name(Regime r) { return r == Regime::Limited ? "limited" : "unlimited"; }

std::optional<Regime> parse_regime(std::string_view name) {
  if (name == "limited") return Regime::Limited;
  if (name == "unlimited") return Regime::Unlimited;
  return std::nullopt;
}

TrainRunConfig TrainRunConfig::limited(Variant variant, std::size_t budget) {
  TrainRunConfig c;
  c.regime = Regime::Limited;
  c.variant = variant;
  c.query_budget = budget;
  c.steps_per_query = variant == Variant::SA ? 5 : 25;
  c.n_layers = 3;
  c.hidden = 20;
  c.optimizer.learning_rate = 8.2e-4;
  c.optimizer.weight_decay = 1.5e-4;
  return c;
}

TrainRunConfig TrainRunConfig::unlimited(std::size_t max_steps) {
  TrainRunConfig c;
  c.regime = Regime::Unlimited;
  c.variant = Variant::PT;
  c.max_steps = max_steps;
  c.n_layers = 4;
  c.hidden = 32;
  c.optimizer.learning_rate = 5e-4;
  c.optimizer.weight_decay = 0.0;
  return c;
}

void TrainRunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid run configuration: ") + what);
  };
  require(n_layers > 0 && hidden > 0, "model depth and width must be positive");
  require(init_stddev >= 0.0, "init_stddev must be non-negative");
  require(optimizer.learning_rate > 0.0, "learning rate must be positive");
  if (regime == Regime::Limited) {
    require(init_random_queries >= 1, "init_random_queries must be positive");
    require(query_budget >= init_random_queries, "query budget must cover the initial random queries");
    require(steps_per_query >= 1, "steps_per_query must be positive");
    require(init_validation < init_random_queries, "initial validation split must leave training entries");
    require(train_probability >= 0.0 && train_probability <= 1.0, "train_probability must lie in [0, 1]");
    require(reversion_window >= 1, "reversion window must be positive");
  } else {
    require(max_steps >= 1, "max_steps must be positive");
    require(n_unique >= 1 && n_batch >= n_unique, "need n_batch >= n_unique >= 1");
  }
}

model::ModelConfig TrainRunConfig::model_config(std::size_t n_vars) const {
  model::ModelConfig m{n_vars, n_layers, hidden, 1, 2};
  m.validate();
  return m;
}

std::size_t default_step_cap(problems::ProblemKind kind, std::size_t n) {
  if (kind == problems::ProblemKind::ThreeSat) return std::max<std::size_t>(1, n * n * n / 8);
  return 10'000;
}

void CheckpointWindow::push(nn::ParameterSet params, double validation_loss) {
  entries_.emplace_back(std::move(params), validation_loss);
}

std::optional<std::size_t> CheckpointWindow::best_index() const {
  if (entries_.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].second <= entries_[best].second) best = i;
  return best;
}

std::optional<std::size_t> checkpoint_revert(const CheckpointWindow& window, nn::ParameterSet& params) {
  const auto best = window.best_index();
  if (best) params = window.params(*best);
  return best;
}

std::vector<BitString> select_queries(const model::Transformer& model, double beta, const ReplayBuffer& buffer,
                                      Rng& rng, std::size_t k, std::size_t retry_cap) {
  if (k < 1) throw std::invalid_argument("select_queries needs k >= 1");
  std::vector<BitString> out;
  std::unordered_set<BitString, BitStringHash> chosen;
  for (std::size_t q = 0; q < k; ++q) {
    BitString x;
    for (std::size_t attempt = 0;; ++attempt) {
      x = model.sample(beta, 1, rng).front();
      const bool fresh = !buffer.contains(x) && !chosen.contains(x);
      if (fresh || attempt >= retry_cap) break;
    }
    chosen.insert(x);
    out.push_back(std::move(x));
  }
  return out;
}

RunResult run_limited(const problems::Problem& problem, const TrainRunConfig& cfg, const AnnealSchedule& schedule,
                      Rng& rng) {
  cfg.validate();
  if (cfg.regime != Regime::Limited) throw std::invalid_argument("run_limited needs a limited-regime configuration");
  const std::size_t n = problem.dimension();
  RunResult res{RunHistory{}, model::Transformer::initialized(cfg.model_config(n), rng, cfg.init_stddev)};
  RunHistory& hist = res.history;
  hist.solver = solver_label(cfg.variant);
  model::Transformer& model = res.model;
  nn::AdamOptimizer opt(model.params(), cfg.optimizer);
  const Stopwatch clock;
  const double budget = static_cast<double>(cfg.query_budget);

  ReplayBuffer buffer;
  CheckpointWindow window;
  ReplayBuffer::Unique train_set;

  auto train_and_snapshot = [&](double progress) {
    for (std::size_t s = 0; s < cfg.steps_per_query; ++s) fit_step(model, opt, train_set, schedule.training_beta(progress, rng));
    const auto val = buffer.unique(Split::Validation);
    if (val.configs.size() >= 2) {
      window.push(model.params(), partial_kl_loss(model, val.configs, val.energies, schedule.beta_max(progress)));
    }
  };

  try {
    // Initial random queries; the validation share never takes the best of them.
    std::vector<BitString> xs;
    std::vector<double> fs;
    for (std::size_t k = 0; k < cfg.init_random_queries; ++k) {
      xs.push_back(uniform_bits(n, rng));
      fs.push_back(evaluate_checked(problem, xs.back()));
      ++hist.queries;
      hist.append(k + 1, xs.back(), fs.back(), schedule.query_beta(static_cast<double>(k) / budget),
                  clock.seconds());
    }
    const auto best = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < xs.size(); ++k)
      if (k != best) order.push_back(k);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> validation(xs.size(), false);
    for (std::size_t k = 0; k < cfg.init_validation; ++k) validation[order[k]] = true;
    for (std::size_t k = 0; k < xs.size(); ++k) buffer.add(xs[k], fs[k], validation[k] ? Split::Validation : Split::Train);
    train_set = buffer.unique(Split::Train);

    std::size_t m = cfg.init_random_queries;
    train_and_snapshot(static_cast<double>(m) / budget);

    while (m < cfg.query_budget) {
      const double progress = static_cast<double>(m) / budget;
      const double beta = schedule.query_beta(progress);
      const BitString x = select_queries(model, beta, buffer, rng, 1, cfg.query_retry_cap).front();
      const double f = evaluate_checked(problem, x);
      ++hist.queries;
      ++m;
      const bool improves = f < buffer.best().f;
      const Split split = improves || uniform01(rng) < cfg.train_probability ? Split::Train : Split::Validation;
      buffer.add(x, f, split);
      if (split == Split::Train) train_set = buffer.unique(Split::Train);
      hist.append(m, x, f, beta, clock.seconds());

      train_and_snapshot(progress);
      if ((m - cfg.init_random_queries) % cfg.reversion_window == 0) {
        checkpoint_revert(window, model.params());
        window.clear();
      }
    }
  } catch (const std::exception& e) {
    hist.failed = true;
    hist.error = e.what();
  }
  return res;
}

RunResult run_unlimited(const problems::Problem& problem, const TrainRunConfig& cfg, const AnnealSchedule& schedule,
                        Rng& rng) {
  cfg.validate();
  if (cfg.regime != Regime::Unlimited) {
    throw std::invalid_argument("run_unlimited needs an unlimited-regime configuration");
  }
  const std::size_t n = problem.dimension();
  RunResult res{RunHistory{}, model::Transformer::initialized(cfg.model_config(n), rng, cfg.init_stddev)};
  RunHistory& hist = res.history;
  hist.solver = solver_label(cfg.variant);
  model::Transformer& model = res.model;
  nn::AdamOptimizer opt(model.params(), cfg.optimizer);
  const Stopwatch clock;

  try {
    for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
      const double progress = static_cast<double>(step - 1) / AnnealSchedule::kUnlimitedRampSteps;
      const double beta = schedule.training_beta(progress, rng);
      const auto batch = model::sample_unique_reweighted(model, beta, cfg.n_batch, cfg.n_unique, rng);
      std::vector<double> fs(batch.size());
      std::size_t best = 0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        fs[i] = evaluate_checked(problem, batch.configs[i]);
        if (fs[i] < fs[best]) best = i;
      }
      hist.queries += batch.size();
      hist.append(step, batch.configs[best], fs[best], beta, clock.seconds());
      if (cfg.stop_at_optimum && fs[best] <= cfg.optimum_value) {
        hist.steps_to_solve = step;
        break;
      }
      const auto g = free_energy_gradient(model, batch, fs, beta);
      opt.step(model.params(), g.grads);
    }
  } catch (const std::exception& e) {
    hist.failed = true;
    hist.error = e.what();
  }
  return res;
}

}  // namespace gna::training
