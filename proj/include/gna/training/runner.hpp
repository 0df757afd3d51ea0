#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gna/model/transformer.hpp"
#include "gna/nn/optimizer.hpp"
#include "gna/problems/problem.hpp"
#include "gna/training/history.hpp"
#include "gna/training/replay_buffer.hpp"
#include "gna/training/schedule.hpp"

namespace gna::training {

enum class Regime { Limited, Unlimited };

std::string regime_name(Regime r);  // "limited", "unlimited"
std::optional<Regime> parse_regime(std::string_view name);

struct TrainRunConfig {
  Regime regime = Regime::Limited;
  Variant variant = Variant::PT;

  // Limited regime.
  std::size_t query_budget = 200;
  std::size_t steps_per_query = 25;
  std::size_t init_random_queries = 20;
  std::size_t init_validation = 2;
  double train_probability = 0.9;
  std::size_t reversion_window = 20;
  std::size_t query_retry_cap = 64;

  // Unlimited regime.
  std::size_t max_steps = 0;
  std::uint64_t n_batch = 1'000'000;
  std::uint64_t n_unique = 1'000;
  bool stop_at_optimum = true;
  double optimum_value = 0.0;

  // Model width/depth; n_vars comes from the instance.
  std::size_t n_layers = 3;
  std::size_t hidden = 20;
  double init_stddev = 0.02;
  nn::OptimizerConfig optimizer;

  // Limited-regime presets: 5 (SA) or 25 (PT) steps per query, AdamW lr 8.2e-4, wd 1.5e-4, 3x20 model.
  static TrainRunConfig limited(Variant variant, std::size_t budget = 200);
  // Adam lr 5e-4, 4x32 model, batch 1e6 / 1e3 unique.
  static TrainRunConfig unlimited(std::size_t max_steps);

  void validate() const;
  model::ModelConfig model_config(std::size_t n_vars) const;
};

// Unlimited-regime step caps: n^3 / 8 for 3-SAT, 1e4 otherwise.
std::size_t default_step_cap(problems::ProblemKind kind, std::size_t n);

struct RunResult {
  RunHistory history;
  model::Transformer model;
};

// Checkpoints (parameters with their validation loss) from the current reversion window.
class CheckpointWindow {
 public:
  void push(nn::ParameterSet params, double validation_loss);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }
  // Argmin of the validation loss, ties toward the most recent; nullopt when empty.
  std::optional<std::size_t> best_index() const;
  const nn::ParameterSet& params(std::size_t i) const { return entries_.at(i).first; }
  double loss(std::size_t i) const { return entries_.at(i).second; }

 private:
  std::vector<std::pair<nn::ParameterSet, double>> entries_;
};

// Installs the best checkpoint of the window into `params`. Returns its index, or nullopt
// (leaving params untouched) when the window is empty.
std::optional<std::size_t> checkpoint_revert(const CheckpointWindow& window, nn::ParameterSet& params);

// k candidates drawn at beta. A candidate already in the buffer (or already chosen) is
// redrawn; after `retry_cap` redraws the duplicate is accepted.
std::vector<BitString> select_queries(const model::Transformer& model, double beta, const ReplayBuffer& buffer,
                                      Rng& rng, std::size_t k, std::size_t retry_cap = 64);

// Active-learning loop under a query budget.
RunResult run_limited(const problems::Problem& problem, const TrainRunConfig& cfg, const AnnealSchedule& schedule,
                      Rng& rng);
// Free-energy training with unlimited queries; stops at the first step whose batch reaches
// the optimum when cfg.stop_at_optimum is set.
RunResult run_unlimited(const problems::Problem& problem, const TrainRunConfig& cfg, const AnnealSchedule& schedule,
                        Rng& rng);

}  // namespace gna::training
