#pragma once

#include <cstddef>
#include <cstdint>

#include "gna/nn/parameters.hpp"

namespace gna::nn {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Decoupled weight decay (AdamW); 0 gives plain Adam.
  double weight_decay = 0.0;
};

// Adam with bias-corrected moments; AdamW when weight_decay > 0.
class AdamOptimizer {
 public:
  AdamOptimizer(const ParameterSet& params, OptimizerConfig cfg);

  // Applies one update. Returns false (and leaves everything untouched) when any
  // gradient entry is non-finite.
  bool step(ParameterSet& params, const Gradients& grads);

  const OptimizerConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return t_; }
  std::uint64_t skipped() const { return skipped_; }

 private:
  OptimizerConfig cfg_;
  Gradients m_;
  Gradients v_;
  std::uint64_t t_ = 0;
  std::uint64_t skipped_ = 0;
};

}  // namespace gna::nn
