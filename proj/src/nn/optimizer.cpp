#include "gna/nn/optimizer.hpp"

#include <cmath>
#include <iostream>

namespace gna::nn {

AdamOptimizer::AdamOptimizer(const ParameterSet& params, OptimizerConfig cfg)
    : cfg_(cfg), m_(zeros_like(params)), v_(zeros_like(params)) {}

bool AdamOptimizer::step(ParameterSet& params, const Gradients& grads) {
  if (grads.size() != params.size()) {
    throw ShapeError("optimizer: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(params.size()) + " parameters");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (grads[p].shape() != params[p].shape()) {
      throw ShapeError("optimizer: gradient " + shape_string(grads[p].shape()) + " for parameter " +
                       params.name(p) + " " + shape_string(params[p].shape()));
    }
    if (!grads[p].all_finite()) {
      ++skipped_;
      std::cerr << "optimizer: non-finite gradient in " << params.name(p) << ", step skipped\n";
      return false;
    }
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double decay = 1.0 - cfg_.learning_rate * cfg_.weight_decay;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto theta = params[p].data();
    auto g = grads[p].data();
    auto m = m_[p].data();
    auto v = v_[p].data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      if (cfg_.weight_decay != 0.0) theta[i] *= decay;
      theta[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
  return true;
}

}  // namespace gna::nn
