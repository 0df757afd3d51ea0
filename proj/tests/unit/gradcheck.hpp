#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "gna/nn/ops.hpp"

namespace gna::testing {

// Central finite differences over every entry of every parameter, compared with
// the tape's adjoints. Returns the largest |a - n| / max(floor, |a|, |n|).
inline double max_gradient_error(nn::ParameterSet& params, const std::function<nn::Var(nn::Tape&)>& loss_fn,
                                 double step = 1e-5, double floor = 1e-2) {
  nn::Gradients analytic;
  {
    nn::Tape tape(&params);
    analytic = tape.backward(loss_fn(tape));
  }
  auto eval = [&] {
    nn::Tape tape(&params);
    return loss_fn(tape).value().item();
  };
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double saved = params[p][i];
      params[p][i] = saved + step;
      const double up = eval();
      params[p][i] = saved - step;
      const double down = eval();
      params[p][i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[p][i];
      const double err = std::abs(a - numeric) / std::max({floor, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

inline nn::Tensor random_tensor(nn::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  nn::Tensor t(std::move(shape));
  for (auto& v : t.data()) v = u(rng);
  return t;
}

}  // namespace gna::testing
