#include "gna/nn/parameters.hpp"

#include <algorithm>
#include <stdexcept>

namespace gna::nn {

std::size_t ParameterSet::add(std::string name, Tensor value) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("no parameter named " + std::string(name));
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t ParameterSet::total_values() const {
  std::size_t total = 0;
  for (const auto& v : values_) total += v.size();
  return total;
}

Gradients zeros_like(const ParameterSet& params) {
  Gradients g;
  g.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) g.emplace_back(params[i].shape(), 0.0);
  return g;
}

}  // namespace gna::nn
