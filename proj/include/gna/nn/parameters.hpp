#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gna/nn/tensor.hpp"

namespace gna::nn {

// Ordered, named collection of learnable tensors.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return values_.size(); }
  Tensor& operator[](std::size_t i) { return values_[i]; }
  const Tensor& operator[](std::size_t i) const { return values_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::size_t index_of(std::string_view name) const;  // throws std::out_of_range
  std::size_t total_values() const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

// One gradient tensor per parameter, same order and shapes.
using Gradients = std::vector<Tensor>;

Gradients zeros_like(const ParameterSet& params);

}  // namespace gna::nn
