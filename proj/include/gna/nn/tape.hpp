#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gna/nn/parameters.hpp"
#include "gna/nn/tensor.hpp"

namespace gna::nn {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Records a forward pass so adjoints can be replayed in reverse order.
// A tape is single-owner; backward() may be called once.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(const ParameterSet* params = nullptr);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf for parameter `index` of the bound set; repeated calls return the same leaf.
  Var param(std::size_t index);

  // Used by primitive ops.
  Var record(Tensor value, std::vector<std::size_t> inputs, Backward backward);
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  // Adjoint buffer of node `id`, zero-initialized on first access.
  Tensor& grad(std::size_t id);
  // Adds `g` (same element count) to the adjoint of `id`, copying instead on first access.
  void accumulate(std::size_t id, const Tensor& g);

  // Adjoints of every bound parameter (zeros for parameters absent from the graph).
  Gradients backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  // Order in which the last backward() visited recorded ops (for tests).
  const std::vector<std::size_t>& visit_order() const { return visit_order_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Backward backward;
    bool needs_grad = false;
  };

  Var make(Node node);

  const ParameterSet* params_;
  std::deque<Node> nodes_;
  std::vector<std::optional<std::size_t>> param_nodes_;
  std::vector<std::size_t> visit_order_;
  bool consumed_ = false;
};

}  // namespace gna::nn
