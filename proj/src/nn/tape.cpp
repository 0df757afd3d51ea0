#include "gna/nn/tape.hpp"

#include <string>

namespace gna::nn {

const Tensor& Var::value() const {
  if (!tape_) throw TapeError("value() on an unbound Var");
  return tape_->value(id_);
}

Tape::Tape(const ParameterSet* params) : params_(params) {
  if (params_) param_nodes_.resize(params_->size());
}

Var Tape::make(Node node) {
  if (consumed_) throw TapeError("tape already consumed by backward()");
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return make(Node{std::move(value), {}, {}, false}); }

Var Tape::param(std::size_t index) {
  if (!params_) throw TapeError("tape has no bound parameter set");
  if (index >= param_nodes_.size()) throw std::out_of_range("parameter index out of range");
  if (auto id = param_nodes_[index]) return Var(this, *id);
  Var v = make(Node{(*params_)[index], {}, {}, true});
  param_nodes_[index] = v.id();
  return v;
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, Backward backward) {
  bool needs = false;
  for (auto id : inputs) needs = needs || nodes_.at(id).needs_grad;
  return make(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, needs});
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size() || n.grad.shape() != n.value.shape()) {
    n.grad = Tensor(n.value.shape(), 0.0);
  }
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  Node& n = nodes_[id];
  if (g.size() != n.value.size()) throw ShapeError("accumulate: gradient size does not match node " + std::to_string(id));
  if (n.grad.size() != n.value.size() || n.grad.shape() != n.value.shape()) {
    n.grad = Tensor(n.value.shape(), std::vector<double>(g.raw(), g.raw() + g.size()));
    return;
  }
  double* d = n.grad.raw();
  const double* s = g.raw();
  for (std::size_t i = 0; i < g.size(); ++i) d[i] += s[i];
}

Gradients Tape::backward(const Var& loss) {
  if (consumed_) throw TapeError("backward() called twice on the same tape");
  if (loss.tape_ != this) throw TapeError("loss was not recorded on this tape");
  if (loss.value().size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  consumed_ = true;
  visit_order_.clear();
  grad(loss.id()).fill(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    visit_order_.push_back(i);
    n.backward(*this, i);
    n.grad = Tensor();
  }

  Gradients out;
  if (!params_) return out;
  out.reserve(params_->size());
  for (std::size_t p = 0; p < params_->size(); ++p) {
    const auto& id = param_nodes_[p];
    if (id && !nodes_[*id].grad.empty()) {
      out.push_back(std::move(nodes_[*id].grad));
    } else {
      out.emplace_back((*params_)[p].shape(), 0.0);
    }
  }
  return out;
}

}  // namespace gna::nn
