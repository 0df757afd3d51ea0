#pragma once

#include <span>

#include "gna/nn/tape.hpp"

// Differentiable primitives. Every op records its adjoint on the inputs' tape and
// throws ShapeError naming both shapes when inputs are incompatible.
namespace gna::nn {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
// x[..., N] + bias[N] broadcast over leading axes.
Var add_bias(const Var& x, const Var& bias);
Var scale(const Var& x, double factor);
Var add_scalar(const Var& x, double c);

// a[..., K] x b[K, N] -> [..., N]
Var matmul(const Var& a, const Var& b);
// Batched: a[B, M, K] x b[B, K, N] -> [B, M, N]; with transpose_b, b is [B, N, K].
Var bmm(const Var& a, const Var& b, bool transpose_b);

Var gelu(const Var& x);
Var exp(const Var& x);

// Softmax over the last axis. With `causal`, the last two axes must be square and
// row r only sees columns 0..r.
Var softmax(const Var& x, bool causal = false);
// Numerically stable log-softmax over the last axis.
Var log_softmax(const Var& x);

// Normalizes the last axis, then applies gain and bias (each [width]).
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);

// Rows of table[V, H] selected by indices -> [len(indices), H].
Var embedding(const Var& table, std::span<const int> indices);

Var reshape(const Var& x, Shape shape);
// x[R, C] -> [R], element (r, index[r]).
Var pick(const Var& x, std::span<const int> index);
// Sum over the last axis.
Var sum_last(const Var& x);
Var sum(const Var& x);
// Sum of x * weights with constant weights of the same size.
Var dot(const Var& x, const Tensor& weights);
Var logsumexp(const Var& x);

}  // namespace gna::nn
