#include "gna/nn/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "gna/nn/kernels.hpp"

namespace gna::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
                   shape_string(b));
}

Tape& same_tape(const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) throw TapeError("operands recorded on different tapes");
  return a.tape();
}

}  // namespace

Var add(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  if (a.shape() != b.shape()) mismatch("add", a.shape(), b.shape());
  Tensor out = a.value();
  const Tensor& vb = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    for (auto id : {ia, ib})
      if (t.needs_grad(id)) t.accumulate(id, g);
  });
}

Var sub(const Var& a, const Var& b) { return add(a, scale(b, -1.0)); }

Var mul(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  if (a.shape() != b.shape()) mismatch("mul", a.shape(), b.shape());
  Tensor out = a.value();
  const Tensor& vb = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& va = t.value(ia);
    const Tensor& vb = t.value(ib);
    if (t.needs_grad(ia)) {
      Tensor& d = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * vb[i];
    }
    if (t.needs_grad(ib)) {
      Tensor& d = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * va[i];
    }
  });
}

Var add_bias(const Var& x, const Var& bias) {
  Tape& tape = same_tape(x, bias);
  if (x.value().rank() == 0 || bias.value().rank() != 1 || bias.shape()[0] != x.shape().back()) {
    mismatch("add_bias", x.shape(), bias.shape());
  }
  const std::size_t width = x.shape().back();
  const std::size_t rows = leading_rows(x.value());
  Tensor out = x.value();
  double* vo = out.raw();
  const double* vb = bias.value().raw();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < width; ++c) vo[r * width + c] += vb[c];
  const auto ix = x.id(), ib = bias.id();
  return tape.record(std::move(out), {ix, ib}, [ix, ib, rows, width](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.needs_grad(ix)) t.accumulate(ix, g);
    if (t.needs_grad(ib)) {
      double* d = t.grad(ib).raw();
      const double* gv = g.raw();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < width; ++c) d[c] += gv[r * width + c];
    }
  });
}

Var scale(const Var& x, double factor) {
  Tensor out = x.value();
  for (auto& v : out.data()) v *= factor;
  const auto ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix, factor](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& d = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += factor * g[i];
  });
}

Var add_scalar(const Var& x, double c) {
  Tensor out = x.value();
  for (auto& v : out.data()) v += c;
  const auto ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix](Tape& t, std::size_t self) { t.accumulate(ix, t.grad(self)); });
}

Var matmul(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  const Tensor& va = a.value();
  const Tensor& vb = b.value();
  if (va.rank() < 1 || vb.rank() != 2 || va.shape().back() != vb.dim(0)) {
    mismatch("matmul", va.shape(), vb.shape());
  }
  const std::size_t rows = leading_rows(va), inner = vb.dim(0), cols = vb.dim(1);
  Shape out_shape = va.shape();
  out_shape.back() = cols;
  Tensor out(out_shape);
  kernels::linear(va.raw(), rows, inner, vb.raw(), nullptr, cols, out.raw());
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [=](Tape& t, std::size_t self) {
    ConstMap G(t.grad(self).raw(), rows, cols);
    if (t.needs_grad(ia)) {
      Map dA(t.grad(ia).raw(), rows, inner);
      dA.noalias() += G * ConstMap(t.value(ib).raw(), inner, cols).transpose();
    }
    if (t.needs_grad(ib)) {
      Map dB(t.grad(ib).raw(), inner, cols);
      dB.noalias() += ConstMap(t.value(ia).raw(), rows, inner).transpose() * G;
    }
  });
}

Var bmm(const Var& a, const Var& b, bool transpose_b) {
  Tape& tape = same_tape(a, b);
  const Tensor& va = a.value();
  const Tensor& vb = b.value();
  if (va.rank() != 3 || vb.rank() != 3 || va.dim(0) != vb.dim(0)) mismatch("bmm", va.shape(), vb.shape());
  const std::size_t batch = va.dim(0), m = va.dim(1), k = va.dim(2);
  const std::size_t bk = transpose_b ? vb.dim(2) : vb.dim(1);
  const std::size_t n = transpose_b ? vb.dim(1) : vb.dim(2);
  if (bk != k) mismatch("bmm", va.shape(), vb.shape());
  Tensor out({batch, m, n});
  for (std::size_t i = 0; i < batch; ++i) {
    ConstMap A(va.raw() + i * m * k, m, k);
    Map C(out.raw() + i * m * n, m, n);
    if (transpose_b) {
      C.noalias() = A * ConstMap(vb.raw() + i * n * k, n, k).transpose();
    } else {
      C.noalias() = A * ConstMap(vb.raw() + i * k * n, k, n);
    }
  }
  const auto ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    const bool da = t.needs_grad(ia), db = t.needs_grad(ib);
    Tensor* gA = da ? &t.grad(ia) : nullptr;
    Tensor* gB = db ? &t.grad(ib) : nullptr;
    for (std::size_t i = 0; i < batch; ++i) {
      ConstMap G(g.raw() + i * m * n, m, n);
      ConstMap Ai(A.raw() + i * m * k, m, k);
      if (transpose_b) {
        ConstMap Bi(B.raw() + i * n * k, n, k);
        if (da) Map(gA->raw() + i * m * k, m, k).noalias() += G * Bi;
        if (db) Map(gB->raw() + i * n * k, n, k).noalias() += G.transpose() * Ai;
      } else {
        ConstMap Bi(B.raw() + i * k * n, k, n);
        if (da) Map(gA->raw() + i * m * k, m, k).noalias() += G * Bi.transpose();
        if (db) Map(gB->raw() + i * k * n, k, n).noalias() += Ai.transpose() * G;
      }
    }
  });
}

Var gelu(const Var& x) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  AlignedDoubles t(in.size());
  kernels::gelu(in.raw(), in.size(), out.raw(), t.data());
  const auto ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix, t = std::move(t)](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    kernels::gelu_backward(tp.value(ix).raw(), t.data(), g.raw(), g.size(), tp.grad(ix).raw());
  });
}

Var exp(const Var& x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = std::exp(v);
  const auto ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& d = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * y[i];
  });
}

Var softmax(const Var& x, bool causal) {
  const Tensor& in = x.value();
  if (in.rank() == 0) throw ShapeError("softmax: scalar input " + shape_string(in.shape()));
  const std::size_t len = in.shape().back();
  const std::size_t rows = leading_rows(in);
  if (causal && (in.rank() < 2 || in.shape()[in.rank() - 2] != len)) {
    throw ShapeError("causal softmax needs square trailing axes, got " + shape_string(in.shape()));
  }
  Tensor out(in.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t visible = causal ? (r % len) + 1 : len;
    kernels::softmax_row(in.raw() + r * len, len, visible, out.raw() + r * len);
  }
  const auto ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix, rows, len](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& d = t.grad(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* yr = y.raw() + r * len;
      const double* gr = g.raw() + r * len;
      double dotp = 0.0;
      for (std::size_t c = 0; c < len; ++c) dotp += yr[c] * gr[c];
      for (std::size_t c = 0; c < len; ++c) d[r * len + c] += yr[c] * (gr[c] - dotp);
    }
  });
}

Var log_softmax(const Var& x) {
  const Tensor& in = x.value();
  if (in.rank() == 0) throw ShapeError("log_softmax: scalar input " + shape_string(in.shape()));
  const std::size_t len = in.shape().back();
  const std::size_t rows = leading_rows(in);
  Tensor out(in.shape());
  for (std::size_t r = 0; r < rows; ++r) kernels::log_softmax_row(in.raw() + r * len, len, out.raw() + r * len);
  const auto ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix, rows, len](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& d = t.grad(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      double gsum = 0.0;
      for (std::size_t c = 0; c < len; ++c) gsum += g[r * len + c];
      for (std::size_t c = 0; c < len; ++c) d[r * len + c] += g[r * len + c] - std::exp(y[r * len + c]) * gsum;
    }
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  Tape& tape = same_tape(x, gain);
  same_tape(x, bias);
  const Tensor& in = x.value();
  if (in.rank() == 0 || gain.shape() != Shape{in.shape().back()}) mismatch("layer_norm", in.shape(), gain.shape());
  if (bias.shape() != gain.shape()) mismatch("layer_norm", gain.shape(), bias.shape());
  const std::size_t width = in.shape().back();
  const std::size_t rows = leading_rows(in);
  Tensor out(in.shape());
  AlignedDoubles rstd(rows), mean(rows);
  kernels::layer_norm(in.raw(), rows, width, gain.value().raw(), bias.value().raw(), eps, out.raw(), mean.data(),
                      rstd.data());
  const auto ix = x.id(), ig = gain.id(), ib = bias.id();
  return tape.record(std::move(out), {ix, ig, ib},
                     [=, rstd = std::move(rstd), mean = std::move(mean)](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad(self);
                       const Tensor& xin = t.value(ix);
                       const Tensor& gam = t.value(ig);
                       Tensor* dx = t.needs_grad(ix) ? &t.grad(ix) : nullptr;
                       Tensor* dg = t.needs_grad(ig) ? &t.grad(ig) : nullptr;
                       Tensor* db = t.needs_grad(ib) ? &t.grad(ib) : nullptr;
                       AlignedDoubles xhat(width), dxhat(width);
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* gr = g.raw() + r * width;
                         double m1 = 0.0, m2 = 0.0;
                         for (std::size_t c = 0; c < width; ++c) {
                           xhat[c] = (xin[r * width + c] - mean[r]) * rstd[r];
                           dxhat[c] = gr[c] * gam[c];
                           m1 += dxhat[c];
                           m2 += dxhat[c] * xhat[c];
                           if (dg) (*dg)[c] += gr[c] * xhat[c];
                           if (db) (*db)[c] += gr[c];
                         }
                         if (!dx) continue;
                         m1 /= static_cast<double>(width);
                         m2 /= static_cast<double>(width);
                         for (std::size_t c = 0; c < width; ++c) {
                           (*dx)[r * width + c] += rstd[r] * (dxhat[c] - m1 - xhat[c] * m2);
                         }
                       }
                     });
}

Var embedding(const Var& table, std::span<const int> indices) {
  const Tensor& tab = table.value();
  if (tab.rank() != 2) throw ShapeError("embedding: table must be rank 2, got " + shape_string(tab.shape()));
  const std::size_t vocab = tab.dim(0), width = tab.dim(1);
  Tensor out({indices.size(), width});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int idx = indices[r];
    if (idx < 0 || static_cast<std::size_t>(idx) >= vocab) {
      throw ShapeError("embedding: index " + std::to_string(idx) + " outside table " + shape_string(tab.shape()));
    }
    std::copy_n(tab.raw() + idx * width, width, out.raw() + r * width);
  }
  const auto it = table.id();
  std::vector<int> idx(indices.begin(), indices.end());
  return table.tape().record(std::move(out), {it}, [it, width, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& d = t.grad(it);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < width; ++c) d[idx[r] * width + c] += g[r * width + c];
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  const auto ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix](Tape& t, std::size_t self) { t.accumulate(ix, t.grad(self)); });
}

Var pick(const Var& x, std::span<const int> index) {
  const Tensor& in = x.value();
  if (in.rank() != 2 || in.dim(0) != index.size()) {
    mismatch("pick", in.shape(), Shape{index.size()});
  }
  const std::size_t rows = in.dim(0), cols = in.dim(1);
  Tensor out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    if (index[r] < 0 || static_cast<std::size_t>(index[r]) >= cols) {
      throw ShapeError("pick: index " + std::to_string(index[r]) + " outside " + shape_string(in.shape()));
    }
    out[r] = in.at(r, index[r]);
  }
  const auto ix = x.id();
  std::vector<int> idx(index.begin(), index.end());
  return x.tape().record(std::move(out), {ix}, [ix, cols, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& d = t.grad(ix);
    for (std::size_t r = 0; r < idx.size(); ++r) d[r * cols + idx[r]] += g[r];
  });
}

Var sum_last(const Var& x) {
  const Tensor& in = x.value();
  if (in.rank() == 0) throw ShapeError("sum_last: scalar input");
  const std::size_t len = in.shape().back(), rows = leading_rows(in);
  Shape shape(in.shape().begin(), in.shape().end() - 1);
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < len; ++c) s += in[r * len + c];
    out[r] = s;
  }
  const auto ix = x.id();
  return x.tape().record(std::move(out), {ix}, [ix, rows, len](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor& d = t.grad(ix);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < len; ++c) d[r * len + c] += g[r];
  });
}

Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const auto ix = x.id();
  return x.tape().record(Tensor::scalar(s), {ix}, [ix](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    Tensor& d = t.grad(ix);
    for (auto& v : d.data()) v += g;
  });
}

Var dot(const Var& x, const Tensor& weights) {
  if (x.value().size() != weights.size()) mismatch("dot", x.shape(), weights.shape());
  double s = 0.0;
  const Tensor& vx = x.value();
  for (std::size_t i = 0; i < weights.size(); ++i) s += vx[i] * weights[i];
  const auto ix = x.id();
  return x.tape().record(Tensor::scalar(s), {ix}, [ix, weights](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    Tensor& d = t.grad(ix);
    for (std::size_t i = 0; i < weights.size(); ++i) d[i] += g * weights[i];
  });
}

Var logsumexp(const Var& x) {
  const Tensor& in = x.value();
  if (in.empty()) throw ShapeError("logsumexp of empty tensor");
  const double lse = kernels::log_sum_exp(in.raw(), in.size());
  const auto ix = x.id();
  return x.tape().record(Tensor::scalar(lse), {ix}, [ix](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const double out = t.value(self)[0];
    const Tensor& xin = t.value(ix);
    Tensor& d = t.grad(ix);
    for (std::size_t i = 0; i < xin.size(); ++i) d[i] += g * std::exp(xin[i] - out);
  });
}

}  // namespace gna::nn
