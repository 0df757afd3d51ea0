#include "gna/nn/kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gna::nn::kernels {

namespace {
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;
}  // namespace

void linear(const double* x, std::size_t rows, std::size_t in, const double* w, const double* bias,
            std::size_t out, double* y) {
  ConstMap X(x, rows, in);
  ConstMap W(w, in, out);
  Map Y(y, rows, out);
  Y.noalias() = X * W;
  if (bias) {
    Eigen::Map<const Eigen::RowVectorXd> b(bias, out);
    Y.rowwise() += b;
  }
}

void layer_norm(const double* x, std::size_t rows, std::size_t width, const double* gain,
                const double* bias, double eps, double* y, double* mean, double* rstd) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * width;
    double* yr = y + r * width;
    double mu = 0.0;
    for (std::size_t i = 0; i < width; ++i) mu += xr[i];
    mu /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t i = 0; i < width; ++i) var += (xr[i] - mu) * (xr[i] - mu);
    var /= static_cast<double>(width);
    const double rs = 1.0 / std::sqrt(var + eps);
    for (std::size_t i = 0; i < width; ++i) {
      const double xhat = (xr[i] - mu) * rs;
      yr[i] = gain ? gain[i] * xhat + bias[i] : xhat;
    }
    if (mean) mean[r] = mu;
    if (rstd) rstd[r] = rs;
  }
}

namespace {
constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;
using Arr = Eigen::Array<double, Eigen::Dynamic, 1>;
using ArrMap = Eigen::Map<Arr>;
using ConstArrMap = Eigen::Map<const Arr>;
}  // namespace

void gelu(const double* x, std::size_t n, double* y, double* t) {
  const auto len = static_cast<Eigen::Index>(n);
  ConstArrMap X(x, len);
  ArrMap T(t, len);
  // tanh(u) = 1 - 2 / (exp(2u) + 1) keeps the whole pass on vectorized exp.
  T = 1.0 - 2.0 / ((2.0 * kGeluScale * (X + kGeluCubic * X.cube())).exp() + 1.0);
  ArrMap(y, len) = 0.5 * X * (1.0 + T);
}

void gelu_backward(const double* x, const double* t, const double* g, std::size_t n, double* dx) {
  const auto len = static_cast<Eigen::Index>(n);
  ConstArrMap X(x, len);
  ConstArrMap T(t, len);
  ArrMap(dx, len) += ConstArrMap(g, len) * (0.5 * (1.0 + T) + 0.5 * X * (1.0 - T.square()) * kGeluScale *
                                                                   (1.0 + 3.0 * kGeluCubic * X.square()));
}

double gelu(double x) {
  double y = 0.0;
  double t = 0.0;
  gelu(&x, 1, &y, &t);
  return y;
}

double gelu_grad(double x) {
  double y = 0.0;
  double t = 0.0;
  gelu(&x, 1, &y, &t);
  const double one = 1.0;
  double d = 0.0;
  gelu_backward(&x, &t, &one, 1, &d);
  return d;
}

void softmax_row(const double* in, std::size_t len, std::size_t visible, double* out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < visible; ++i) mx = std::max(mx, in[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < visible; ++i) {
    out[i] = std::exp(in[i] - mx);
    total += out[i];
  }
  const double inv = 1.0 / total;
  for (std::size_t i = 0; i < visible; ++i) out[i] *= inv;
  for (std::size_t i = visible; i < len; ++i) out[i] = 0.0;
}

double log_sum_exp(const double* in, std::size_t len) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < len; ++i) mx = std::max(mx, in[i]);
  if (!std::isfinite(mx)) return mx;
  double total = 0.0;
  for (std::size_t i = 0; i < len; ++i) total += std::exp(in[i] - mx);
  return mx + std::log(total);
}

void log_softmax_row(const double* in, std::size_t len, double* out) {
  const double lse = log_sum_exp(in, len);
  for (std::size_t i = 0; i < len; ++i) out[i] = in[i] - lse;
}

}  // namespace gna::nn::kernels
