#pragma once

#include <cstddef>

// Raw forward kernels shared by the recorded ops and the tape-free inference path.
namespace gna::nn::kernels {

// y[rows,out] = x[rows,in] * w[in,out] (+ bias[out] when non-null). Overwrites y.
void linear(const double* x, std::size_t rows, std::size_t in, const double* w, const double* bias,
            std::size_t out, double* y);

// Per-row normalization over `width` features; mean/rstd outputs may be null.
void layer_norm(const double* x, std::size_t rows, std::size_t width, const double* gain,
                const double* bias, double eps, double* y, double* mean, double* rstd);

// GELU in its tanh form. `t` receives the tanh factor that the backward pass reuses.
void gelu(const double* x, std::size_t n, double* y, double* t);
// dx += g * gelu'(x), given the tanh factor from the forward pass.
void gelu_backward(const double* x, const double* t, const double* g, std::size_t n, double* dx);
double gelu(double x);
double gelu_grad(double x);

// Softmax over the first `visible` entries of a row of length `len`; the rest are set to 0.
void softmax_row(const double* in, std::size_t len, std::size_t visible, double* out);

// Stable log-softmax over a row.
void log_softmax_row(const double* in, std::size_t len, double* out);

double log_sum_exp(const double* in, std::size_t len);

}  // namespace gna::nn::kernels
