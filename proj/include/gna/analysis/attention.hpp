#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gna/model/transformer.hpp"
#include "gna/nn/tensor.hpp"
#include "gna/problems/problem.hpp"
#include "gna/random.hpp"

namespace gna::analysis {

// Attention probabilities averaged over a batch of samples at a fixed beta.
struct AttentionRecord {
  std::size_t n_vars = 0;
  std::size_t n_samples = 0;
  double beta = 0.0;
  // Per layer, [n+1, n+1] over the full sequence (start token at index 0); rows sum to 1.
  std::vector<nn::Tensor> full;
  std::vector<BitString> samples;

  std::size_t n_layers() const { return full.size(); }
  // Entry (i, j) is the attention paid, while predicting variable i, to the position that
  // holds variable j (0-based). Position i predicts variable i and holds variable i - 1, so
  // the block is full(i, j + 1): the last row and the start-token column are dropped, and
  // entries with j >= i are zero by causality.
  nn::Tensor variable_block(std::size_t layer) const;
  // Layer average of the variable blocks.
  nn::Tensor layer_average() const;
};

// Averages the per-layer maps of a forward trace over its batch.
AttentionRecord average_trace(const model::ForwardTrace& trace, double beta);

// Draws n_samples configurations with model.sample (consuming exactly the same RNG stream)
// and averages the attention maps of full forward passes over them, chunk by chunk.
AttentionRecord collect_attention(const model::Transformer& model, double beta, std::size_t n_samples, Rng& rng,
                                  std::size_t chunk = 256);

// 0/1 matrix with A_ij = 1 iff variables i and j share a clause; 3-SAT and XORSAT only.
nn::Tensor variable_adjacency(const problems::Problem& problem);

class AdjacencyScore {
 public:
  static constexpr double kDefaultAlpha = 0.15;
  static constexpr std::size_t kDefaultLength = 10;

  // S = sum_{k=1..l} alpha^{k-1} A^k. A must be square, symmetric, 0/1 with zero diagonal,
  // and 0 < alpha < 1/|lambda_max(A)|.
  AdjacencyScore(const nn::Tensor& adjacency, double alpha = kDefaultAlpha, std::size_t length = kDefaultLength);

  const nn::Tensor& matrix() const { return score_; }
  double alpha() const { return alpha_; }
  std::size_t length() const { return length_; }
  double lambda_max() const { return lambda_max_; }
  std::size_t size() const { return score_.dim(0); }

 private:
  nn::Tensor score_;
  double alpha_;
  std::size_t length_;
  double lambda_max_ = 0.0;
};

// Largest eigenvalue magnitude of a symmetric matrix.
double spectral_radius(const nn::Tensor& symmetric);

// Standard Pearson r; nullopt when either series has zero variance or fewer than 2 points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Paired series over the strict lower triangle (i > j) of the layer-averaged attention.
struct PairSeries {
  std::vector<std::pair<std::size_t, std::size_t>> index;
  std::vector<double> attention;
  std::vector<double> score;
};
PairSeries attention_score_pairs(const AttentionRecord& record, const AdjacencyScore& score);

struct CorrelationReport {
  std::optional<double> r;  // nullopt: zero variance in a series
  std::size_t pairs = 0;
  std::string note;
};
CorrelationReport attention_structure_correlation(const AttentionRecord& record, const AdjacencyScore& score);

// CSV exports: square matrices as plain rows; pairs as "i,j,attention,score".
std::string matrix_to_csv(const nn::Tensor& m);
nn::Tensor matrix_from_csv(const std::string& text);
std::string pairs_to_csv(const PairSeries& pairs);
PairSeries pairs_from_csv(const std::string& text);

}  // namespace gna::analysis
