#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "gna/bitstring.hpp"
#include "gna/nn/ops.hpp"
#include "gna/random.hpp"

namespace gna::model {

struct ModelConfig {
  std::size_t n_vars = 0;
  std::size_t n_layers = 3;
  std::size_t hidden = 20;
  std::size_t n_heads = 1;
  std::size_t vocab = 2;

  // 3 layers, width 20.
  static ModelConfig limited_query(std::size_t n_vars);
  // 4 layers, width 32.
  static ModelConfig unlimited_query(std::size_t n_vars);

  void validate() const;
  std::size_t ff_width() const { return 4 * hidden; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Attention probabilities captured during a full-sequence pass.
struct ForwardTrace {
  std::size_t batch = 0;
  std::size_t length = 0;            // tokens per sequence, start token included
  std::vector<nn::Tensor> attention;  // per layer, [batch, length, length]
  nn::Tensor logits;                  // [batch * length, vocab]
};

// Decoder-only transformer q(x | beta) over bit strings. Input sequence is the start
// token followed by the bits; log(beta) is projected to the model width and added to
// every token embedding.
class Transformer {
 public:
  // All parameters zero.
  explicit Transformer(ModelConfig cfg);
  // Gaussian(0, 0.02) weights, zero biases, unit layer-norm gains.
  static Transformer initialized(ModelConfig cfg, Rng& rng, double stddev = 0.02);

  const ModelConfig& config() const { return cfg_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  // Recorded log q(x | beta) for each configuration -> Var of shape [B].
  nn::Var log_prob(nn::Tape& tape, std::span<const BitString> xs, double beta) const;
  std::vector<double> log_prob(std::span<const BitString> xs, double beta) const;
  double log_prob(const BitString& x, double beta) const;

  // Next-bit logits after `prefix` (length t < n).
  std::array<double, 2> forward_logits(const BitString& prefix, double beta) const;

  std::vector<BitString> sample(double beta, std::size_t count, Rng& rng) const;
  // Same draws as sample(), also returning log q of each draw.
  std::vector<BitString> sample(double beta, std::size_t count, Rng& rng, std::vector<double>& log_q) const;

  // Full pass over [start, x_1..x_n] capturing attention probabilities.
  ForwardTrace trace(std::span<const BitString> xs, double beta) const;

  // Parameter indices.
  struct LayerSlots {
    std::size_t ln1_gain, ln1_bias, wq, bq, wk, bk, wv, bv, wo, bo, ln2_gain, ln2_bias, w1, b1, w2, b2;
  };
  std::size_t token_embedding_slot() const { return tok_; }
  std::size_t position_embedding_slot() const { return pos_; }
  std::size_t temperature_weight_slot() const { return temp_w_; }
  std::size_t temperature_bias_slot() const { return temp_b_; }
  std::size_t head_weight_slot() const { return head_w_; }
  std::size_t head_bias_slot() const { return head_b_; }
  std::size_t final_gain_slot() const { return lnf_g_; }
  std::size_t final_bias_slot() const { return lnf_b_; }
  const LayerSlots& layer(std::size_t l) const { return layers_.at(l); }

  // Replaces all parameter values; names and shapes must match.
  void load_params(const nn::ParameterSet& values);

 private:
  nn::Var forward(nn::Tape& tape, std::span<const int> tokens, std::size_t batch, std::size_t length, double beta,
                  std::vector<nn::Var>* attention) const;
  void check_beta(double beta) const;

  ModelConfig cfg_;
  nn::ParameterSet params_;
  std::size_t tok_ = 0, pos_ = 0, temp_w_ = 0, temp_b_ = 0, lnf_g_ = 0, lnf_b_ = 0, head_w_ = 0, head_b_ = 0;
  std::vector<LayerSlots> layers_;

  friend class IncrementalDecoder;
};

// Tape-free autoregressive decoding with per-row key/value caches.
class IncrementalDecoder {
 public:
  IncrementalDecoder(const Transformer& model, double beta, std::size_t batch);

  std::size_t batch() const { return batch_; }
  std::size_t position() const { return position_; }

  // Consumes one token per row at the current position; returns logits [batch x 2], row-major.
  const nn::AlignedDoubles& step(std::span<const int> tokens);
  // Rebuilds the batch from existing rows (duplicates allowed).
  void select(std::span<const std::size_t> rows);
  const nn::AlignedDoubles& logits() const { return logits_; }

 private:
  const Transformer& model_;
  std::size_t batch_;
  std::size_t capacity_;
  std::size_t position_ = 0;
  nn::AlignedDoubles temperature_;
  std::vector<nn::AlignedDoubles> keys_;    // per layer [batch, capacity, hidden]
  std::vector<nn::AlignedDoubles> values_;  // per layer [batch, capacity, hidden]
  nn::AlignedDoubles logits_;
};

}  // namespace gna::model
