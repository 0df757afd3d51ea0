#include "gna/model/transformer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gna/nn/kernels.hpp"

namespace gna::model {

namespace {
constexpr double kLayerNormEps = 1e-5;
constexpr std::size_t kSampleChunk = 4096;
}  // namespace

ModelConfig ModelConfig::limited_query(std::size_t n_vars) { return ModelConfig{n_vars, 3, 20, 1, 2}; }

ModelConfig ModelConfig::unlimited_query(std::size_t n_vars) { return ModelConfig{n_vars, 4, 32, 1, 2}; }

void ModelConfig::validate() const {
  if (n_vars == 0) throw std::invalid_argument("model needs at least one variable");
  if (n_layers == 0 || hidden == 0) throw std::invalid_argument("model needs positive depth and width");
  if (vocab != 2) throw std::invalid_argument("vocabulary must be {0,1}");
  if (n_heads != 1) throw std::invalid_argument("only single-head attention is supported");
}

Transformer::Transformer(ModelConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t h = cfg_.hidden, ff = cfg_.ff_width();
  using nn::Tensor;
  tok_ = params_.add("token_embedding", Tensor({cfg_.vocab, h}));
  pos_ = params_.add("position_embedding", Tensor({cfg_.n_vars + 1, h}));
  temp_w_ = params_.add("temperature.weight", Tensor({1, h}));
  temp_b_ = params_.add("temperature.bias", Tensor({h}));
  for (std::size_t l = 0; l < cfg_.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerSlots s{};
    s.ln1_gain = params_.add(p + "ln1.gain", Tensor({h}));
    s.ln1_bias = params_.add(p + "ln1.bias", Tensor({h}));
    s.wq = params_.add(p + "attn.wq", Tensor({h, h}));
    s.bq = params_.add(p + "attn.bq", Tensor({h}));
    s.wk = params_.add(p + "attn.wk", Tensor({h, h}));
    s.bk = params_.add(p + "attn.bk", Tensor({h}));
    s.wv = params_.add(p + "attn.wv", Tensor({h, h}));
    s.bv = params_.add(p + "attn.bv", Tensor({h}));
    s.wo = params_.add(p + "attn.wo", Tensor({h, h}));
    s.bo = params_.add(p + "attn.bo", Tensor({h}));
    s.ln2_gain = params_.add(p + "ln2.gain", Tensor({h}));
    s.ln2_bias = params_.add(p + "ln2.bias", Tensor({h}));
    s.w1 = params_.add(p + "ff.w1", Tensor({h, ff}));
    s.b1 = params_.add(p + "ff.b1", Tensor({ff}));
    s.w2 = params_.add(p + "ff.w2", Tensor({ff, h}));
    s.b2 = params_.add(p + "ff.b2", Tensor({h}));
    layers_.push_back(s);
  }
  lnf_g_ = params_.add("final_ln.gain", Tensor({h}));
  lnf_b_ = params_.add("final_ln.bias", Tensor({h}));
  head_w_ = params_.add("head.weight", Tensor({h, cfg_.vocab}));
  head_b_ = params_.add("head.bias", Tensor({cfg_.vocab}));
}

Transformer Transformer::initialized(ModelConfig cfg, Rng& rng, double stddev) {
  Transformer m(cfg);
  std::normal_distribution<double> normal(0.0, stddev);
  auto& p = m.params_;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::string& name = p.name(i);
    const bool gain = name.ends_with(".gain");
    const bool bias = name.ends_with(".bias") || name.ends_with(".bq") || name.ends_with(".bk") ||
                      name.ends_with(".bv") || name.ends_with(".bo") || name.ends_with(".b1") ||
                      name.ends_with(".b2");
    for (auto& v : p[i].data()) v = gain ? 1.0 : (bias ? 0.0 : normal(rng));
  }
  return m;
}

void Transformer::load_params(const nn::ParameterSet& values) {
  if (values.size() != params_.size()) throw std::invalid_argument("parameter count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values.name(i) != params_.name(i) || values[i].shape() != params_[i].shape()) {
      throw nn::ShapeError("parameter " + values.name(i) + " " + nn::shape_string(values[i].shape()) +
                           " does not match " + params_.name(i) + " " + nn::shape_string(params_[i].shape()));
    }
  }
  params_ = values;
}

void Transformer::check_beta(double beta) const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("inverse temperature must be positive, got " + std::to_string(beta));
  }
}

nn::Var Transformer::forward(nn::Tape& tape, std::span<const int> tokens, std::size_t batch, std::size_t length,
                             double beta, std::vector<nn::Var>* attention) const {
  using namespace nn;
  const std::size_t h = cfg_.hidden;
  std::vector<int> positions(batch * length);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < length; ++t) positions[b * length + t] = static_cast<int>(t);

  Var temperature = add(scale(reshape(tape.param(temp_w_), {h}), std::log(beta)), tape.param(temp_b_));
  Var x = add(embedding(tape.param(tok_), tokens), embedding(tape.param(pos_), positions));
  x = add_bias(x, temperature);

  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(h));
  for (const auto& s : layers_) {
    Var a = layer_norm(x, tape.param(s.ln1_gain), tape.param(s.ln1_bias), kLayerNormEps);
    Var q = reshape(add_bias(matmul(a, tape.param(s.wq)), tape.param(s.bq)), {batch, length, h});
    Var k = reshape(add_bias(matmul(a, tape.param(s.wk)), tape.param(s.bk)), {batch, length, h});
    Var v = reshape(add_bias(matmul(a, tape.param(s.wv)), tape.param(s.bv)), {batch, length, h});
    Var probs = softmax(scale(bmm(q, k, true), inv_sqrt_h), true);
    if (attention) attention->push_back(probs);
    Var mixed = reshape(bmm(probs, v, false), {batch * length, h});
    x = add(x, add_bias(matmul(mixed, tape.param(s.wo)), tape.param(s.bo)));
    Var m = layer_norm(x, tape.param(s.ln2_gain), tape.param(s.ln2_bias), kLayerNormEps);
    Var ff = gelu(add_bias(matmul(m, tape.param(s.w1)), tape.param(s.b1)));
    x = add(x, add_bias(matmul(ff, tape.param(s.w2)), tape.param(s.b2)));
  }
  Var out = layer_norm(x, tape.param(lnf_g_), tape.param(lnf_b_), kLayerNormEps);
  return add_bias(matmul(out, tape.param(head_w_)), tape.param(head_b_));
}

nn::Var Transformer::log_prob(nn::Tape& tape, std::span<const BitString> xs, double beta) const {
  check_beta(beta);
  const std::size_t n = cfg_.n_vars, batch = xs.size();
  if (batch == 0) throw std::invalid_argument("log_prob needs at least one configuration");
  std::vector<int> tokens(batch * n), targets(batch * n);
  for (std::size_t b = 0; b < batch; ++b) {
    if (xs[b].size() != n) {
      throw std::invalid_argument("configuration length " + std::to_string(xs[b].size()) + " != " + std::to_string(n));
    }
    tokens[b * n] = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (t + 1 < n) tokens[b * n + t + 1] = xs[b][t];
      targets[b * n + t] = xs[b][t];
    }
  }
  nn::Var logits = forward(tape, tokens, batch, n, beta, nullptr);
  nn::Var picked = nn::pick(nn::log_softmax(logits), targets);
  return nn::sum_last(nn::reshape(picked, {batch, n}));
}

std::vector<double> Transformer::log_prob(std::span<const BitString> xs, double beta) const {
  nn::Tape tape(&params_);
  const auto values = log_prob(tape, xs, beta).value().data();
  return {values.begin(), values.end()};
}

double Transformer::log_prob(const BitString& x, double beta) const { return log_prob(std::span(&x, 1), beta)[0]; }

std::array<double, 2> Transformer::forward_logits(const BitString& prefix, double beta) const {
  check_beta(beta);
  if (prefix.size() >= cfg_.n_vars) {
    throw std::invalid_argument("prefix of length " + std::to_string(prefix.size()) + " leaves nothing to predict");
  }
  IncrementalDecoder dec(*this, beta, 1);
  int token = 0;
  dec.step(std::span(&token, 1));
  for (std::size_t t = 0; t < prefix.size(); ++t) {
    token = prefix[t];
    dec.step(std::span(&token, 1));
  }
  return {dec.logits()[0], dec.logits()[1]};
}

std::vector<BitString> Transformer::sample(double beta, std::size_t count, Rng& rng) const {
  std::vector<double> ignored;
  return sample(beta, count, rng, ignored);
}

std::vector<BitString> Transformer::sample(double beta, std::size_t count, Rng& rng, std::vector<double>& log_q) const {
  check_beta(beta);
  const std::size_t n = cfg_.n_vars;
  std::vector<BitString> out;
  out.reserve(count);
  log_q.assign(count, 0.0);
  for (std::size_t start = 0; start < count; start += kSampleChunk) {
    const std::size_t m = std::min(kSampleChunk, count - start);
    IncrementalDecoder dec(*this, beta, m);
    std::vector<int> tokens(m, 0);
    std::vector<std::vector<std::uint8_t>> bits(m, std::vector<std::uint8_t>(n));
    for (std::size_t t = 0; t < n; ++t) {
      const auto& logits = dec.step(tokens);
      for (std::size_t b = 0; b < m; ++b) {
        double lp[2];
        nn::kernels::log_softmax_row(&logits[2 * b], 2, lp);
        const int bit = uniform01(rng) < std::exp(lp[1]) ? 1 : 0;
        bits[b][t] = static_cast<std::uint8_t>(bit);
        log_q[start + b] += lp[bit];
        tokens[b] = bit;
      }
    }
    for (auto& b : bits) out.emplace_back(std::move(b));
  }
  return out;
}

ForwardTrace Transformer::trace(std::span<const BitString> xs, double beta) const {
  check_beta(beta);
  const std::size_t n = cfg_.n_vars, len = n + 1, batch = xs.size();
  std::vector<int> tokens(batch * len);
  for (std::size_t b = 0; b < batch; ++b) {
    if (xs[b].size() != n) throw std::invalid_argument("configuration length mismatch in trace");
    tokens[b * len] = 0;
    for (std::size_t t = 0; t < n; ++t) tokens[b * len + t + 1] = xs[b][t];
  }
  nn::Tape tape(&params_);
  std::vector<nn::Var> attention;
  nn::Var logits = forward(tape, tokens, batch, len, beta, &attention);
  ForwardTrace tr;
  tr.batch = batch;
  tr.length = len;
  tr.logits = logits.value();
  for (const auto& a : attention) tr.attention.push_back(a.value());
  return tr;
}

IncrementalDecoder::IncrementalDecoder(const Transformer& model, double beta, std::size_t batch)
    : model_(model), batch_(batch), capacity_(model.config().n_vars + 1) {
  model.check_beta(beta);
  const std::size_t h = model.config().hidden;
  const auto& p = model.params();
  temperature_.resize(h);
  const double lb = std::log(beta);
  for (std::size_t i = 0; i < h; ++i) temperature_[i] = p[model.temp_w_][i] * lb + p[model.temp_b_][i];
  keys_.assign(model.config().n_layers, nn::AlignedDoubles(batch_ * capacity_ * h));
  values_.assign(model.config().n_layers, nn::AlignedDoubles(batch_ * capacity_ * h));
}

const nn::AlignedDoubles& IncrementalDecoder::step(std::span<const int> tokens) {
  namespace k = nn::kernels;
  if (tokens.size() != batch_) throw std::invalid_argument("decoder step needs one token per row");
  if (position_ >= capacity_) throw std::out_of_range("decoder is past the end of the sequence");
  const auto& cfg = model_.config();
  const auto& p = model_.params();
  const std::size_t h = cfg.hidden, ff = cfg.ff_width(), t = position_;
  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(h));

  nn::AlignedDoubles x(batch_ * h), a(batch_ * h), q(batch_ * h), kv(batch_ * h), mixed(batch_ * h),
      proj(batch_ * h), hidden(batch_ * ff), gelu_t(batch_ * ff), scores(t + 1);
  const double* tok = p[model_.tok_].raw();
  const double* pos = p[model_.pos_].raw() + t * h;
  for (std::size_t b = 0; b < batch_; ++b) {
    if (tokens[b] < 0 || static_cast<std::size_t>(tokens[b]) >= cfg.vocab) throw std::invalid_argument("bad token");
    for (std::size_t i = 0; i < h; ++i) x[b * h + i] = tok[tokens[b] * h + i] + pos[i] + temperature_[i];
  }

  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const auto& s = model_.layers_[l];
    k::layer_norm(x.data(), batch_, h, p[s.ln1_gain].raw(), p[s.ln1_bias].raw(), kLayerNormEps, a.data(), nullptr,
                  nullptr);
    k::linear(a.data(), batch_, h, p[s.wq].raw(), p[s.bq].raw(), h, q.data());
    auto& keys = keys_[l];
    auto& vals = values_[l];
    k::linear(a.data(), batch_, h, p[s.wk].raw(), p[s.bk].raw(), h, kv.data());
    for (std::size_t b = 0; b < batch_; ++b) std::copy_n(&kv[b * h], h, &keys[(b * capacity_ + t) * h]);
    k::linear(a.data(), batch_, h, p[s.wv].raw(), p[s.bv].raw(), h, kv.data());
    for (std::size_t b = 0; b < batch_; ++b) std::copy_n(&kv[b * h], h, &vals[(b * capacity_ + t) * h]);

    for (std::size_t b = 0; b < batch_; ++b) {
      const double* qb = &q[b * h];
      for (std::size_t j = 0; j <= t; ++j) {
        const double* kj = &keys[(b * capacity_ + j) * h];
        double dotp = 0.0;
        for (std::size_t i = 0; i < h; ++i) dotp += qb[i] * kj[i];
        scores[j] = dotp * inv_sqrt_h;
      }
      k::softmax_row(scores.data(), t + 1, t + 1, scores.data());
      double* out = &mixed[b * h];
      std::fill_n(out, h, 0.0);
      for (std::size_t j = 0; j <= t; ++j) {
        const double* vj = &vals[(b * capacity_ + j) * h];
        for (std::size_t i = 0; i < h; ++i) out[i] += scores[j] * vj[i];
      }
    }
    k::linear(mixed.data(), batch_, h, p[s.wo].raw(), p[s.bo].raw(), h, proj.data());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += proj[i];

    k::layer_norm(x.data(), batch_, h, p[s.ln2_gain].raw(), p[s.ln2_bias].raw(), kLayerNormEps, a.data(), nullptr,
                  nullptr);
    k::linear(a.data(), batch_, h, p[s.w1].raw(), p[s.b1].raw(), ff, hidden.data());
    gelu_t.resize(hidden.size());
    k::gelu(hidden.data(), hidden.size(), hidden.data(), gelu_t.data());
    k::linear(hidden.data(), batch_, ff, p[s.w2].raw(), p[s.b2].raw(), h, proj.data());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += proj[i];
  }

  k::layer_norm(x.data(), batch_, h, p[model_.lnf_g_].raw(), p[model_.lnf_b_].raw(), kLayerNormEps, a.data(), nullptr,
                nullptr);
  logits_.resize(batch_ * cfg.vocab);
  k::linear(a.data(), batch_, h, p[model_.head_w_].raw(), p[model_.head_b_].raw(), cfg.vocab, logits_.data());
  ++position_;
  return logits_;
}

void IncrementalDecoder::select(std::span<const std::size_t> rows) {
  const std::size_t h = model_.config().hidden, vocab = model_.config().vocab;
  const std::size_t used = position_ * h;
  nn::AlignedDoubles logits(rows.size() * vocab);
  for (std::size_t l = 0; l < keys_.size(); ++l) {
    nn::AlignedDoubles k(rows.size() * capacity_ * h), v(rows.size() * capacity_ * h);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r] >= batch_) throw std::out_of_range("decoder row out of range");
      std::copy_n(&keys_[l][rows[r] * capacity_ * h], used, &k[r * capacity_ * h]);
      std::copy_n(&values_[l][rows[r] * capacity_ * h], used, &v[r * capacity_ * h]);
    }
    keys_[l] = std::move(k);
    values_[l] = std::move(v);
  }
  if (!logits_.empty()) {
    for (std::size_t r = 0; r < rows.size(); ++r) std::copy_n(&logits_[rows[r] * vocab], vocab, &logits[r * vocab]);
    logits_ = std::move(logits);
  }
  batch_ = rows.size();
}

}  // namespace gna::model
