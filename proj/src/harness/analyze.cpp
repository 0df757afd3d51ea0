#include "gna/harness/analyze.hpp"

#include <cmath>
#include <fstream>

#include "gna/harness/experiment.hpp"
#include "gna/harness/svg.hpp"
#include "gna/model/checkpoint.hpp"
#include "gna/problems/io.hpp"
#include "gna/training/history.hpp"
#include "json.hpp"

namespace gna::harness {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text, std::vector<std::filesystem::path>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  log.push_back(path);
}

std::vector<double> flat(const nn::Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

AnalyzeResult run_analysis(const AnalyzeOptions& opts) {
  if (opts.samples < 1) throw UsageError("analysis needs at least one sample");
  if (!(opts.beta > 0.0)) throw UsageError("analysis beta must be positive");
  const auto ckpt = model::load_checkpoint(opts.checkpoint);
  const auto problem = problems::read_instance(opts.instance);
  const std::size_t n = ckpt.model.config().n_vars;
  if (problem->dimension() != n) {
    throw UsageError("checkpoint models " + std::to_string(n) + " variables but the instance has " +
                     std::to_string(problem->dimension()));
  }
  const analysis::AdjacencyScore score(analysis::variable_adjacency(*problem), opts.alpha, opts.length);

  AnalyzeResult res;
  Rng rng = make_rng(opts.seed, 7);
  res.record = analysis::collect_attention(ckpt.model, opts.beta, opts.samples, rng);
  res.correlation = analysis::attention_structure_correlation(res.record, score);

  std::filesystem::create_directories(opts.out);
  auto& w = res.written;
  for (std::size_t l = 0; l < res.record.n_layers(); ++l) {
    const auto block = res.record.variable_block(l);
    write_text(opts.out / ("attention_layer" + std::to_string(l) + ".csv"), analysis::matrix_to_csv(block), w);
    write_text(opts.out / ("attention_layer" + std::to_string(l) + ".svg"),
               svg::heatmap("attention, layer " + std::to_string(l), flat(block), n, n), w);
  }
  const auto mean = res.record.layer_average();
  write_text(opts.out / "attention_mean.csv", analysis::matrix_to_csv(mean), w);
  write_text(opts.out / "attention_mean.svg", svg::heatmap("layer-averaged attention", flat(mean), n, n), w);
  write_text(opts.out / "score.csv", analysis::matrix_to_csv(score.matrix()), w);
  write_text(opts.out / "score.svg", svg::heatmap("adjacency score", flat(score.matrix()), n, n), w);
  const auto pairs = analysis::attention_score_pairs(res.record, score);
  write_text(opts.out / "pairs.csv", analysis::pairs_to_csv(pairs), w);
  write_text(opts.out / "pairs.svg",
             svg::scatter_chart({"attention vs adjacency score", "adjacency score", "mean attention", false, false},
                                pairs.score, pairs.attention),
             w);

  // Per-position view of the first sample.
  const auto trace = ckpt.model.trace(std::span<const BitString>(res.record.samples).first(1), opts.beta);
  const std::size_t len = n + 1;
  std::string next = "t,x_t,p_one";
  for (std::size_t j = 0; j <= n; ++j) next += ",attn_" + std::to_string(j);
  next += "\n";
  for (std::size_t t = 0; t < n; ++t) {
    const double l0 = trace.logits.at(t, 0), l1 = trace.logits.at(t, 1);
    const double p1 = 1.0 / (1.0 + std::exp(l0 - l1));
    next += std::to_string(t) + "," + std::to_string(res.record.samples[0][t]) + "," + training::format_double(p1);
    for (std::size_t j = 0; j < len; ++j) {
      double a = 0.0;
      for (const auto& layer : trace.attention) a += layer[t * len + j];
      next += "," + training::format_double(a / static_cast<double>(trace.attention.size()));
    }
    next += "\n";
  }
  write_text(opts.out / "next_bit.csv", next, w);

  nlohmann::json summary{{"pearson_r", res.correlation.r ? nlohmann::json(*res.correlation.r) : nlohmann::json(nullptr)},
                         {"pairs", res.correlation.pairs},
                         {"note", res.correlation.note},
                         {"beta", opts.beta},
                         {"samples", opts.samples},
                         {"alpha", opts.alpha},
                         {"length", opts.length},
                         {"lambda_max", score.lambda_max()},
                         {"seed", opts.seed},
                         {"pair_set", "i > j over variable positions, layer-averaged, start token excluded"},
                         {"checkpoint", opts.checkpoint.string()},
                         {"instance", opts.instance.string()}};
  write_text(opts.out / "correlation.json", summary.dump(2) + "\n", w);
  return res;
}

}  // namespace gna::harness
