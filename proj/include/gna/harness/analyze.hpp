#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gna/analysis/attention.hpp"

namespace gna::harness {

struct AnalyzeOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path instance;
  double beta = 1.0;
  std::size_t samples = 1000;
  double alpha = analysis::AdjacencyScore::kDefaultAlpha;
  std::size_t length = analysis::AdjacencyScore::kDefaultLength;
  std::uint64_t seed = 0;
  std::filesystem::path out = "analysis";
};

struct AnalyzeResult {
  analysis::AttentionRecord record;
  analysis::CorrelationReport correlation;
  std::vector<std::filesystem::path> written;
};

// Loads a checkpoint and an instance, captures attention at opts.beta over opts.samples
// draws and writes into opts.out:
//   attention_layer<k>.csv, attention_mean.csv (variable blocks), score.csv, pairs.csv,
//   next_bit.csv (per-position P(x_t = 1 | prefix) and the mean attention row for the first
//   sample), correlation.json, and SVG heatmaps plus the pair scatter plot.
// Throws UsageError when the checkpoint and instance sizes differ.
AnalyzeResult run_analysis(const AnalyzeOptions& opts);

}  // namespace gna::harness
