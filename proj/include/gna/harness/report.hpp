#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gna/training/history.hpp"

namespace gna::harness {

// A history file read back from a run directory.
struct LoadedRun {
  std::string solver;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  training::RunHistory history;
};

// Parses "<solver>_n<N>_seed<S>.csv"; nullopt for other names.
std::optional<LoadedRun> parse_history_filename(const std::string& name);
// Every history CSV in `dir`, sorted by (solver, n, seed).
std::vector<LoadedRun> load_histories(const std::filesystem::path& dir);

struct SummaryRow {
  std::string solver;
  std::string problem;
  std::size_t n = 0;
  std::size_t runs = 0;
  double mean = 0.0;  // of the final best f
  double std = 0.0;   // population standard deviation
  double min = 0.0;
  double max = 0.0;
  std::size_t solved = 0;                    // runs whose best f reached the optimum
  std::optional<double> median_steps;        // median first index reaching the optimum; unsolved count as infinite
};

// Groups by (solver, n). `optimum` marks a run solved when its best f <= optimum.
std::vector<SummaryRow> summarize(const std::vector<LoadedRun>& runs, const std::string& problem,
                                  std::optional<double> optimum);
std::string summary_to_csv(const std::vector<SummaryRow>& rows);

// First record index whose best f reaches the optimum.
std::optional<std::size_t> steps_to_reach(const training::RunHistory& h, double optimum);

// Median with missing entries treated as +infinity; nullopt when the median itself is missing.
std::optional<double> median_with_missing(std::vector<std::optional<double>> values);

struct ScalingFit {
  std::vector<double> sizes;
  std::vector<double> steps;
  std::optional<double> slope;  // least squares of log(steps) on log(n); needs two distinct sizes
  std::optional<double> intercept;
};
ScalingFit fit_log_log(const std::vector<double>& sizes, const std::vector<double>& steps);

// Best-so-far curves: per solver, the mean over runs with a shaded min-max band.
struct CurveBand {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};
// Aligns runs by record position; shorter runs hold their last value.
CurveBand best_so_far_band(const std::string& label, const std::vector<const training::RunHistory*>& runs);

struct ReportResult {
  std::vector<SummaryRow> rows;
  std::optional<ScalingFit> scaling;
  std::vector<std::filesystem::path> written;
};

// Reads manifest.json (problem and regime) and the history CSVs in `dir`, then writes
// summary.csv, best_so_far_n<N>.svg per size and, for unlimited runs, scaling.csv and scaling.svg.
// Throws std::runtime_error when no history is found.
ReportResult write_report(const std::filesystem::path& dir);

}  // namespace gna::harness
