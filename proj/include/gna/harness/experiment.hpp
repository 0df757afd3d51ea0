#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gna/baselines/sa.hpp"
#include "gna/problems/problem.hpp"
#include "gna/training/runner.hpp"
#include "json.hpp"

namespace gna::harness {

enum class Solver { GnaSa, GnaPt, Sa };

std::string solver_name(Solver s);  // "gna-sa", "gna-pt", "sa"
std::optional<Solver> parse_solver(std::string_view name);
std::vector<Solver> all_solvers();

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One batch of runs: every (solver, size, seed) combination of the lists below.
struct ExperimentSpec {
  problems::ProblemKind problem = problems::ProblemKind::ThreeSat;
  std::vector<std::size_t> sizes{25};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<Solver> solvers{Solver::GnaSa, Solver::GnaPt, Solver::Sa};
  training::Regime regime = training::Regime::Limited;
  std::size_t budget = 200;              // limited regime: objective evaluations per run
  std::optional<std::size_t> max_steps;  // unlimited regime; default depends on problem and size
  std::optional<double> beta_min;        // schedule overrides
  std::optional<double> beta_upper;
  std::filesystem::path out = "runs";
  bool timing = true;  // false writes elapsed_s = 0 so whole files are reproducible
  bool checkpoints = true;

  // Throws UsageError.
  void validate() const;
};

// Keys mirror the CLI flags: problem, n, seeds, solver, regime, budget, max-steps,
// beta-min, beta-upper, out, timing, checkpoints. Missing keys keep the values of `base`.
ExperimentSpec spec_from_json(const nlohmann::json& j, ExperimentSpec base = {});
nlohmann::json spec_to_json(const ExperimentSpec& spec);

// "0-9", "0,3,7" or a mix such as "0-2,5".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
std::vector<std::size_t> parse_size_list(std::string_view text);
// Comma list of solver names, or "all".
std::vector<Solver> parse_solver_list(std::string_view text);

// Fully resolved configuration of one run.
struct RunPlan {
  Solver solver = Solver::GnaPt;
  std::size_t n = 0;
  std::uint64_t seed = 0;  // instance seed; the solver stream is make_rng(seed, rng_stream)
  std::uint64_t rng_stream = 0;
  training::TrainRunConfig train;
  training::AnnealSchedule schedule = training::AnnealSchedule::limited(training::Variant::PT);
  baselines::SaConfig sa;
};

RunPlan resolve_run(const ExperimentSpec& spec, Solver solver, std::size_t n, std::uint64_t seed);
std::vector<RunPlan> plan_runs(const ExperimentSpec& spec);

nlohmann::json to_json(const training::TrainRunConfig& cfg);
nlohmann::json to_json(const training::AnnealSchedule& schedule);
nlohmann::json to_json(const baselines::SaConfig& cfg);
nlohmann::json plan_to_json(const RunPlan& plan);

// Spec, RNG name, build version and the resolved per-solver configuration for every size.
nlohmann::json build_manifest(const ExperimentSpec& spec);

std::string history_filename(Solver solver, std::size_t n, std::uint64_t seed);  // <solver>_n<N>_seed<S>.csv
std::string instance_filename(problems::ProblemKind kind, std::size_t n, std::uint64_t seed);
std::string checkpoint_filename(Solver solver, std::size_t n, std::uint64_t seed);

struct RunOutcome {
  RunPlan plan;
  training::RunHistory history;
};

// Executes one plan on the instance generated from (problem, n, seed).
RunOutcome execute_run(const RunPlan& plan, const problems::Problem& problem,
                       const std::filesystem::path* checkpoint_dir = nullptr);

struct ExperimentResult {
  std::vector<RunOutcome> runs;  // in plan order
  std::size_t failed = 0;
};

// Runs every plan across `workers` threads and writes into spec.out:
//   manifest.json, instances/, <solver>_n<N>_seed<S>.csv, runs.json, checkpoints/.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t workers, std::ostream* log = nullptr);

// Worker count from GNA_WORKERS (default 1, clamped to >= 1).
std::size_t workers_from_env();

std::string build_version();

}  // namespace gna::harness
