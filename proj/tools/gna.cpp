// Command-line entry point: generate | run | report | analyze.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gna/harness/analyze.hpp"
#include "gna/harness/experiment.hpp"
#include "gna/harness/report.hpp"
#include "gna/problems/io.hpp"
#include "json.hpp"

namespace {

using namespace gna;

constexpr int kOk = 0;
constexpr int kRunFailure = 1;
constexpr int kUsage = 2;

nlohmann::json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw harness::UsageError("cannot read config file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw harness::UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
}

struct RunFlags {
  std::string config;
  std::string problem;
  std::string sizes;
  std::string seeds;
  std::string solver;
  std::string regime;
  std::size_t budget = 0;
  std::size_t max_steps = 0;
  double beta_min = 0.0;
  double beta_upper = 0.0;
  std::string out;
  bool no_timing = false;
  bool no_checkpoints = false;
};

// Config file first, explicit flags on top.
harness::ExperimentSpec build_spec(const RunFlags& f, const CLI::App& cmd) {
  harness::ExperimentSpec spec;
  if (!f.config.empty()) spec = harness::spec_from_json(read_config(f.config));
  nlohmann::json overrides = nlohmann::json::object();
  if (cmd.count("--problem")) overrides["problem"] = f.problem;
  if (cmd.count("--n")) overrides["n"] = f.sizes;
  if (cmd.count("--seeds") || cmd.count("--seed")) overrides["seeds"] = f.seeds;
  if (cmd.count("--solver")) overrides["solver"] = f.solver;
  if (cmd.count("--regime")) overrides["regime"] = f.regime;
  if (cmd.count("--budget")) overrides["budget"] = f.budget;
  if (cmd.count("--max-steps")) overrides["max-steps"] = f.max_steps;
  if (cmd.count("--beta-min")) overrides["beta-min"] = f.beta_min;
  if (cmd.count("--beta-upper")) overrides["beta-upper"] = f.beta_upper;
  if (cmd.count("--out")) overrides["out"] = f.out;
  if (cmd.count("--no-timing")) overrides["timing"] = false;
  if (cmd.count("--no-checkpoints")) overrides["checkpoints"] = false;
  spec = harness::spec_from_json(overrides, spec);
  spec.validate();
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative neural annealer: instances, experiments, reports and attention analysis"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a benchmark instance");
  std::string gen_kind;
  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--problem", gen_kind, "ising | contamination | 3sat | xorsat | subset_sum")->required();
  gen->add_option("--n", gen_n, "Number of variables (ising: 24)")->required();
  gen->add_option("--seed", gen_seed, "Instance seed");
  gen->add_option("--out", gen_out, "Output file (default: stdout)");

  // run
  auto* run = app.add_subcommand("run", "Run solvers over seeds and write histories and a manifest");
  RunFlags rf;
  run->add_option("--config", rf.config, "JSON file with the same keys as the flags");
  run->add_option("--problem", rf.problem, "Problem kind");
  run->add_option("--n", rf.sizes, "Problem size, or a comma list for scaling studies");
  run->add_option("--seeds", rf.seeds, "Seed list such as 0-9 or 1,4,7");
  run->add_option("--seed", rf.seeds, "Single seed");
  run->add_option("--solver", rf.solver, "gna-sa, gna-pt, sa, a comma list or all");
  run->add_option("--regime", rf.regime, "limited | unlimited");
  run->add_option("--budget", rf.budget, "Query budget per run (limited regime)");
  run->add_option("--max-steps", rf.max_steps, "Training step cap (unlimited regime)");
  run->add_option("--beta-min", rf.beta_min, "Lower inverse temperature");
  run->add_option("--beta-upper", rf.beta_upper, "Upper inverse temperature");
  run->add_option("--out", rf.out, "Output directory");
  run->add_flag("--no-timing", rf.no_timing, "Write elapsed_s = 0 for byte-reproducible histories");
  run->add_flag("--no-checkpoints", rf.no_checkpoints, "Skip final model checkpoints");

  // report
  auto* rep = app.add_subcommand("report", "Aggregate a run directory into summary.csv and SVG plots");
  std::string rep_dir;
  rep->add_option("dir", rep_dir, "Run directory")->required();

  // analyze
  auto* ana = app.add_subcommand("analyze", "Attention maps, adjacency scores and their correlation");
  harness::AnalyzeOptions ao;
  std::string ao_ckpt, ao_inst, ao_out = "analysis";
  ana->add_option("--checkpoint", ao_ckpt, "Model checkpoint (JSON)")->required();
  ana->add_option("--instance", ao_inst, "Instance file (DIMACS or JSON)")->required();
  ana->add_option("--beta", ao.beta, "Inverse temperature for sampling");
  ana->add_option("--samples", ao.samples, "Number of sampled sequences");
  ana->add_option("--alpha", ao.alpha, "Adjacency-score discount");
  ana->add_option("--length", ao.length, "Maximum walk length");
  ana->add_option("--seed", ao.seed, "Sampling seed");
  ana->add_option("--out", ao_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      const auto kind = problems::parse_kind(gen_kind);
      if (!kind) throw harness::UsageError("unknown problem '" + gen_kind + "'");
      problems::ProblemPtr p;
      try {
        p = problems::generate(*kind, gen_n, gen_seed);
      } catch (const std::invalid_argument& e) {
        throw harness::UsageError(e.what());
      }
      if (gen_out.empty()) {
        std::cout << problems::serialize_instance(*p);
      } else {
        problems::write_instance(gen_out, *p);
      }
      return kOk;
    }
    if (*run) {
      const auto spec = build_spec(rf, *run);
      const auto result = harness::run_experiment(spec, harness::workers_from_env(), &std::cerr);
      std::cerr << result.runs.size() - result.failed << "/" << result.runs.size() << " runs completed in "
                << spec.out.string() << "\n";
      return result.failed ? kRunFailure : kOk;
    }
    if (*rep) {
      const auto res = harness::write_report(rep_dir);
      std::cout << harness::summary_to_csv(res.rows);
      if (res.scaling && res.scaling->slope) std::cout << "log-log slope: " << *res.scaling->slope << "\n";
      return kOk;
    }
    if (*ana) {
      ao.checkpoint = ao_ckpt;
      ao.instance = ao_inst;
      ao.out = ao_out;
      const auto res = harness::run_analysis(ao);
      if (res.correlation.r) {
        std::cout << "pearson r = " << *res.correlation.r << " over " << res.correlation.pairs << " pairs\n";
      } else {
        std::cout << "pearson r " << res.correlation.note << "\n";
      }
      return kOk;
    }
  } catch (const harness::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunFailure;
  }
  return kUsage;
}
