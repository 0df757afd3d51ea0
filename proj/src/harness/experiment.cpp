#include "gna/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "gna/model/checkpoint.hpp"
#include "gna/problems/io.hpp"

#ifndef GNA_VERSION
#define GNA_VERSION "unknown"
#endif

namespace gna::harness {

using nlohmann::json;

namespace {

std::uint64_t solver_stream(Solver s) {
  switch (s) {
    case Solver::GnaSa: return 1;
    case Solver::GnaPt: return 2;
    case Solver::Sa: return 3;
  }
  return 0;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    const auto piece = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    out.push_back(trim(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_uint(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw UsageError(std::string("invalid ") + what + " '" + s + "'");
  }
  return v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string solver_name(Solver s) {
  switch (s) {
    case Solver::GnaSa: return "gna-sa";
    case Solver::GnaPt: return "gna-pt";
    case Solver::Sa: return "sa";
  }
  return "?";
}

std::optional<Solver> parse_solver(std::string_view name) {
  for (Solver s : all_solvers())
    if (solver_name(s) == name) return s;
  return std::nullopt;
}

std::vector<Solver> all_solvers() { return {Solver::GnaSa, Solver::GnaPt, Solver::Sa}; }

void ExperimentSpec::validate() const {
  if (sizes.empty()) throw UsageError("at least one problem size is required");
  if (seeds.empty()) throw UsageError("seed list must not be empty");
  if (solvers.empty()) throw UsageError("at least one solver is required");
  for (std::size_t n : sizes) {
    if (problem == problems::ProblemKind::Ising && n != problems::IsingSparsification::kEdges) {
      throw UsageError("the ising problem has exactly " + std::to_string(problems::IsingSparsification::kEdges) +
                       " variables");
    }
    if (n < 3) throw UsageError("problem size must be at least 3");
  }
  if (regime == training::Regime::Limited && budget < 21) {
    throw UsageError("the limited regime needs a budget above the 20 initial queries");
  }
  if (regime == training::Regime::Unlimited) {
    if (std::find(solvers.begin(), solvers.end(), Solver::Sa) != solvers.end()) {
      throw UsageError("the sa baseline runs in the limited regime only");
    }
    if (max_steps && *max_steps < 1) throw UsageError("max-steps must be positive");
  }
  if (beta_min && !(*beta_min > 0.0)) throw UsageError("beta-min must be positive");
  if (beta_upper && !(*beta_upper > 0.0)) throw UsageError("beta-upper must be positive");
  if (beta_min && beta_upper && !(*beta_min < *beta_upper)) throw UsageError("beta-min must be below beta-upper");
  if (out.empty()) throw UsageError("output directory must be set");
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(text, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_uint(item, "seed"));
      continue;
    }
    const auto lo = parse_uint(trim(item.substr(0, dash)), "seed range");
    const auto hi = parse_uint(trim(item.substr(dash + 1)), "seed range");
    if (hi < lo) throw UsageError("seed range '" + item + "' is descending");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (const auto& item : split(text, ',')) out.push_back(static_cast<std::size_t>(parse_uint(item, "size")));
  return out;
}

std::vector<Solver> parse_solver_list(std::string_view text) {
  if (trim(text) == "all") return all_solvers();
  std::vector<Solver> out;
  for (const auto& item : split(text, ',')) {
    const auto s = parse_solver(item);
    if (!s) throw UsageError("unknown solver '" + item + "' (expected gna-sa, gna-pt, sa or all)");
    out.push_back(*s);
  }
  return out;
}

ExperimentSpec spec_from_json(const json& j, ExperimentSpec base) {
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  static const std::set<std::string> known{"problem", "n",          "seeds", "solver", "regime", "budget", "max-steps",
                                           "beta-min", "beta-upper", "out",   "timing", "checkpoints"};
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw UsageError("unknown config key '" + key + "'");
  try {
    if (j.contains("problem")) {
      const auto k = problems::parse_kind(j["problem"].get<std::string>());
      if (!k) throw UsageError("unknown problem '" + j["problem"].get<std::string>() + "'");
      base.problem = *k;
    }
    if (j.contains("n")) {
      base.sizes = j["n"].is_array() ? j["n"].get<std::vector<std::size_t>>()
                   : j["n"].is_string() ? parse_size_list(j["n"].get<std::string>())
                                        : std::vector<std::size_t>{j["n"].get<std::size_t>()};
    }
    if (j.contains("seeds")) {
      base.seeds = j["seeds"].is_array()    ? j["seeds"].get<std::vector<std::uint64_t>>()
                   : j["seeds"].is_string() ? parse_seed_list(j["seeds"].get<std::string>())
                                            : std::vector<std::uint64_t>{j["seeds"].get<std::uint64_t>()};
    }
    if (j.contains("solver")) {
      if (j["solver"].is_array()) {
        base.solvers.clear();
        for (const auto& s : j["solver"]) {
          const auto v = parse_solver(s.get<std::string>());
          if (!v) throw UsageError("unknown solver '" + s.get<std::string>() + "'");
          base.solvers.push_back(*v);
        }
      } else {
        base.solvers = parse_solver_list(j["solver"].get<std::string>());
      }
    }
    if (j.contains("regime")) {
      const auto r = training::parse_regime(j["regime"].get<std::string>());
      if (!r) throw UsageError("unknown regime '" + j["regime"].get<std::string>() + "'");
      base.regime = *r;
    }
    if (j.contains("budget")) base.budget = j["budget"].get<std::size_t>();
    if (j.contains("max-steps")) {
      base.max_steps = j["max-steps"].is_null() ? std::nullopt : std::optional(j["max-steps"].get<std::size_t>());
    }
    if (j.contains("beta-min")) {
      base.beta_min = j["beta-min"].is_null() ? std::nullopt : std::optional(j["beta-min"].get<double>());
    }
    if (j.contains("beta-upper")) {
      base.beta_upper = j["beta-upper"].is_null() ? std::nullopt : std::optional(j["beta-upper"].get<double>());
    }
    if (j.contains("out")) base.out = j["out"].get<std::string>();
    if (j.contains("timing")) base.timing = j["timing"].get<bool>();
    if (j.contains("checkpoints")) base.checkpoints = j["checkpoints"].get<bool>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed config value: ") + e.what());
  }
  return base;
}

json spec_to_json(const ExperimentSpec& spec) {
  std::vector<std::string> solvers;
  for (Solver s : spec.solvers) solvers.push_back(solver_name(s));
  return {{"problem", problems::kind_name(spec.problem)},
          {"n", spec.sizes},
          {"seeds", spec.seeds},
          {"solver", solvers},
          {"regime", training::regime_name(spec.regime)},
          {"budget", spec.budget},
          {"max-steps", optional_json(spec.max_steps)},
          {"beta-min", optional_json(spec.beta_min)},
          {"beta-upper", optional_json(spec.beta_upper)},
          {"out", spec.out.string()},
          {"timing", spec.timing},
          {"checkpoints", spec.checkpoints}};
}

RunPlan resolve_run(const ExperimentSpec& spec, Solver solver, std::size_t n, std::uint64_t seed) {
  RunPlan plan;
  plan.solver = solver;
  plan.n = n;
  plan.seed = seed;
  plan.rng_stream = solver_stream(solver);
  const auto variant = solver == Solver::GnaSa ? training::Variant::SA : training::Variant::PT;
  if (spec.regime == training::Regime::Limited) {
    plan.train = training::TrainRunConfig::limited(variant, spec.budget);
    plan.schedule = training::AnnealSchedule::limited(variant);
  } else {
    plan.train = training::TrainRunConfig::unlimited(spec.max_steps.value_or(training::default_step_cap(spec.problem, n)));
    plan.train.variant = variant;
    plan.schedule = training::AnnealSchedule::unlimited(variant);
  }
  if (spec.beta_min || spec.beta_upper) {
    plan.schedule =
        plan.schedule.with_bounds(spec.beta_min.value_or(plan.schedule.beta_min()),
                                  spec.beta_upper.value_or(plan.schedule.beta_upper()));
  }
  plan.sa.budget = spec.budget;
  if (spec.beta_min) plan.sa.beta_start = *spec.beta_min;
  if (spec.beta_upper) plan.sa.beta_final = *spec.beta_upper;
  return plan;
}

std::vector<RunPlan> plan_runs(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<RunPlan> plans;
  for (std::size_t n : spec.sizes)
    for (Solver s : spec.solvers)
      for (std::uint64_t seed : spec.seeds) plans.push_back(resolve_run(spec, s, n, seed));
  return plans;
}

json to_json(const training::TrainRunConfig& c) {
  return {{"regime", training::regime_name(c.regime)},
          {"variant", training::variant_name(c.variant)},
          {"query_budget", c.query_budget},
          {"steps_per_query", c.steps_per_query},
          {"init_random_queries", c.init_random_queries},
          {"init_validation", c.init_validation},
          {"train_probability", c.train_probability},
          {"reversion_window", c.reversion_window},
          {"query_retry_cap", c.query_retry_cap},
          {"max_steps", c.max_steps},
          {"n_batch", c.n_batch},
          {"n_unique", c.n_unique},
          {"stop_at_optimum", c.stop_at_optimum},
          {"optimum_value", c.optimum_value},
          {"n_layers", c.n_layers},
          {"hidden", c.hidden},
          {"init_stddev", c.init_stddev},
          {"optimizer",
           {{"learning_rate", c.optimizer.learning_rate},
            {"beta1", c.optimizer.beta1},
            {"beta2", c.optimizer.beta2},
            {"epsilon", c.optimizer.epsilon},
            {"weight_decay", c.optimizer.weight_decay}}}};
}

json to_json(const training::AnnealSchedule& s) {
  return {{"variant", training::variant_name(s.variant())},
          {"beta_min", s.beta_min()},
          {"beta_start", s.beta_start()},
          {"beta_upper", s.beta_upper()},
          {"ramp_end", s.ramp_end()}};
}

json to_json(const baselines::SaConfig& c) {
  return {{"beta_start", c.beta_start}, {"beta_final", c.beta_final}, {"budget", c.budget}};
}

json plan_to_json(const RunPlan& plan) {
  json j{{"solver", solver_name(plan.solver)}, {"n", plan.n}, {"rng_stream", plan.rng_stream}};
  if (plan.solver == Solver::Sa) {
    j["sa"] = to_json(plan.sa);
  } else {
    j["train"] = to_json(plan.train);
    j["schedule"] = to_json(plan.schedule);
  }
  return j;
}

json build_manifest(const ExperimentSpec& spec) {
  spec.validate();
  json solvers = json::array();
  for (std::size_t n : spec.sizes)
    for (Solver s : spec.solvers) {
      // Seeds do not change the resolved configuration.
      solvers.push_back(plan_to_json(resolve_run(spec, s, n, spec.seeds.front())));
    }
  json instances = json::array();
  for (std::size_t n : spec.sizes)
    for (std::uint64_t seed : spec.seeds)
      instances.push_back({{"n", n}, {"seed", seed}, {"file", "instances/" + instance_filename(spec.problem, n, seed)}});
  return {{"format", "gna-manifest"},
          {"version", 1},
          {"build", build_version()},
          {"rng", kRngName},
          {"rng_seeding", "instance = generate(problem, n, seed); solver stream = make_rng(seed, rng_stream)"},
          {"spec", spec_to_json(spec)},
          {"runs", solvers},
          {"instances", instances}};
}

std::string history_filename(Solver solver, std::size_t n, std::uint64_t seed) {
  return solver_name(solver) + "_n" + std::to_string(n) + "_seed" + std::to_string(seed) + ".csv";
}

std::string instance_filename(problems::ProblemKind kind, std::size_t n, std::uint64_t seed) {
  return problems::kind_name(kind) + "_n" + std::to_string(n) + "_seed" + std::to_string(seed) +
         problems::instance_extension(kind);
}

std::string checkpoint_filename(Solver solver, std::size_t n, std::uint64_t seed) {
  return solver_name(solver) + "_n" + std::to_string(n) + "_seed" + std::to_string(seed) + ".json";
}

RunOutcome execute_run(const RunPlan& plan, const problems::Problem& problem,
                       const std::filesystem::path* checkpoint_dir) {
  RunOutcome out{plan, {}};
  Rng rng = make_rng(plan.seed, plan.rng_stream);
  if (plan.solver == Solver::Sa) {
    out.history = baselines::sa_run(problem, plan.sa, rng);
  } else {
    auto res = plan.train.regime == training::Regime::Limited ? training::run_limited(problem, plan.train, plan.schedule, rng)
                                                              : training::run_unlimited(problem, plan.train, plan.schedule, rng);
    out.history = std::move(res.history);
    if (checkpoint_dir) {
      model::save_checkpoint(*checkpoint_dir / checkpoint_filename(plan.solver, plan.n, plan.seed), res.model, rng);
    }
  }
  out.history.seed = plan.seed;
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t workers, std::ostream* log) {
  const auto plans = plan_runs(spec);
  namespace fs = std::filesystem;
  fs::create_directories(spec.out / "instances");
  if (spec.checkpoints) fs::create_directories(spec.out / "checkpoints");
  write_text(spec.out / "manifest.json", build_manifest(spec).dump(2) + "\n");

  std::map<std::pair<std::size_t, std::uint64_t>, problems::ProblemPtr> instances;
  for (std::size_t n : spec.sizes)
    for (std::uint64_t seed : spec.seeds) {
      auto p = problems::generate(spec.problem, n, seed);
      problems::write_instance(spec.out / "instances" / instance_filename(spec.problem, n, seed), *p);
      instances[{n, seed}] = std::move(p);
    }

  ExperimentResult result;
  result.runs.resize(plans.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const fs::path ckpt_dir = spec.out / "checkpoints";
  auto worker = [&] {
    for (std::size_t i = next++; i < plans.size(); i = next++) {
      const RunPlan& plan = plans[i];
      RunOutcome outcome;
      try {
        outcome = execute_run(plan, *instances.at({plan.n, plan.seed}), spec.checkpoints ? &ckpt_dir : nullptr);
      } catch (const std::exception& e) {
        outcome.plan = plan;
        outcome.history.solver = solver_name(plan.solver);
        outcome.history.seed = plan.seed;
        outcome.history.failed = true;
        outcome.history.error = e.what();
      }
      if (!spec.timing)
        for (auto& r : outcome.history.records) r.elapsed_s = 0.0;
      std::string write_error;
      try {
        write_text(spec.out / history_filename(plan.solver, plan.n, plan.seed), training::history_to_csv(outcome.history));
      } catch (const std::exception& e) {
        outcome.history.failed = true;
        outcome.history.error = e.what();
      }
      if (log) {
        const std::lock_guard lock(log_mutex);
        *log << solver_name(plan.solver) << " n=" << plan.n << " seed=" << plan.seed << ": ";
        if (outcome.history.failed) {
          *log << "FAILED (" << outcome.history.error << ")\n";
        } else if (const auto best = outcome.history.final_best()) {
          *log << "best f = " << training::format_double(*best) << "\n";
        } else {
          *log << "no records\n";
        }
      }
      result.runs[i] = std::move(outcome);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, plans.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  json runs = json::array();
  for (const auto& r : result.runs) {
    if (r.history.failed) ++result.failed;
    runs.push_back({{"solver", solver_name(r.plan.solver)},
                    {"n", r.plan.n},
                    {"seed", r.plan.seed},
                    {"file", history_filename(r.plan.solver, r.plan.n, r.plan.seed)},
                    {"status", r.history.failed ? "failed" : "ok"},
                    {"error", r.history.error},
                    {"final_best", optional_json(r.history.final_best())},
                    {"queries", r.history.queries},
                    {"steps_to_solve", optional_json(r.history.steps_to_solve)}});
  }
  write_text(spec.out / "runs.json", runs.dump(2) + "\n");
  return result;
}

std::size_t workers_from_env() {
  const char* v = std::getenv("GNA_WORKERS");
  if (!v || !*v) return 1;
  std::size_t n = 0;
  const std::string s(v);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return 1;
  return std::max<std::size_t>(1, n);
}

std::string build_version() { return GNA_VERSION; }

}  // namespace gna::harness
