#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "doctest.h"
#include "gna/harness/analyze.hpp"
#include "gna/harness/experiment.hpp"
#include "gna/harness/report.hpp"
#include "gna/model/checkpoint.hpp"
#include "gna/problems/io.hpp"

using namespace gna;
using namespace gna::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gna_harness_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

training::RunHistory synthetic(std::vector<double> fs_) {
  training::RunHistory h;
  for (std::size_t i = 0; i < fs_.size(); ++i) h.append(i + 1, BitString(3), fs_[i], 1.0, 0.0);
  return h;
}

ExperimentSpec tiny_spec(const fs::path& out) {
  ExperimentSpec s;
  s.problem = problems::ProblemKind::Xorsat;
  s.sizes = {6};
  s.seeds = {0, 1};
  s.budget = 24;
  s.out = out;
  return s;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(GNA_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("seed, size and solver lists") {
  CHECK(parse_seed_list("0-3") == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(parse_seed_list("5, 1,2-3") == std::vector<std::uint64_t>{5, 1, 2, 3});
  CHECK(parse_size_list("10,15,20") == std::vector<std::size_t>{10, 15, 20});
  CHECK(parse_solver_list("all") == all_solvers());
  CHECK(parse_solver_list("sa,gna-pt") == std::vector<Solver>{Solver::Sa, Solver::GnaPt});
  CHECK_THROWS_AS(parse_seed_list("3-1"), UsageError);
  CHECK_THROWS_AS(parse_seed_list("x"), UsageError);
  CHECK_THROWS_AS(parse_seed_list(""), UsageError);
  CHECK_THROWS_AS(parse_solver_list("gna"), UsageError);
}

TEST_CASE("config JSON mirrors the flags and later layers win") {
  const auto base = spec_from_json(nlohmann::json::parse(
      R"({"problem":"xorsat","n":"12,16","seeds":"0-2","solver":"gna-pt","regime":"unlimited","max-steps":50,
          "beta-min":0.2,"beta-upper":40,"out":"somewhere","timing":false,"checkpoints":false})"));
  CHECK(base.problem == problems::ProblemKind::Xorsat);
  CHECK(base.sizes == std::vector<std::size_t>{12, 16});
  CHECK(base.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(base.solvers == std::vector<Solver>{Solver::GnaPt});
  CHECK(base.regime == training::Regime::Unlimited);
  CHECK(base.max_steps == 50);
  CHECK(base.beta_min == 0.2);
  CHECK(base.beta_upper == 40.0);
  CHECK(base.out == "somewhere");
  CHECK_FALSE(base.timing);
  CHECK_FALSE(base.checkpoints);
  const auto merged = spec_from_json(nlohmann::json::parse(R"({"n":20,"seeds":7})"), base);
  CHECK(merged.sizes == std::vector<std::size_t>{20});
  CHECK(merged.seeds == std::vector<std::uint64_t>{7});
  CHECK(merged.problem == problems::ProblemKind::Xorsat);
  CHECK(spec_from_json(spec_to_json(base)).sizes == base.sizes);
  CHECK(spec_to_json(spec_from_json(spec_to_json(base))) == spec_to_json(base));
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"colour":1})")), UsageError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"problem":"tsp"})")), UsageError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"budget":"lots"})")), UsageError);
}

TEST_CASE("experiment spec validation") {
  ExperimentSpec s;
  CHECK_NOTHROW(s.validate());
  auto bad = [](std::function<void(ExperimentSpec&)> edit) {
    ExperimentSpec x;
    edit(x);
    return x;
  };
  CHECK_THROWS_AS(bad([](auto& x) { x.seeds.clear(); }).validate(), UsageError);
  CHECK_THROWS_AS(bad([](auto& x) { x.solvers.clear(); }).validate(), UsageError);
  CHECK_THROWS_AS(bad([](auto& x) { x.sizes = {2}; }).validate(), UsageError);
  CHECK_THROWS_AS(bad([](auto& x) { x.problem = problems::ProblemKind::Ising; }).validate(), UsageError);
  CHECK_NOTHROW(bad([](auto& x) {
                  x.problem = problems::ProblemKind::Ising;
                  x.sizes = {24};
                }).validate());
  CHECK_THROWS_AS(bad([](auto& x) { x.budget = 20; }).validate(), UsageError);
  CHECK_THROWS_AS(bad([](auto& x) { x.regime = training::Regime::Unlimited; }).validate(), UsageError);
  CHECK_THROWS_AS(bad([](auto& x) { x.beta_min = 5.0, x.beta_upper = 1.0; }).validate(), UsageError);
  CHECK_THROWS_AS(bad([](auto& x) { x.beta_min = -1.0; }).validate(), UsageError);
}

TEST_CASE("run plans resolve the presets and overrides") {
  ExperimentSpec s;
  const auto pt = resolve_run(s, Solver::GnaPt, 25, 3);
  CHECK(pt.train.steps_per_query == 25);
  CHECK(pt.train.optimizer.learning_rate == 8.2e-4);
  CHECK(pt.schedule.beta_min() == 0.057);
  CHECK(pt.schedule.beta_upper() == 69.7);
  CHECK(pt.schedule.variant() == training::Variant::PT);
  const auto gsa = resolve_run(s, Solver::GnaSa, 25, 3);
  CHECK(gsa.train.steps_per_query == 5);
  CHECK(gsa.schedule.variant() == training::Variant::SA);
  CHECK(gsa.rng_stream != pt.rng_stream);
  s.budget = 150;
  s.beta_min = 0.5;
  s.beta_upper = 10.0;
  const auto sa = resolve_run(s, Solver::Sa, 25, 0);
  CHECK(sa.sa.budget == 150);
  CHECK(sa.sa.beta_start == 0.5);
  CHECK(sa.sa.beta_final == 10.0);
  const auto pt2 = resolve_run(s, Solver::GnaPt, 25, 0);
  CHECK(pt2.schedule.beta_min() == 0.5);
  CHECK(pt2.schedule.beta_upper() == 10.0);
  CHECK(pt2.train.query_budget == 150);

  ExperimentSpec u;
  u.regime = training::Regime::Unlimited;
  u.solvers = {Solver::GnaPt};
  const auto un = resolve_run(u, Solver::GnaPt, 20, 0);
  CHECK(un.train.max_steps == 1000);
  CHECK(un.train.n_layers == 4);
  CHECK(un.train.hidden == 32);
  CHECK(un.schedule.beta_start() == 1.0);
  u.max_steps = 77;
  CHECK(resolve_run(u, Solver::GnaPt, 20, 0).train.max_steps == 77);
  CHECK(plan_runs(tiny_spec("x")).size() == 6);
}

TEST_CASE("manifest changes whenever any result-affecting setting changes") {
  const auto base_train = training::TrainRunConfig::limited(training::Variant::PT);
  const auto base_json = to_json(base_train);
  const std::vector<std::function<void(training::TrainRunConfig&)>> train_edits{
      [](auto& c) { c.regime = training::Regime::Unlimited; },
      [](auto& c) { c.variant = training::Variant::SA; },
      [](auto& c) { c.query_budget += 1; },
      [](auto& c) { c.steps_per_query += 1; },
      [](auto& c) { c.init_random_queries += 1; },
      [](auto& c) { c.init_validation += 1; },
      [](auto& c) { c.train_probability *= 0.5; },
      [](auto& c) { c.reversion_window += 1; },
      [](auto& c) { c.query_retry_cap += 1; },
      [](auto& c) { c.max_steps += 1; },
      [](auto& c) { c.n_batch += 1; },
      [](auto& c) { c.n_unique += 1; },
      [](auto& c) { c.stop_at_optimum = !c.stop_at_optimum; },
      [](auto& c) { c.optimum_value += 1.0; },
      [](auto& c) { c.n_layers += 1; },
      [](auto& c) { c.hidden += 1; },
      [](auto& c) { c.init_stddev *= 2.0; },
      [](auto& c) { c.optimizer.learning_rate *= 2.0; },
      [](auto& c) { c.optimizer.beta1 *= 0.5; },
      [](auto& c) { c.optimizer.beta2 *= 0.5; },
      [](auto& c) { c.optimizer.epsilon *= 2.0; },
      [](auto& c) { c.optimizer.weight_decay *= 2.0; },
  };
  for (std::size_t i = 0; i < train_edits.size(); ++i) {
    auto c = base_train;
    train_edits[i](c);
    CHECK_MESSAGE(to_json(c) != base_json, "train field " << i);
  }

  const auto sched = training::AnnealSchedule::limited(training::Variant::PT);
  const std::vector<training::AnnealSchedule> sched_edits{
      training::AnnealSchedule(0.05, sched.beta_start(), sched.beta_upper(), sched.ramp_end(), sched.variant()),
      training::AnnealSchedule(sched.beta_min(), 0.06, sched.beta_upper(), sched.ramp_end(), sched.variant()),
      training::AnnealSchedule(sched.beta_min(), sched.beta_start(), 50.0, sched.ramp_end(), sched.variant()),
      training::AnnealSchedule(sched.beta_min(), sched.beta_start(), sched.beta_upper(), 0.5, sched.variant()),
      training::AnnealSchedule(sched.beta_min(), sched.beta_start(), sched.beta_upper(), sched.ramp_end(),
                               training::Variant::SA)};
  for (const auto& e : sched_edits) CHECK(to_json(e) != to_json(sched));

  const baselines::SaConfig sa;
  for (int field = 0; field < 3; ++field) {
    auto c = sa;
    if (field == 0) c.beta_start *= 2.0;
    if (field == 1) c.beta_final *= 2.0;
    if (field == 2) c.budget += 1;
    CHECK(to_json(c) != to_json(sa));
  }

  const ExperimentSpec spec;
  const auto manifest = build_manifest(spec);
  const std::vector<std::function<void(ExperimentSpec&)>> spec_edits{
      [](auto& s) { s.problem = problems::ProblemKind::Xorsat; },
      [](auto& s) { s.sizes = {24}; },
      [](auto& s) { s.seeds = {3}; },
      [](auto& s) { s.solvers = {Solver::Sa}; },
      [](auto& s) {
        s.regime = training::Regime::Unlimited;
        s.solvers = {Solver::GnaPt};
      },
      [](auto& s) { s.budget = 100; },
      [](auto& s) { s.max_steps = 10; },
      [](auto& s) { s.beta_min = 0.01; },
      [](auto& s) { s.beta_upper = 10.0; },
      [](auto& s) { s.out = "elsewhere"; },
      [](auto& s) { s.timing = false; },
      [](auto& s) { s.checkpoints = false; },
  };
  for (std::size_t i = 0; i < spec_edits.size(); ++i) {
    auto s = spec;
    spec_edits[i](s);
    CHECK_MESSAGE(build_manifest(s) != manifest, "spec field " << i);
  }
  CHECK(manifest.at("rng") == kRngName);
  CHECK(manifest.at("build").is_string());
  CHECK(manifest.at("runs").size() == 3);
  CHECK(manifest.at("runs")[1].at("train") == to_json(resolve_run(spec, Solver::GnaPt, 25, 0).train));
}

TEST_CASE("history file names") {
  CHECK(history_filename(Solver::GnaPt, 25, 7) == "gna-pt_n25_seed7.csv");
  const auto parsed = parse_history_filename("gna-sa_n24_seed12.csv");
  REQUIRE(parsed.has_value());
  CHECK(parsed->solver == "gna-sa");
  CHECK(parsed->n == 24);
  CHECK(parsed->seed == 12);
  CHECK_FALSE(parse_history_filename("summary.csv").has_value());
  CHECK_FALSE(parse_history_filename("sa_n2_seed1.csv.bak").has_value());
}

TEST_CASE("summary statistics against hand values") {
  std::vector<LoadedRun> runs{{"sa", 25, 0, synthetic({5, 1})},
                              {"sa", 25, 1, synthetic({2, 3})},
                              {"sa", 25, 2, synthetic({6, 4})},
                              {"gna-pt", 25, 0, synthetic({3, 0})}};
  const auto rows = summarize(runs, "3sat", 0.0);
  REQUIRE(rows.size() == 2);
  const auto& single = rows[0];
  CHECK(single.solver == "gna-pt");
  CHECK(single.runs == 1);
  CHECK(single.std == 0.0);
  CHECK(single.solved == 1);
  CHECK(single.median_steps == 2.0);
  const auto& sa = rows[1];
  // Finals 1, 2, 4: mean 7/3, population variance 14/9.
  CHECK(sa.mean == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
  CHECK(sa.std == doctest::Approx(std::sqrt(14.0) / 3.0).epsilon(1e-15));
  CHECK(sa.min == 1.0);
  CHECK(sa.max == 4.0);
  CHECK(sa.solved == 0);
  CHECK_FALSE(sa.median_steps.has_value());
  const auto csv = summary_to_csv(rows);
  CHECK(csv.rfind("solver,problem,n,runs,mean,std,min,max,solved,median_steps\n", 0) == 0);
  CHECK(csv.find("gna-pt,3sat,25,1,0,0,0,0,1,2\n") != std::string::npos);
}

TEST_CASE("medians, log-log fits and best-so-far bands") {
  CHECK(median_with_missing({1.0, 5.0, std::nullopt}) == 5.0);
  CHECK_FALSE(median_with_missing({1.0, std::nullopt, std::nullopt}).has_value());
  CHECK(median_with_missing({4.0, 2.0}) == 3.0);
  const auto fit = fit_log_log({10, 15, 20, 25}, {300, 675, 1200, 1875});
  REQUIRE(fit.slope.has_value());
  CHECK(*fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(*fit.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_FALSE(fit_log_log({10}, {3}).slope.has_value());

  const auto a = synthetic({4, 3, 5, 1});
  const auto b = synthetic({4, 3, 5, 1});
  const auto same = best_so_far_band("x", {&a, &b});
  CHECK(same.mean == same.lo);
  CHECK(same.mean == same.hi);
  CHECK(same.mean == std::vector<double>{4, 3, 3, 1});
  const auto c = synthetic({2, 2});
  const auto mixed = best_so_far_band("x", {&a, &c});
  CHECK(mixed.x == std::vector<double>{1, 2, 3, 4});
  CHECK(mixed.lo == std::vector<double>{2, 2, 2, 1});
  CHECK(mixed.hi == std::vector<double>{4, 3, 3, 2});
}

TEST_CASE("experiments are reproducible and write one history per run") {
  const auto a = scratch_dir("det_a");
  const auto b = scratch_dir("det_b");
  auto spec = tiny_spec(a);
  spec.timing = false;
  const auto ra = run_experiment(spec, 1);
  spec.out = b;
  const auto rb = run_experiment(spec, 2);
  CHECK(ra.failed == 0);
  CHECK(rb.failed == 0);
  std::size_t histories = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (!parse_history_filename(e.path().filename().string())) continue;
    ++histories;
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / e.path().filename()), e.path().filename().string());
  }
  CHECK(histories == 6);
  for (const auto& f : {"xorsat_n6_seed0.json", "xorsat_n6_seed1.json"})
    CHECK(slurp(a / "instances" / f) == slurp(b / "instances" / f));
  CHECK(slurp(a / "checkpoints" / "gna-pt_n6_seed1.json") == slurp(b / "checkpoints" / "gna-pt_n6_seed1.json"));
  CHECK(fs::exists(a / "manifest.json"));
  CHECK(fs::exists(a / "runs.json"));

  // With timing on, only the elapsed_s column may differ.
  const auto c = scratch_dir("det_c");
  spec.out = c;
  spec.timing = true;
  run_experiment(spec, 1);
  for (const auto& name : {"sa_n6_seed0.csv", "gna-sa_n6_seed1.csv", "gna-pt_n6_seed0.csv"}) {
    const auto x = training::history_from_csv(slurp(a / name));
    const auto y = training::history_from_csv(slurp(c / name));
    REQUIRE(x.records.size() == y.records.size());
    for (std::size_t i = 0; i < x.records.size(); ++i) {
      CHECK(x.records[i].best_f == y.records[i].best_f);
      CHECK(x.records[i].f == y.records[i].f);
      CHECK(x.records[i].beta == y.records[i].beta);
    }
  }
}

TEST_CASE("a failed run is recorded while the others complete") {
  const auto dir = scratch_dir("failure");
  // A directory where the history file should go makes that single write fail.
  fs::create_directories(dir / "sa_n6_seed1.csv");
  auto spec = tiny_spec(dir);
  spec.solvers = {Solver::Sa};
  const auto res = run_experiment(spec, 1);
  CHECK(res.failed == 1);
  CHECK_FALSE(res.runs[0].history.failed);
  CHECK(res.runs[1].history.failed);
  CHECK(fs::is_regular_file(dir / "sa_n6_seed0.csv"));
  const auto runs = nlohmann::json::parse(slurp(dir / "runs.json"));
  CHECK(runs[1].at("status") == "failed");
}

TEST_CASE("report writes the summary and plots") {
  const auto dir = scratch_dir("report");
  CHECK_THROWS_AS(write_report(dir), std::runtime_error);
  auto spec = tiny_spec(dir);
  spec.checkpoints = false;
  run_experiment(spec, 1);
  const auto res = write_report(dir);
  CHECK(res.rows.size() == 3);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "best_so_far_n6.svg"));
  CHECK(slurp(dir / "best_so_far_n6.svg").find("<polygon") != std::string::npos);
  CHECK_FALSE(res.scaling.has_value());

  const auto udir = scratch_dir("report_unlimited");
  ExperimentSpec u;
  u.problem = problems::ProblemKind::ThreeSat;
  u.regime = training::Regime::Unlimited;
  u.solvers = {Solver::GnaPt};
  u.sizes = {6, 8};
  u.seeds = {0};
  u.max_steps = 5;
  u.out = udir;
  run_experiment(u, 1);
  const auto ures = write_report(udir);
  REQUIRE(ures.scaling.has_value());
  CHECK(fs::exists(udir / "scaling.csv"));
  CHECK(fs::exists(udir / "scaling_gna-pt.svg"));
}

TEST_CASE("analysis export: uniform rows for a zeroed query/key checkpoint and CSV round-trip") {
  const auto dir = scratch_dir("analyze");
  Rng init(5);
  auto m = model::Transformer::initialized(model::ModelConfig{8, 2, 8, 1, 2}, init, 0.5);
  for (std::size_t l = 0; l < 2; ++l)
    for (auto slot : {m.layer(l).wq, m.layer(l).bq, m.layer(l).wk, m.layer(l).bk}) m.params()[slot].fill(0.0);
  model::save_checkpoint(dir / "zero_qk.json", m, init);
  const auto inst = problems::Xorsat::generate(8, 3);
  problems::write_instance(dir / "inst.json", inst);

  AnalyzeOptions o;
  o.checkpoint = dir / "zero_qk.json";
  o.instance = dir / "inst.json";
  o.samples = 50;
  o.out = dir / "out";
  run_analysis(o);
  const auto block = analysis::matrix_from_csv(slurp(dir / "out" / "attention_layer1.csv"));
  // Variable i is predicted at sequence position i, which sees i + 1 positions.
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      CHECK(block.at(i, j) == doctest::Approx(j < i ? 1.0 / static_cast<double>(i + 1) : 0.0).epsilon(1e-12));

  // A trained-like checkpoint: r from correlation.json equals recomputation from pairs.csv.
  Rng init2(9);
  const auto m2 = model::Transformer::initialized(model::ModelConfig{8, 2, 8, 1, 2}, init2, 0.8);
  model::save_checkpoint(dir / "random.json", m2, init2);
  o.checkpoint = dir / "random.json";
  o.out = dir / "out2";
  const auto res = run_analysis(o);
  const auto pairs = analysis::pairs_from_csv(slurp(dir / "out2" / "pairs.csv"));
  const auto summary = nlohmann::json::parse(slurp(dir / "out2" / "correlation.json"));
  REQUIRE(res.correlation.r.has_value());
  CHECK(summary.at("pearson_r").get<double>() == *analysis::pearson(pairs.attention, pairs.score));
  CHECK(fs::exists(dir / "out2" / "next_bit.csv"));

  problems::write_instance(dir / "inst9.json", problems::Xorsat::generate(9, 3));
  o.instance = dir / "inst9.json";
  CHECK_THROWS_AS(run_analysis(o), UsageError);
}

TEST_CASE("command line: exit codes and byte-identical generation") {
  const auto dir = scratch_dir("cli");
  const auto a = (dir / "a.cnf").string(), b = (dir / "b.cnf").string();
  CHECK(run_cli("generate --problem 3sat --n 25 --seed 4 --out " + a) == 0);
  CHECK(run_cli("generate --problem 3sat --n 25 --seed 4 --out " + b) == 0);
  CHECK(slurp(a) == slurp(b));
  const auto parsed = problems::read_instance(a);
  CHECK(dynamic_cast<const problems::ThreeSat&>(*parsed).clauses().size() == 108);
  CHECK(run_cli("generate --problem knapsack --n 10") == 2);
  CHECK(run_cli("generate --problem ising --n 10") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("run --solver nope") == 2);
  CHECK(run_cli("run --regime unlimited --solver sa") == 2);
  CHECK(run_cli("report " + (dir / "empty").string()) == 1);
  fs::create_directories(dir / "empty");
  CHECK(run_cli("report " + (dir / "empty").string()) == 1);
  CHECK(run_cli("generate --problem xorsat --n 6 --out /nonexistent_dir_for_test/x.json") == 1);

  spit(dir / "cfg.json", R"({"problem":"xorsat","n":6,"seeds":"0","solver":"sa","budget":25,"out":")" +
                             (dir / "from_config").string() + R"("})");
  CHECK(run_cli("run --config " + (dir / "cfg.json").string() + " --budget 30 --no-timing") == 0);
  const auto h = training::history_from_csv(slurp(dir / "from_config" / "sa_n6_seed0.csv"));
  CHECK(h.records.size() == 30);
  CHECK(run_cli("report " + (dir / "from_config").string()) == 0);
  CHECK(fs::exists(dir / "from_config" / "summary.csv"));
}
