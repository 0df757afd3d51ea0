#include "gna/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "gna/harness/svg.hpp"
#include "gna/problems/problem.hpp"
#include "json.hpp"

namespace gna::harness {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string cell(std::optional<double> v) { return v ? training::format_double(*v) : std::string(); }

}  // namespace

std::optional<LoadedRun> parse_history_filename(const std::string& name) {
  static const std::regex pattern(R"(^([a-z-]+)_n([0-9]+)_seed([0-9]+)\.csv$)");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) return std::nullopt;
  LoadedRun r;
  r.solver = m[1];
  r.n = std::stoull(m[2]);
  r.seed = std::stoull(m[3]);
  return r;
}

std::vector<LoadedRun> load_histories(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<LoadedRun> runs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto run = parse_history_filename(entry.path().filename().string());
    if (!run) continue;
    run->history = training::history_from_csv(read_text(entry.path()));
    run->history.solver = run->solver;
    run->history.seed = run->seed;
    runs.push_back(std::move(*run));
  }
  std::sort(runs.begin(), runs.end(), [](const LoadedRun& a, const LoadedRun& b) {
    return std::tie(a.solver, a.n, a.seed) < std::tie(b.solver, b.n, b.seed);
  });
  return runs;
}

std::optional<std::size_t> steps_to_reach(const training::RunHistory& h, double optimum) {
  for (const auto& r : h.records)
    if (r.best_f <= optimum) return r.m;
  return std::nullopt;
}

std::optional<double> median_with_missing(std::vector<std::optional<double>> values) {
  if (values.empty()) return std::nullopt;
  std::vector<double> v;
  for (const auto& x : values) v.push_back(x.value_or(std::numeric_limits<double>::infinity()));
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  const double med = k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
  if (!std::isfinite(med)) return std::nullopt;
  return med;
}

std::vector<SummaryRow> summarize(const std::vector<LoadedRun>& runs, const std::string& problem,
                                  std::optional<double> optimum) {
  std::map<std::pair<std::string, std::size_t>, std::vector<const LoadedRun*>> groups;
  for (const auto& r : runs)
    if (!r.history.records.empty()) groups[{r.solver, r.n}].push_back(&r);
  std::vector<SummaryRow> rows;
  for (const auto& [key, members] : groups) {
    SummaryRow row;
    row.solver = key.first;
    row.problem = problem;
    row.n = key.second;
    row.runs = members.size();
    std::vector<double> finals;
    std::vector<std::optional<double>> steps;
    for (const auto* r : members) {
      finals.push_back(*r->history.final_best());
      if (optimum) {
        const auto s = steps_to_reach(r->history, *optimum);
        if (s) ++row.solved;
        steps.push_back(s ? std::optional<double>(static_cast<double>(*s)) : std::nullopt);
      }
    }
    const double count = static_cast<double>(finals.size());
    row.mean = std::accumulate(finals.begin(), finals.end(), 0.0) / count;
    double ss = 0.0;
    for (double f : finals) ss += (f - row.mean) * (f - row.mean);
    row.std = std::sqrt(ss / count);
    row.min = *std::min_element(finals.begin(), finals.end());
    row.max = *std::max_element(finals.begin(), finals.end());
    if (optimum) row.median_steps = median_with_missing(steps);
    rows.push_back(row);
  }
  return rows;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "solver,problem,n,runs,mean,std,min,max,solved,median_steps\n";
  for (const auto& r : rows) {
    out += r.solver + "," + r.problem + "," + std::to_string(r.n) + "," + std::to_string(r.runs) + "," +
           training::format_double(r.mean) + "," + training::format_double(r.std) + "," +
           training::format_double(r.min) + "," + training::format_double(r.max) + "," + std::to_string(r.solved) +
           "," + cell(r.median_steps) + "\n";
  }
  return out;
}

ScalingFit fit_log_log(const std::vector<double>& sizes, const std::vector<double>& steps) {
  if (sizes.size() != steps.size()) throw std::invalid_argument("fit_log_log: length mismatch");
  ScalingFit fit{sizes, steps, std::nullopt, std::nullopt};
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] > 0.0 && steps[i] > 0.0 && std::isfinite(steps[i])) {
      lx.push_back(std::log(sizes[i]));
      ly.push_back(std::log(steps[i]));
    }
  }
  if (lx.size() < 2) return fit;
  const double k = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - *fit.slope * mx;
  return fit;
}

CurveBand best_so_far_band(const std::string& label, const std::vector<const training::RunHistory*>& runs) {
  CurveBand band;
  band.label = label;
  std::size_t len = 0;
  for (const auto* r : runs) len = std::max(len, r->records.size());
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t m = 0;
    std::size_t used = 0;
    for (const auto* r : runs) {
      if (r->records.empty()) continue;
      const auto& rec = r->records[std::min(i, r->records.size() - 1)];
      if (i < r->records.size()) m = std::max(m, rec.m);
      sum += rec.best_f;
      lo = std::min(lo, rec.best_f);
      hi = std::max(hi, rec.best_f);
      ++used;
    }
    if (used == 0) break;
    band.x.push_back(static_cast<double>(m));
    band.mean.push_back(sum / static_cast<double>(used));
    band.lo.push_back(lo);
    band.hi.push_back(hi);
  }
  return band;
}

ReportResult write_report(const std::filesystem::path& dir) {
  const auto runs = load_histories(dir);
  if (runs.empty()) throw std::runtime_error("no history CSV files in " + dir.string());

  std::string problem = "unknown";
  bool unlimited = false;
  const auto manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    const auto manifest = nlohmann::json::parse(read_text(manifest_path));
    problem = manifest.at("spec").at("problem").get<std::string>();
    unlimited = manifest.at("spec").at("regime").get<std::string>() == "unlimited";
  }
  // Constraint problems have optimum 0; for the others "solved" is not defined.
  std::optional<double> optimum;
  const auto kind = problems::parse_kind(problem);
  if (kind && (*kind == problems::ProblemKind::ThreeSat || *kind == problems::ProblemKind::Xorsat ||
               *kind == problems::ProblemKind::SubsetSum)) {
    optimum = 0.0;
  }

  ReportResult res;
  res.rows = summarize(runs, problem, optimum);
  write_text(dir / "summary.csv", summary_to_csv(res.rows));
  res.written.push_back(dir / "summary.csv");

  std::map<std::size_t, std::map<std::string, std::vector<const training::RunHistory*>>> by_size;
  for (const auto& r : runs) by_size[r.n][r.solver].push_back(&r.history);
  for (const auto& [n, solvers] : by_size) {
    std::vector<svg::Series> series;
    for (const auto& [solver, hs] : solvers) {
      const auto band = best_so_far_band(solver, hs);
      series.push_back({band.label, band.x, band.mean, band.lo, band.hi});
    }
    svg::Axes axes{problem + ", n = " + std::to_string(n), unlimited ? "training step" : "queries", "best f so far",
                   false, false};
    const auto path = dir / ("best_so_far_n" + std::to_string(n) + ".svg");
    write_text(path, svg::line_chart(axes, series));
    res.written.push_back(path);
  }

  if (unlimited && optimum) {
    std::map<std::string, std::vector<std::pair<double, double>>> points;
    for (const auto& row : res.rows)
      if (row.median_steps) points[row.solver].emplace_back(static_cast<double>(row.n), *row.median_steps);
    std::string csv = "solver,n,median_steps,slope\n";
    for (const auto& [solver, pts] : points) {
      std::vector<double> xs, ys;
      for (const auto& [x, y] : pts) {
        xs.push_back(x);
        ys.push_back(y);
      }
      const auto fit = fit_log_log(xs, ys);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        csv += solver + "," + training::format_double(xs[i]) + "," + training::format_double(ys[i]) + "," +
               cell(fit.slope) + "\n";
      }
      if (!res.scaling) res.scaling = fit;
      std::optional<std::pair<double, double>> line;
      if (fit.slope) line = std::pair{*fit.slope, *fit.intercept / std::log(10.0)};
      const auto path = dir / ("scaling_" + solver + ".svg");
      write_text(path, svg::scatter_chart({problem + " steps to solve (" + solver + ")", "n", "median steps", true, true},
                                          xs, ys, line));
      res.written.push_back(path);
    }
    write_text(dir / "scaling.csv", csv);
    res.written.push_back(dir / "scaling.csv");
  }
  return res;
}

}  // namespace gna::harness
