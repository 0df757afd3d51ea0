#include "gna/analysis/attention.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "gna/problems/benchmarks.hpp"

namespace gna::analysis {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat to_eigen(const nn::Tensor& t) {
  if (t.rank() != 2) throw nn::ShapeError("expected a matrix, got shape " + nn::shape_string(t.shape()));
  return Eigen::Map<const Mat>(t.raw(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}

nn::Tensor from_eigen(const Mat& m) {
  nn::Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<Mat>(t.raw(), m.rows(), m.cols()) = m;
  return t;
}

std::string format_cell(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream ls(line);
  std::string cell;
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

nn::Tensor AttentionRecord::variable_block(std::size_t layer) const {
  const nn::Tensor& f = full.at(layer);
  nn::Tensor out({n_vars, n_vars});
  for (std::size_t i = 0; i < n_vars; ++i)
    for (std::size_t j = 0; j < n_vars; ++j) out.at(i, j) = f.at(i, j + 1);
  return out;
}

nn::Tensor AttentionRecord::layer_average() const {
  if (full.empty()) throw std::logic_error("attention record has no layers");
  nn::Tensor avg({n_vars, n_vars});
  for (std::size_t l = 0; l < full.size(); ++l) {
    const nn::Tensor block = variable_block(l);
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += block[i];
  }
  for (auto& v : avg.data()) v /= static_cast<double>(full.size());
  return avg;
}

AttentionRecord average_trace(const model::ForwardTrace& trace, double beta) {
  if (trace.batch == 0) throw std::invalid_argument("cannot average an empty trace");
  AttentionRecord rec;
  rec.n_vars = trace.length - 1;
  rec.n_samples = trace.batch;
  rec.beta = beta;
  const std::size_t len = trace.length;
  for (const auto& layer : trace.attention) {
    nn::Tensor avg({len, len});
    for (std::size_t b = 0; b < trace.batch; ++b)
      for (std::size_t k = 0; k < len * len; ++k) avg[k] += layer[b * len * len + k];
    for (auto& v : avg.data()) v /= static_cast<double>(trace.batch);
    rec.full.push_back(std::move(avg));
  }
  return rec;
}

AttentionRecord collect_attention(const model::Transformer& model, double beta, std::size_t n_samples, Rng& rng,
                                  std::size_t chunk) {
  if (n_samples < 1) throw std::invalid_argument("collect_attention needs n_samples >= 1");
  if (chunk < 1) throw std::invalid_argument("collect_attention needs chunk >= 1");
  AttentionRecord rec;
  rec.samples = model.sample(beta, n_samples, rng);
  rec.n_vars = model.config().n_vars;
  rec.n_samples = n_samples;
  rec.beta = beta;
  const std::size_t len = rec.n_vars + 1;
  rec.full.assign(model.config().n_layers, nn::Tensor({len, len}));
  for (std::size_t start = 0; start < n_samples; start += chunk) {
    const std::size_t count = std::min(chunk, n_samples - start);
    const auto tr = model.trace(std::span<const BitString>(rec.samples).subspan(start, count), beta);
    for (std::size_t l = 0; l < tr.attention.size(); ++l) {
      const nn::Tensor& a = tr.attention[l];
      for (std::size_t b = 0; b < count; ++b)
        for (std::size_t k = 0; k < len * len; ++k) rec.full[l][k] += a[b * len * len + k];
    }
  }
  for (auto& layer : rec.full)
    for (auto& v : layer.data()) v /= static_cast<double>(n_samples);
  return rec;
}

nn::Tensor variable_adjacency(const problems::Problem& problem) {
  const std::size_t n = problem.dimension();
  nn::Tensor a({n, n});
  auto link = [&](const std::array<int, 3>& vars) {
    for (int u : vars)
      for (int v : vars)
        if (u != v) a.at(static_cast<std::size_t>(u), static_cast<std::size_t>(v)) = 1.0;
  };
  if (const auto* sat = dynamic_cast<const problems::ThreeSat*>(&problem)) {
    for (const auto& c : sat->clauses()) link(c.var);
  } else if (const auto* xs = dynamic_cast<const problems::Xorsat*>(&problem)) {
    for (const auto& c : xs->clauses()) link(c.var);
  } else {
    throw std::invalid_argument("variable_adjacency supports 3sat and xorsat instances, not " +
                                problems::kind_name(problem.kind()));
  }
  return a;
}

double spectral_radius(const nn::Tensor& symmetric) {
  const Mat m = to_eigen(symmetric);
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue solver did not converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

AdjacencyScore::AdjacencyScore(const nn::Tensor& adjacency, double alpha, std::size_t length)
    : alpha_(alpha), length_(length) {
  const Mat a = to_eigen(adjacency);
  if (a.rows() != a.cols()) throw std::invalid_argument("adjacency matrix must be square");
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 0.0) throw std::invalid_argument("adjacency matrix must have a zero diagonal");
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0 && a(i, j) != 1.0) throw std::invalid_argument("adjacency matrix must be 0/1");
      if (a(i, j) != a(j, i)) throw std::invalid_argument("adjacency matrix must be symmetric");
    }
  }
  if (length < 1) throw std::invalid_argument("adjacency score needs path length l >= 1");
  lambda_max_ = spectral_radius(adjacency);
  if (!(alpha > 0.0) || (lambda_max_ > 0.0 && alpha * lambda_max_ >= 1.0)) {
    throw std::invalid_argument("alpha must satisfy 0 < alpha < 1/|lambda_max| = " +
                                (lambda_max_ > 0.0 ? format_cell(1.0 / lambda_max_) : std::string("inf")));
  }
  Mat power = a;
  Mat s = a;
  double weight = 1.0;
  for (std::size_t k = 2; k <= length; ++k) {
    power = power * a;
    weight *= alpha;
    s += weight * power;
  }
  score_ = from_eigen(s);
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: series lengths differ");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

PairSeries attention_score_pairs(const AttentionRecord& record, const AdjacencyScore& score) {
  if (record.n_vars != score.size()) {
    throw std::invalid_argument("attention record covers " + std::to_string(record.n_vars) +
                                " variables but the score matrix has " + std::to_string(score.size()));
  }
  const nn::Tensor avg = record.layer_average();
  PairSeries out;
  for (std::size_t i = 0; i < record.n_vars; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      out.index.emplace_back(i, j);
      out.attention.push_back(avg.at(i, j));
      out.score.push_back(score.matrix().at(i, j));
    }
  }
  return out;
}

CorrelationReport attention_structure_correlation(const AttentionRecord& record, const AdjacencyScore& score) {
  const PairSeries pairs = attention_score_pairs(record, score);
  CorrelationReport rep;
  rep.pairs = pairs.attention.size();
  rep.r = pearson(pairs.attention, pairs.score);
  if (!rep.r) rep.note = "undefined: zero variance in the attention or score series";
  return rep;
}

std::string matrix_to_csv(const nn::Tensor& m) {
  if (m.rank() != 2) throw nn::ShapeError("matrix_to_csv needs a matrix");
  std::string out;
  for (std::size_t i = 0; i < m.dim(0); ++i) {
    for (std::size_t j = 0; j < m.dim(1); ++j) {
      if (j) out += ',';
      out += format_cell(m.at(i, j));
    }
    out += '\n';
  }
  return out;
}

nn::Tensor matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (rows == 0) cols = cells.size();
    if (cells.size() != cols) throw std::runtime_error("matrix CSV row " + std::to_string(rows + 1) + " is ragged");
    for (const auto& c : cells) values.push_back(std::stod(c));
    ++rows;
  }
  return nn::Tensor({rows, cols}, std::move(values));
}

std::string pairs_to_csv(const PairSeries& pairs) {
  std::string out = "i,j,attention,score\n";
  for (std::size_t k = 0; k < pairs.index.size(); ++k) {
    out += std::to_string(pairs.index[k].first) + "," + std::to_string(pairs.index[k].second) + "," +
           format_cell(pairs.attention[k]) + "," + format_cell(pairs.score[k]) + "\n";
  }
  return out;
}

PairSeries pairs_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "i,j,attention,score") {
    throw std::runtime_error("pairs CSV must start with the header 'i,j,attention,score'");
  }
  PairSeries out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != 4) throw std::runtime_error("pairs CSV rows need 4 cells");
    out.index.emplace_back(std::stoull(cells[0]), std::stoull(cells[1]));
    out.attention.push_back(std::stod(cells[2]));
    out.score.push_back(std::stod(cells[3]));
  }
  return out;
}

}  // namespace gna::analysis
