#include "gna/training/history.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace gna::training {

void RunHistory::append(std::size_t m, const BitString& x, double f, double beta, double elapsed_s) {
  const bool improves = records.empty() || f < records.back().best_f;
  if (improves) best_x = x;
  const double best = improves ? f : records.back().best_f;
  records.push_back({m, f, best, beta, elapsed_s});
}

std::optional<double> RunHistory::final_best() const {
  if (records.empty()) return std::nullopt;
  return records.back().best_f;
}

bool RunHistory::best_is_monotone() const {
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].best_f > records[i - 1].best_f) return false;
  return true;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string history_to_csv(const RunHistory& history) {
  std::string out = std::string(kHistoryHeader) + "\n";
  for (const auto& r : history.records) {
    out += std::to_string(r.m) + "," + format_double(r.f) + "," + format_double(r.best_f) + "," +
           format_double(r.beta) + "," + format_double(r.elapsed_s) + "\n";
  }
  return out;
}

RunHistory history_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHistoryHeader) {
    throw std::runtime_error("history CSV must start with the header '" + std::string(kHistoryHeader) + "'");
  }
  RunHistory h;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw std::runtime_error("history CSV line " + std::to_string(lineno) + ": expected 5 cells");
    try {
      HistoryRecord r;
      r.m = std::stoull(cells[0]);
      r.f = std::stod(cells[1]);
      r.best_f = std::stod(cells[2]);
      r.beta = std::stod(cells[3]);
      r.elapsed_s = std::stod(cells[4]);
      h.records.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error("history CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return h;
}

}  // namespace gna::training
