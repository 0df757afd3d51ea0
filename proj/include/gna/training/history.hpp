#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gna/bitstring.hpp"

namespace gna::training {

// One objective evaluation (limited regime, baselines) or one training step (unlimited regime).
struct HistoryRecord {
  std::size_t m = 0;
  double f = 0.0;       // queried value (batch minimum in the unlimited regime)
  double best_f = 0.0;  // best value so far
  double beta = 0.0;
  double elapsed_s = 0.0;
};

struct RunHistory {
  std::string solver;
  std::uint64_t seed = 0;
  std::vector<HistoryRecord> records;
  std::optional<BitString> best_x;
  std::size_t queries = 0;                     // objective evaluations
  std::optional<std::size_t> steps_to_solve;  // unlimited regime
  bool failed = false;
  std::string error;

  // Appends a record with index m and keeps best_f / best_x current.
  void append(std::size_t m, const BitString& x, double f, double beta, double elapsed_s);
  std::optional<double> final_best() const;
  bool best_is_monotone() const;
};

inline constexpr const char* kHistoryHeader = "m,f,best_f,beta,elapsed_s";

std::string history_to_csv(const RunHistory& history);
// Reads the record columns back; run metadata is not part of the CSV.
RunHistory history_from_csv(const std::string& text);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace gna::training
