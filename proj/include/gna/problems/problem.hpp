#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gna/bitstring.hpp"

namespace gna::problems {

enum class ProblemKind { Ising, Contamination, ThreeSat, Xorsat, SubsetSum };

// "ising", "contamination", "3sat", "xorsat", "subset_sum"
std::string kind_name(ProblemKind kind);
std::optional<ProblemKind> parse_kind(std::string_view name);
std::vector<ProblemKind> all_kinds();

// A black-box objective f: {0,1}^n -> R to be minimized. Immutable once built;
// evaluate() is a pure function of x.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual ProblemKind kind() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual double evaluate(const BitString& x) const = 0;
  // Known optimum when the construction plants one.
  virtual std::optional<BitString> planted() const { return std::nullopt; }

  std::uint64_t seed() const { return seed_; }

 protected:
  explicit Problem(std::uint64_t seed) : seed_(seed) {}
  void check_length(const BitString& x) const;

 private:
  std::uint64_t seed_;
};

using ProblemPtr = std::shared_ptr<const Problem>;

// Deterministic instance for (kind, n, seed). Ising requires n == 24; the rest n >= 3.
ProblemPtr generate(ProblemKind kind, std::size_t n, std::uint64_t seed);

std::vector<double> evaluate_all(const Problem& problem, const std::vector<BitString>& xs);

}  // namespace gna::problems
