#include "gna/problems/problem.hpp"

#include <stdexcept>

#include "gna/problems/benchmarks.hpp"

namespace gna::problems {

std::string kind_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Ising: return "ising";
    case ProblemKind::Contamination: return "contamination";
    case ProblemKind::ThreeSat: return "3sat";
    case ProblemKind::Xorsat: return "xorsat";
    case ProblemKind::SubsetSum: return "subset_sum";
  }
  throw std::invalid_argument("unknown problem kind");
}

std::optional<ProblemKind> parse_kind(std::string_view name) {
  for (ProblemKind k : all_kinds())
    if (kind_name(k) == name) return k;
  return std::nullopt;
}

std::vector<ProblemKind> all_kinds() {
  return {ProblemKind::Ising, ProblemKind::Contamination, ProblemKind::ThreeSat, ProblemKind::Xorsat,
          ProblemKind::SubsetSum};
}

void Problem::check_length(const BitString& x) const {
  if (x.size() != dimension()) {
    throw std::invalid_argument("configuration has length " + std::to_string(x.size()) + ", instance expects " +
                                std::to_string(dimension()));
  }
}

ProblemPtr generate(ProblemKind kind, std::size_t n, std::uint64_t seed) {
  if (kind == ProblemKind::Ising) {
    if (n != IsingSparsification::kEdges) {
      throw std::invalid_argument("ising sparsification has exactly 24 decision variables, got " + std::to_string(n));
    }
    return std::make_shared<IsingSparsification>(IsingSparsification::generate(seed));
  }
  if (n < 3) throw std::invalid_argument("problem size must be at least 3, got " + std::to_string(n));
  switch (kind) {
    case ProblemKind::Contamination:
      return std::make_shared<ContaminationControl>(ContaminationControl::generate(n, seed));
    case ProblemKind::ThreeSat: return std::make_shared<ThreeSat>(ThreeSat::generate(n, seed));
    case ProblemKind::Xorsat: return std::make_shared<Xorsat>(Xorsat::generate(n, seed));
    case ProblemKind::SubsetSum: return std::make_shared<SubsetSum>(SubsetSum::generate(n, seed));
    default: break;
  }
  throw std::invalid_argument("unknown problem kind");
}

std::vector<double> evaluate_all(const Problem& problem, const std::vector<BitString>& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(problem.evaluate(x));
  return out;
}

}  // namespace gna::problems
