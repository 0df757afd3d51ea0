#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gna/problems/benchmarks.hpp"

namespace gna::problems {

namespace {

template <typename Clause>
void check_clauses(std::size_t n, const std::vector<Clause>& clauses) {
  for (const auto& c : clauses) {
    for (int v : c.var) {
      if (v < 0 || static_cast<std::size_t>(v) >= n) throw std::invalid_argument("clause variable out of range");
    }
    if (c.var[0] == c.var[1] || c.var[0] == c.var[2] || c.var[1] == c.var[2]) {
      throw std::invalid_argument("clause repeats a variable");
    }
  }
}

template <typename Clause>
std::vector<int> clause_degrees(std::size_t n, const std::vector<Clause>& clauses) {
  std::vector<int> deg(n, 0);
  for (const auto& c : clauses)
    for (int v : c.var) ++deg[static_cast<std::size_t>(v)];
  return deg;
}

std::array<int, 3> distinct_triple(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
  std::array<int, 3> v{};
  v[0] = pick(rng);
  do v[1] = pick(rng);
  while (v[1] == v[0]);
  do v[2] = pick(rng);
  while (v[2] == v[0] || v[2] == v[1]);
  return v;
}

BitString random_bits(std::size_t n, Rng& rng) {
  BitString x(n);
  for (std::size_t i = 0; i < n; ++i) x.set(i, uniform01(rng) < 0.5);
  return x;
}

}  // namespace

bool Clause3::satisfied(const BitString& x) const {
  for (int k = 0; k < 3; ++k)
    if ((x[static_cast<std::size_t>(var[k])] != 0) != negated[k]) return true;
  return false;
}

ThreeSat::ThreeSat(std::size_t n, std::vector<Clause3> clauses, std::optional<BitString> planted, std::uint64_t seed)
    : Problem(seed), n_(n), clauses_(std::move(clauses)), planted_(std::move(planted)) {
  check_clauses(n_, clauses_);
  if (planted_ && planted_->size() != n_) throw std::invalid_argument("planted assignment has the wrong length");
}

// Each clause picks three distinct variables and a literal pattern relative to the planted
// assignment: one or two literals agree with the plant, each of the six such patterns with
// probability 1/6. A chosen literal then agrees with the plant with probability 1/2, so the
// expected local field on every variable is zero while the plant satisfies every clause.
ThreeSat ThreeSat::generate(std::size_t n, std::uint64_t seed, double ratio) {
  if (n < 3) throw std::invalid_argument("3-SAT needs at least 3 variables");
  Rng rng = make_rng(seed);
  BitString plant = random_bits(n, rng);
  const auto m = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::uniform_int_distribution<int> pattern(0, 5);
  std::vector<Clause3> clauses;
  clauses.reserve(m);
  for (std::size_t c = 0; c < m; ++c) {
    Clause3 cl{};
    cl.var = distinct_triple(n, rng);
    const int p = pattern(rng);
    // p in 0..2: only literal p agrees; p in 3..5: all but literal p-3 agree.
    for (int k = 0; k < 3; ++k) {
      const bool agrees = p < 3 ? (k == p) : (k != p - 3);
      const bool value = plant[static_cast<std::size_t>(cl.var[k])] != 0;
      cl.negated[k] = agrees ? !value : value;
    }
    clauses.push_back(cl);
  }
  return ThreeSat(n, std::move(clauses), std::move(plant), seed);
}

double ThreeSat::evaluate(const BitString& x) const {
  check_length(x);
  int unsat = 0;
  for (const auto& c : clauses_) unsat += c.satisfied(x) ? 0 : 1;
  return unsat;
}

std::vector<int> ThreeSat::degrees() const { return clause_degrees(n_, clauses_); }

bool XorClause::satisfied(const BitString& x) const {
  const int s = x[static_cast<std::size_t>(var[0])] ^ x[static_cast<std::size_t>(var[1])] ^
                x[static_cast<std::size_t>(var[2])];
  return s == parity;
}

Xorsat::Xorsat(std::size_t n, std::vector<XorClause> clauses, std::optional<BitString> planted, std::uint64_t seed)
    : Problem(seed), n_(n), clauses_(std::move(clauses)), planted_(std::move(planted)) {
  check_clauses(n_, clauses_);
  if (planted_ && planted_->size() != n_) throw std::invalid_argument("planted assignment has the wrong length");
}

// Configuration model: three stubs per variable, shuffled and cut into triples. A draw
// that puts one variable twice in a triple is rejected and redrawn on the next sub-seed.
Xorsat Xorsat::generate(std::size_t n, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("3-XORSAT needs at least 3 variables");
  Rng plant_rng = make_rng(seed);
  const BitString plant = random_bits(n, plant_rng);
  std::vector<int> stubs(3 * n);
  for (std::size_t i = 0; i < stubs.size(); ++i) stubs[i] = static_cast<int>(i / 3);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(attempt) + 1);
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::vector<XorClause> clauses;
    bool ok = true;
    for (std::size_t c = 0; c < n && ok; ++c) {
      XorClause cl{{stubs[3 * c], stubs[3 * c + 1], stubs[3 * c + 2]}, 0};
      ok = cl.var[0] != cl.var[1] && cl.var[0] != cl.var[2] && cl.var[1] != cl.var[2];
      cl.parity = static_cast<std::uint8_t>(plant[static_cast<std::size_t>(cl.var[0])] ^
                                            plant[static_cast<std::size_t>(cl.var[1])] ^
                                            plant[static_cast<std::size_t>(cl.var[2])]);
      clauses.push_back(cl);
    }
    if (ok) return Xorsat(n, std::move(clauses), plant, seed);
  }
  throw std::runtime_error("3-regular XORSAT construction failed after " + std::to_string(kMaxAttempts) +
                           " attempts");
}

double Xorsat::evaluate(const BitString& x) const {
  check_length(x);
  int unsat = 0;
  for (const auto& c : clauses_) unsat += c.satisfied(x) ? 0 : 1;
  return unsat;
}

std::vector<int> Xorsat::degrees() const { return clause_degrees(n_, clauses_); }

}  // namespace gna::problems
