#pragma once

#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <utility>
#include <vector>

#include "gna/problems/problem.hpp"
#include "gna/random.hpp"

namespace gna::problems {

// Sparsify a 4x4 open-boundary Ising spin glass: x_e keeps edge e.
// f(x) = KL(p || q_x) + lambda * |x|_1, with both distributions enumerated over 2^16 spins.
class IsingSparsification final : public Problem {
 public:
  static constexpr int kSide = 4;
  static constexpr int kSpins = kSide * kSide;
  static constexpr std::size_t kEdges = 24;
  static constexpr double kDefaultLambda = 0.01;

  IsingSparsification(std::vector<double> couplings, double lambda, std::uint64_t seed);
  static IsingSparsification generate(std::uint64_t seed);

  ProblemKind kind() const override { return ProblemKind::Ising; }
  std::size_t dimension() const override { return kEdges; }
  double evaluate(const BitString& x) const override;

  double kl_divergence(const BitString& x) const;
  const std::vector<double>& couplings() const { return couplings_; }
  double lambda() const { return lambda_; }
  // Exact p(z) for every spin state z (bit i of the index is spin i, 1 -> +1).
  const std::vector<double>& probabilities() const { return p_; }
  static const std::vector<std::pair<int, int>>& edges();

 private:
  double energy(std::uint32_t z, const BitString* keep) const;
  double log_partition(const BitString* keep) const;

  std::vector<double> couplings_;
  double lambda_;
  std::vector<std::uint32_t> agree_;  // per spin state: bit e set when the edge's spins agree
  std::vector<double> p_;
  std::vector<double> energy_p_;
  double log_z_p_ = 0.0;
};

// Food supply-chain contamination with prevention decisions at n stages; the random
// dynamics are frozen at construction so f is deterministic.
class ContaminationControl final : public Problem {
 public:
  static constexpr std::size_t kReplicas = 100;
  static constexpr double kCost = 1.0;
  static constexpr double kThreshold = 0.1;
  static constexpr double kPenalty = 1.0;
  static constexpr double kTolerance = 0.05;

  // lambda and gamma are replica-major [replica * n + stage].
  ContaminationControl(std::size_t n, std::vector<double> z0, std::vector<double> lambda, std::vector<double> gamma,
                       std::uint64_t seed);
  static ContaminationControl generate(std::size_t n, std::uint64_t seed);

  ProblemKind kind() const override { return ProblemKind::Contamination; }
  std::size_t dimension() const override { return n_; }
  double evaluate(const BitString& x) const override;

  const std::vector<double>& initial() const { return z0_; }
  const std::vector<double>& spread() const { return lambda_; }
  const std::vector<double>& recovery() const { return gamma_; }

 private:
  std::size_t n_;
  std::vector<double> z0_, lambda_, gamma_;
};

// A 3-literal disjunction; literal k is true when x[var[k]] != negated[k].
struct Clause3 {
  std::array<int, 3> var;
  std::array<bool, 3> negated;
  bool satisfied(const BitString& x) const;
};

// Planted 3-SAT with zero mean local field; f = number of unsatisfied clauses.
class ThreeSat final : public Problem {
 public:
  static constexpr double kDefaultRatio = 4.3;

  ThreeSat(std::size_t n, std::vector<Clause3> clauses, std::optional<BitString> planted, std::uint64_t seed);
  static ThreeSat generate(std::size_t n, std::uint64_t seed, double ratio = kDefaultRatio);

  ProblemKind kind() const override { return ProblemKind::ThreeSat; }
  std::size_t dimension() const override { return n_; }
  double evaluate(const BitString& x) const override;
  std::optional<BitString> planted() const override { return planted_; }

  const std::vector<Clause3>& clauses() const { return clauses_; }
  // Occurrence count of each variable.
  std::vector<int> degrees() const;

 private:
  std::size_t n_;
  std::vector<Clause3> clauses_;
  std::optional<BitString> planted_;
};

// x_i xor x_j xor x_k = parity
struct XorClause {
  std::array<int, 3> var;
  std::uint8_t parity;
  bool satisfied(const BitString& x) const;
};

// 3-regular 3-XORSAT with a planted solution; f = number of violated parities.
class Xorsat final : public Problem {
 public:
  static constexpr int kMaxAttempts = 1000;

  Xorsat(std::size_t n, std::vector<XorClause> clauses, std::optional<BitString> planted, std::uint64_t seed);
  static Xorsat generate(std::size_t n, std::uint64_t seed);

  ProblemKind kind() const override { return ProblemKind::Xorsat; }
  std::size_t dimension() const override { return n_; }
  double evaluate(const BitString& x) const override;
  std::optional<BitString> planted() const override { return planted_; }

  const std::vector<XorClause>& clauses() const { return clauses_; }
  std::vector<int> degrees() const;

 private:
  std::size_t n_;
  std::vector<XorClause> clauses_;
  std::optional<BitString> planted_;
};

using BigInt = boost::multiprecision::cpp_int;

// Subset sum at the L = n hardness peak; f = ln(|sum_i a_i x_i - T| + 1).
class SubsetSum final : public Problem {
 public:
  SubsetSum(std::vector<BigInt> values, BigInt target, std::optional<BitString> planted, std::uint64_t seed);
  static SubsetSum generate(std::size_t n, std::uint64_t seed);

  ProblemKind kind() const override { return ProblemKind::SubsetSum; }
  std::size_t dimension() const override { return values_.size(); }
  double evaluate(const BitString& x) const override;
  std::optional<BitString> planted() const override { return planted_; }

  BigInt difference(const BitString& x) const;  // |sum - T|
  const std::vector<BigInt>& values() const { return values_; }
  const BigInt& target() const { return target_; }

 private:
  std::vector<BigInt> values_;
  BigInt target_;
  std::optional<BitString> planted_;
};

// Beta(1, b) by inversion.
double sample_beta_one(double b, Rng& rng);

}  // namespace gna::problems
