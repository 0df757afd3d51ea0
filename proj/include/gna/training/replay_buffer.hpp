#pragma once

#include <optional>
#include <unordered_set>
#include <vector>

#include "gna/bitstring.hpp"

namespace gna::training {

enum class Split { Train, Validation };

struct BufferEntry {
  BitString x;
  double f;
  Split split;
};

// Every evaluated query, append-only.
class ReplayBuffer {
 public:
  void add(BitString x, double f, Split split);

  const std::vector<BufferEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t count(Split split) const;
  bool contains(const BitString& x) const { return seen_.contains(x); }

  // Earliest entry with the minimal f.
  std::optional<std::size_t> best_index() const { return best_; }
  const BufferEntry& best() const;

  // Distinct configurations of one split (first copy kept) with their objective values.
  struct Unique {
    std::vector<BitString> configs;
    std::vector<double> energies;
  };
  Unique unique(Split split) const;

 private:
  std::vector<BufferEntry> entries_;
  std::unordered_set<BitString, BitStringHash> seen_;
  std::optional<std::size_t> best_;
};

}  // namespace gna::training
