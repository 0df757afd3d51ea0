#include "gna/training/replay_buffer.hpp"

#include <stdexcept>

namespace gna::training {

void ReplayBuffer::add(BitString x, double f, Split split) {
  seen_.insert(x);
  entries_.push_back({std::move(x), f, split});
  if (!best_ || f < entries_[*best_].f) best_ = entries_.size() - 1;
}

std::size_t ReplayBuffer::count(Split split) const {
  std::size_t c = 0;
  for (const auto& e : entries_) c += e.split == split;
  return c;
}

const BufferEntry& ReplayBuffer::best() const {
  if (!best_) throw std::logic_error("replay buffer is empty");
  return entries_[*best_];
}

ReplayBuffer::Unique ReplayBuffer::unique(Split split) const {
  Unique out;
  std::unordered_set<BitString, BitStringHash> kept;
  for (const auto& e : entries_) {
    if (e.split != split || !kept.insert(e.x).second) continue;
    out.configs.push_back(e.x);
    out.energies.push_back(e.f);
  }
  return out;
}

}  // namespace gna::training
