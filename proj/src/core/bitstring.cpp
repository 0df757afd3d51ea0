#include "gna/bitstring.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "gna/random.hpp"

namespace gna {

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; })) {
    throw std::invalid_argument("bit values must be 0 or 1");
  }
}

BitString BitString::from_string(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("not a bit string: " + std::string(text));
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return BitString(std::move(bits));
}

std::string BitString::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
  return s;
}

std::size_t BitString::count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

std::size_t BitStringHash::operator()(const BitString& x) const noexcept {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ull;
  for (auto b : x.bits()) {
    h ^= b + 1;
    h *= 1099511628211ull;
  }
  h ^= x.size();
  return static_cast<std::size_t>(h);
}

std::vector<BitString> all_bitstrings(std::size_t n) {
  if (n >= 31) throw std::invalid_argument("refusing to enumerate 2^" + std::to_string(n) + " configurations");
  const std::size_t total = std::size_t{1} << n;
  std::vector<BitString> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    BitString x(n);
    for (std::size_t i = 0; i < n; ++i) x.set(i, (idx >> i) & 1u);
    out.push_back(std::move(x));
  }
  return out;
}

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void set_rng_state(Rng& rng, const std::string& state) {
  std::istringstream is(state);
  is >> rng;
  if (!is) throw std::invalid_argument("malformed RNG state");
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace gna
