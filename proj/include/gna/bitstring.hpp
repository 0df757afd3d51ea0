#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace gna {

// A candidate solution x in {0,1}^n.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n, std::uint8_t fill = 0) : bits_(n, fill) {}
  explicit BitString(std::vector<std::uint8_t> bits);

  static BitString from_string(std::string_view text);  // "0110..."
  std::string to_string() const;

  std::size_t size() const { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1; }
  std::size_t count() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  auto operator<=>(const BitString&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct BitStringHash {
  std::size_t operator()(const BitString& x) const noexcept;
};

// All 2^n configurations; bit i of the enumeration index is x_i.
std::vector<BitString> all_bitstrings(std::size_t n);

}  // namespace gna
