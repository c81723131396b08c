#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qsdc {

/// Fixed-length classical string over {0,1}.
///
/// Position 0 is the leftmost character of the textual form. The packed
/// `value()` reads the string as a binary numeral, so for equal lengths the
/// numeric order coincides with the lexicographic order of the text.
class BitString {
 public:
  static constexpr int kMaxLength = 32;

  BitString(int length, std::uint64_t value) : length_(length) {
    if (length < 1 || length > kMaxLength) {
      throw std::invalid_argument("BitString length must lie in [1, 32], got " +
                                  std::to_string(length));
    }
    if (length < 64 && (value >> length) != 0) {
      throw std::invalid_argument("BitString value has bits beyond its length");
    }
    value_ = static_cast<std::uint32_t>(value);
  }

  static BitString zeros(int length) { return BitString(length, 0); }

  static BitString parse(std::string_view text) {
    if (text.empty() || text.size() > kMaxLength) {
      throw std::invalid_argument("cannot parse bitstring '" + std::string(text) + "'");
    }
    std::uint64_t v = 0;
    for (char c : text) {
      if (c != '0' && c != '1') {
        throw std::invalid_argument("bitstring may only contain 0/1: '" + std::string(text) + "'");
      }
      v = (v << 1) | static_cast<std::uint64_t>(c - '0');
    }
    return BitString(static_cast<int>(text.size()), v);
  }

  int size() const noexcept { return length_; }
  std::uint32_t value() const noexcept { return value_; }

  int bit(int i) const noexcept { return static_cast<int>((value_ >> (length_ - 1 - i)) & 1u); }

  BitString with_bit(int i, int b) const {
    const std::uint32_t mask = 1u << (length_ - 1 - i);
    return BitString(length_, b ? (value_ | mask) : (value_ & ~mask));
  }

  int weight() const noexcept { return std::popcount(value_); }

  BitString operator^(const BitString& other) const {
    require_same_length(other);
    return BitString(length_, value_ ^ other.value_);
  }

  std::string str() const {
    std::string out(static_cast<std::size_t>(length_), '0');
    for (int i = 0; i < length_; ++i) out[static_cast<std::size_t>(i)] = bit(i) ? '1' : '0';
    return out;
  }

  friend bool operator==(const BitString&, const BitString&) = default;

  // Lexicographic on the textual form; a proper prefix sorts first.
  friend std::strong_ordering operator<=>(const BitString& a, const BitString& b) {
    const int common = a.length_ < b.length_ ? a.length_ : b.length_;
    const std::uint32_t pa = a.value_ >> (a.length_ - common);
    const std::uint32_t pb = b.value_ >> (b.length_ - common);
    if (auto c = pa <=> pb; c != 0) return c;
    return a.length_ <=> b.length_;
  }

 private:
  void require_same_length(const BitString& other) const {
    if (other.length_ != length_) throw std::invalid_argument("bitstring length mismatch");
  }

  int length_;
  std::uint32_t value_ = 0;
};

inline int hamming_weight(const BitString& k) noexcept { return k.weight(); }

inline constexpr int kMaxEnumerationLength = 16;

/// All 2^n strings of length n in lexicographic order.
inline std::vector<BitString> all_bitstrings(int n) {
  if (n < 1 || n > kMaxEnumerationLength) {
    throw std::invalid_argument("enumeration length must lie in [1, 16], got " + std::to_string(n));
  }
  std::vector<BitString> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) out.emplace_back(n, v);
  return out;
}

}  // namespace qsdc
