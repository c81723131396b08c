#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qsdc/bitstring.hpp"
#include "qsdc/combinatorics.hpp"
#include "qsdc/entropy.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

/// How Alice uses the public channel after measuring her ensemble.
enum class Scheme { FullOutcome, ExcessBits, Weight, Parity };

inline constexpr std::array<Scheme, 4> kAllSchemes{Scheme::FullOutcome, Scheme::ExcessBits,
                                                   Scheme::Weight, Scheme::Parity};

inline std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::FullOutcome: return "full";
    case Scheme::ExcessBits: return "excess";
    case Scheme::Weight: return "weight";
    case Scheme::Parity: return "parity";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view name) {
  for (Scheme s : kAllSchemes)
    if (scheme_name(s) == name) return s;
  throw std::invalid_argument("unknown disclosure scheme '" + std::string(name) +
                              "' (expected full, excess, weight or parity)");
}

/// Public announcement s: a bitstring (full outcome, excess bits) or a count
/// (weight, parity).
class Announcement {
 public:
  static Announcement bits(BitString s) { return Announcement(Payload(std::move(s))); }
  static Announcement count(unsigned c) { return Announcement(Payload(c)); }

  bool is_bits() const noexcept { return std::holds_alternative<BitString>(payload_); }
  const BitString& as_bits() const {
    if (!is_bits()) throw std::invalid_argument("announcement is a count, not a bitstring");
    return std::get<BitString>(payload_);
  }
  unsigned as_count() const {
    if (is_bits()) throw std::invalid_argument("announcement is a bitstring, not a count");
    return std::get<unsigned>(payload_);
  }

  /// CSV form: 0/1 text for bitstrings, decimal for counts.
  std::string str() const { return is_bits() ? as_bits().str() : std::to_string(as_count()); }

  friend bool operator==(const Announcement&, const Announcement&) = default;
  friend auto operator<=>(const Announcement& a, const Announcement& b) {
    return a.payload_ <=> b.payload_;
  }

 private:
  using Payload = std::variant<unsigned, BitString>;
  explicit Announcement(Payload p) : payload_(std::move(p)) {}
  Payload payload_;
};

/// Bayesian view of one announcement: P(s) and the uniform posterior over K(s).
struct Posterior {
  double announcement_probability;
  std::vector<BitString> outcomes;
  ProbDist distribution;
};

class DisclosureScheme {
 public:
  static constexpr int kMaxLength = 16;

  DisclosureScheme(Scheme kind, int n) : kind_(kind), n_(n) {
    if (n < 1 || n > kMaxLength) {
      throw std::invalid_argument("disclosure ensemble size must lie in [1, 16], got " +
                                  std::to_string(n));
    }
  }

  Scheme kind() const noexcept { return kind_; }
  int length() const noexcept { return n_; }

  /// Draws s from P(s|k).
  template <class URBG>
  Announcement announce(const BitString& k, URBG& rng) const {
    require_outcome(k);
    switch (kind_) {
      case Scheme::FullOutcome: return Announcement::bits(k);
      case Scheme::Weight: return Announcement::count(static_cast<unsigned>(k.weight()));
      case Scheme::Parity: return Announcement::count(static_cast<unsigned>(k.weight() % 2));
      case Scheme::ExcessBits: break;
    }
    const int excess = excess_of(k);
    const int majority = majority_bit(k);
    std::vector<int> positions;
    for (int i = 0; i < n_; ++i)
      if (k.bit(i) == majority) positions.push_back(i);
    // Partial Fisher-Yates: the first `excess` slots are a uniform subset.
    for (int i = 0; i < excess; ++i) {
      const auto j = i + static_cast<int>(random_below(rng, positions.size() - i));
      std::swap(positions[i], positions[j]);
    }
    BitString s = BitString::zeros(n_);
    for (int i = 0; i < excess; ++i) s = s.with_bit(positions[i], 1);
    return Announcement::bits(s);
  }

  /// S(k): every announcement with P(s|k) > 0, sorted.
  std::vector<Announcement> compatible_announcements(const BitString& k) const {
    require_outcome(k);
    switch (kind_) {
      case Scheme::FullOutcome: return {Announcement::bits(k)};
      case Scheme::Weight: return {Announcement::count(static_cast<unsigned>(k.weight()))};
      case Scheme::Parity: return {Announcement::count(static_cast<unsigned>(k.weight() % 2))};
      case Scheme::ExcessBits: break;
    }
    std::vector<Announcement> out;
    for (const BitString& s : all_bitstrings(n_)) {
      if (excess_compatible(s, k)) out.push_back(Announcement::bits(s));
    }
    return out;
  }

  /// P(s|k).
  double probability(const Announcement& s, const BitString& k) const {
    validate(s);
    require_outcome(k);
    if (!compatible(s, k)) return 0.0;
    return 1.0 / static_cast<double>(announcement_count(k));
  }

  /// K(s): every outcome with P(s|k) > 0, sorted.
  std::vector<BitString> compatible_outcomes(const Announcement& s) const {
    validate(s);
    std::vector<BitString> out;
    if (kind_ == Scheme::FullOutcome) return {s.as_bits()};
    for (const BitString& k : all_bitstrings(n_))
      if (compatible(s, k)) out.push_back(k);
    return out;
  }

  /// Every announcement that occurs with positive probability, sorted.
  std::vector<Announcement> announcements() const {
    std::vector<Announcement> out;
    switch (kind_) {
      case Scheme::FullOutcome:
        for (const BitString& s : all_bitstrings(n_)) out.push_back(Announcement::bits(s));
        break;
      case Scheme::ExcessBits:
        for (const BitString& s : all_bitstrings(n_))
          if ((n_ - s.weight()) % 2 == 0) out.push_back(Announcement::bits(s));
        break;
      case Scheme::Weight:
        for (int w = 0; w <= n_; ++w) out.push_back(Announcement::count(static_cast<unsigned>(w)));
        break;
      case Scheme::Parity:
        out.push_back(Announcement::count(0));
        out.push_back(Announcement::count(1));
        break;
    }
    return out;
  }

  /// |K(s)| from the closed forms.
  std::uint64_t outcome_count(const Announcement& s) const {
    validate(s);
    switch (kind_) {
      case Scheme::FullOutcome: return 1;
      case Scheme::Weight: return binomial(n_, static_cast<int>(s.as_count()));
      case Scheme::Parity: {
        std::uint64_t total = 0;
        for (int l = 0; 2 * l + static_cast<int>(s.as_count()) <= n_; ++l)
          total += binomial(n_, 2 * l + static_cast<int>(s.as_count()));
        return total;
      }
      case Scheme::ExcessBits: {
        const int rest = n_ - s.as_bits().weight();
        const std::uint64_t f = s.as_bits().weight() == 0 ? 1 : 2;
        return binomial(rest, rest / 2) * f;
      }
    }
    return 0;
  }

  /// |S(k)| from the closed forms.
  std::uint64_t announcement_count(const BitString& k) const {
    require_outcome(k);
    if (kind_ != Scheme::ExcessBits) return 1;
    const int excess = excess_of(k);
    return binomial((n_ + excess) / 2, excess);
  }

  /// P(s) and P(k|s); the latter is uniform over K(s).
  Posterior posterior(const Announcement& s) const {
    std::vector<BitString> support = compatible_outcomes(s);
    if (support.empty()) throw std::invalid_argument("announcement " + s.str() + " never occurs");
    const double size = static_cast<double>(support.size());
    const double p_s =
        size / (static_cast<double>(std::uint64_t{1} << n_) *
                static_cast<double>(announcement_count(support.front())));
    return Posterior{p_s, std::move(support),
                     ProbDist::uniform(static_cast<std::size_t>(size))};
  }

  /// Rejects announcements that are malformed for this scheme.
  void validate(const Announcement& s) const {
    switch (kind_) {
      case Scheme::FullOutcome:
      case Scheme::ExcessBits:
        if (!s.is_bits() || s.as_bits().size() != n_) {
          throw std::invalid_argument("announcement must be a bitstring of length " +
                                      std::to_string(n_));
        }
        if (kind_ == Scheme::ExcessBits && (n_ - s.as_bits().weight()) % 2 != 0) {
          throw std::invalid_argument("excess-bit announcement " + s.as_bits().str() +
                                      " leaves an odd number of positions");
        }
        return;
      case Scheme::Weight:
        if (s.is_bits() || s.as_count() > static_cast<unsigned>(n_)) {
          throw std::invalid_argument("weight announcement must be a count in [0, " +
                                      std::to_string(n_) + "]");
        }
        return;
      case Scheme::Parity:
        if (s.is_bits() || s.as_count() > 1) {
          throw std::invalid_argument("parity announcement must be 0 or 1");
        }
        return;
    }
  }

 private:
  void require_outcome(const BitString& k) const {
    if (k.size() != n_) {
      throw std::invalid_argument("outcome length " + std::to_string(k.size()) +
                                  " does not match ensemble size " + std::to_string(n_));
    }
  }

  int excess_of(const BitString& k) const { return std::abs(2 * k.weight() - n_); }
  int majority_bit(const BitString& k) const { return 2 * k.weight() > n_ ? 1 : 0; }

  bool excess_compatible(const BitString& s, const BitString& k) const {
    const int excess = excess_of(k);
    if (s.weight() != excess) return false;
    const int majority = majority_bit(k);
    for (int i = 0; i < n_; ++i)
      if (s.bit(i) == 1 && k.bit(i) != majority) return false;
    return true;
  }

  bool compatible(const Announcement& s, const BitString& k) const {
    switch (kind_) {
      case Scheme::FullOutcome: return s.as_bits() == k;
      case Scheme::ExcessBits: return excess_compatible(s.as_bits(), k);
      case Scheme::Weight: return s.as_count() == static_cast<unsigned>(k.weight());
      case Scheme::Parity: return s.as_count() == static_cast<unsigned>(k.weight() % 2);
    }
    return false;
  }

  Scheme kind_;
  int n_;
};

}  // namespace qsdc
