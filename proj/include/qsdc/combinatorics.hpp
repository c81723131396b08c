#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qsdc {

/// Exact binomial coefficient C(n, k) for 0 <= k <= n <= 64.
inline std::uint64_t binomial(int n, int k) {
  if (n < 0 || n > 64 || k < 0 || k > n) {
    throw std::out_of_range("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                            ") outside 0 <= k <= n <= 64");
  }
  if (k > n - k) k = n - k;
  // r * (n - i) is divisible by (i + 1); cancelling the gcd first keeps every
  // intermediate equal to a binomial coefficient, so nothing overflows.
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) {
    const std::uint64_t d = static_cast<std::uint64_t>(i + 1);
    const std::uint64_t g = std::gcd(r, d);
    r = r / g * (static_cast<std::uint64_t>(n - i) / (d / g));
  }
  return r;
}

}  // namespace qsdc
