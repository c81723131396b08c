#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsdc {

/// Probabilities below this are exact zeros inside entropy sums.
inline constexpr double kProbabilityFloor = 1e-15;
inline constexpr double kNormalizationTolerance = 1e-12;

/// Discrete distribution over outcome labels 0..size()-1.
class ProbDist {
 public:
  explicit ProbDist(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw std::invalid_argument("distribution has no outcomes");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw std::invalid_argument("distribution has a negative or NaN weight");
      total += w;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      throw std::invalid_argument("distribution weights sum to " + std::to_string(total) +
                                  ", expected 1");
    }
  }

  static ProbDist uniform(std::size_t size) {
    return ProbDist(std::vector<double>(size, 1.0 / static_cast<double>(size)));
  }

  static ProbDist point_mass(std::size_t size, std::size_t at) {
    std::vector<double> w(size, 0.0);
    w.at(at) = 1.0;
    return ProbDist(std::move(w));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

/// -sum p log2 p over raw weights, no normalization check.
inline double entropy_bits(std::span<const double> weights) noexcept {
  double h = 0.0;
  for (double p : weights) {
    if (p > kProbabilityFloor) h -= p * std::log2(p);
  }
  return h;
}

inline double shannon_entropy(const ProbDist& d) noexcept { return entropy_bits(d.weights()); }

/// Joint distribution of two independent variables, first index major.
inline ProbDist product_distribution(const ProbDist& a, const ProbDist& b) {
  std::vector<double> w;
  w.reserve(a.size() * b.size());
  for (double x : a.weights())
    for (double y : b.weights()) w.push_back(x * y);
  return ProbDist(std::move(w));
}

}  // namespace qsdc
