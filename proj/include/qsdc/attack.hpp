#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qsdc/rng.hpp"

namespace qsdc {

inline constexpr double kFeasibilityTolerance = 1e-12;

/// Bell-diagonal weights lambda_ij: probability of the Pauli error X^i Z^j on
/// the shared pair. i flips Z-basis outcomes, j flips X-basis outcomes.
struct SchmidtCoefficients {
  std::array<double, 4> values{1.0, 0.0, 0.0, 0.0};  // index 2*i + j

  double operator()(int i, int j) const noexcept { return values[static_cast<std::size_t>(2 * i + j)]; }
  double sum() const noexcept { return values[0] + values[1] + values[2] + values[3]; }
};

/// Closed range of Eve's parameter t keeping all four lambda_ij nonnegative.
struct TInterval {
  double lo;
  double hi;
  double width() const noexcept { return hi - lo; }
  bool contains(double t, double tol = kFeasibilityTolerance) const noexcept {
    return t >= lo - tol && t <= hi + tol;
  }
};

inline TInterval t_interval(double q_z, double q_x) {
  if (!(q_z >= 0.0 && q_z <= 1.0 && q_x >= 0.0 && q_x <= 1.0)) {
    throw std::invalid_argument("QBERs must lie in [0, 1]");
  }
  return TInterval{std::abs(q_z - q_x), std::min(q_z + q_x, 2.0 - q_z - q_x)};
}

/// One member (Q_Z, Q_X, t) of the BB84-symmetric attack family.
class AttackSpec {
 public:
  AttackSpec(double q_z, double q_x, double t) : q_z_(q_z), q_x_(q_x), t_(t) {
    if (!(q_z >= 0.0 && q_z <= 1.0 && q_x >= 0.0 && q_x <= 1.0)) {
      throw std::invalid_argument("QBERs must lie in [0, 1]");
    }
    if (!std::isfinite(t)) throw std::invalid_argument("attack parameter t must be finite");
    const std::array<double, 4> raw{1.0 - (q_x + t + q_z) / 2.0, (q_x + t - q_z) / 2.0,
                                    (-q_x + t + q_z) / 2.0, (q_x - t + q_z) / 2.0};
    static constexpr const char* kNames[] = {"lambda_00", "lambda_01", "lambda_10", "lambda_11"};
    for (std::size_t idx = 0; idx < 4; ++idx) {
      if (raw[idx] < -kFeasibilityTolerance) {
        std::ostringstream msg;
        msg << "infeasible attack: " << kNames[idx] << " = " << raw[idx] << " < 0 at (Q_Z=" << q_z
            << ", Q_X=" << q_x << ", t=" << t << ")";
        throw std::domain_error(msg.str());
      }
      lambdas_.values[idx] = std::max(raw[idx], 0.0);
    }
  }

  /// Attack with no disturbance: lambda_00 = 1.
  static AttackSpec noiseless() { return AttackSpec(0.0, 0.0, 0.0); }

  double q_z() const noexcept { return q_z_; }
  double q_x() const noexcept { return q_x_; }
  double t() const noexcept { return t_; }
  const SchmidtCoefficients& lambdas() const noexcept { return lambdas_; }

 private:
  double q_z_;
  double q_x_;
  double t_;
  SchmidtCoefficients lambdas_;
};

inline const SchmidtCoefficients& lambdas(const AttackSpec& spec) noexcept { return spec.lambdas(); }

struct PauliError {
  int x;  // bit flip
  int z;  // phase flip
  friend bool operator==(const PauliError&, const PauliError&) = default;
};

/// Draws (i, j) with probability lambda_ij.
template <class URBG>
PauliError sample_pauli(const AttackSpec& spec, URBG& rng) {
  const double u = random_unit(rng);
  const auto& l = spec.lambdas().values;
  double acc = 0.0;
  for (int idx = 0; idx < 3; ++idx) {
    acc += l[static_cast<std::size_t>(idx)];
    if (u < acc) return PauliError{idx >> 1, idx & 1};
  }
  // The remaining mass (including rounding slack) belongs to the last
  // outcome with nonzero weight.
  for (int idx = 3; idx >= 0; --idx)
    if (l[static_cast<std::size_t>(idx)] > 0.0) return PauliError{idx >> 1, idx & 1};
  return PauliError{0, 0};
}

}  // namespace qsdc
