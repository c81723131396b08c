#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qsdc {

struct SearchSettings {
  std::size_t coarse_points = 129;
  double tolerance = 1e-7;
};

struct ScalarOptimum {
  double x;
  double value;
};

/// Minimizes f over [lo, hi]: coarse grid, then golden-section refinement
/// on the two cells around the best grid point. Deterministic.
template <class F>
ScalarOptimum minimize_scalar(F&& f, double lo, double hi, const SearchSettings& s = {}) {
  if (!(lo <= hi)) throw std::invalid_argument("search interval is empty");
  if (s.coarse_points < 2) throw std::invalid_argument("coarse grid needs at least 2 points");
  if (hi - lo <= s.tolerance) {
    const double x = 0.5 * (lo + hi);
    return {x, f(x)};
  }
  const std::size_t m = s.coarse_points;
  const double step = (hi - lo) / static_cast<double>(m - 1);
  auto grid_x = [&](std::size_t i) { return i + 1 == m ? hi : lo + step * static_cast<double>(i); };

  ScalarOptimum best{lo, f(lo)};
  std::size_t best_i = 0;
  for (std::size_t i = 1; i < m; ++i) {
    const double x = grid_x(i);
    const double v = f(x);
    if (v < best.value) {
      best = {x, v};
      best_i = i;
    }
  }

  double a = grid_x(best_i == 0 ? 0 : best_i - 1);
  double b = grid_x(best_i + 1 >= m ? m - 1 : best_i + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > s.tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc < best.value) best = {c, fc};
  if (fd < best.value) best = {d, fd};
  return best;
}

template <class F>
ScalarOptimum maximize_scalar(F&& f, double lo, double hi, const SearchSettings& s = {}) {
  auto r = minimize_scalar([&](double x) { return -f(x); }, lo, hi, s);
  return {r.x, -r.value};
}

}  // namespace qsdc
