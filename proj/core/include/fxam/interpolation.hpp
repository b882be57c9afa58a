#pragma once

#include <algorithm>
#include <cstddef>
#include <span>

namespace fxam {

/// Piecewise-linear interpolation through (knots, values), clamped to the
/// end values outside [knots.front(), knots.back()]. knots must be sorted
/// and nonempty.
inline double interpolate_clamped(std::span<const double> knots, std::span<const double> values,
                                  double x) {
  if (x <= knots.front()) return values.front();
  if (x >= knots.back()) return values.back();
  const auto upper = std::upper_bound(knots.begin(), knots.end(), x);
  const auto hi = static_cast<std::size_t>(upper - knots.begin());
  const std::size_t lo = hi - 1;
  if (knots[lo] == x) return values[lo];
  const double t = (x - knots[lo]) / (knots[hi] - knots[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

}  // namespace fxam
