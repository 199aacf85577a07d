#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace magsamp {

// n points from lo to hi inclusive. Endpoints are exact.
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2) throw ParameterError("uniform grid needs at least 2 points");
  std::vector<double> xs(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + step * static_cast<double>(i);
  xs.back() = hi;
  return xs;
}

// Composite trapezoid over (xs, ys); xs need not be uniform. Sums in
// ascending index order.
inline double trapezoid(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ShapeError("trapezoid: xs and ys differ in length");
  double total = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) total += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
  return total;
}

// Composite trapezoid of f on [lo, hi] with `intervals` equal intervals.
template <typename F>
double trapezoid(F&& f, double lo, double hi, std::size_t intervals) {
  if (intervals < 1) throw ParameterError("trapezoid needs at least one interval");
  const double h = (hi - lo) / static_cast<double>(intervals);
  double total = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i < intervals; ++i) total += f(lo + h * static_cast<double>(i));
  return total * h;
}

}  // namespace magsamp
