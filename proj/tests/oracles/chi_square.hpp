#pragma once

// Pearson chi-square goodness of fit over equal-width bins.

#include <boost/math/distributions/chi_squared.hpp>

#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

struct ChiSquareResult {
  double statistic = 0.0;
  double critical = 0.0;
  std::size_t dof = 0;
  bool pass = false;
  bool empty_bin_violation = false;  // draws landed in a zero-probability bin
};

// `cdf` is the exact CDF of the target. Bins with zero expected mass are
// excluded from the statistic but must be empty.
inline ChiSquareResult chi_square_test(const std::vector<double>& draws, const std::function<double(double)>& cdf,
                                       double lo, double hi, std::size_t bins, double alpha) {
  std::vector<double> counts(bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double x : draws) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= bins) b = bins - 1;
    counts[b] += 1.0;
  }
  ChiSquareResult r;
  const double n = static_cast<double>(draws.size());
  std::size_t used = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double left = lo + width * static_cast<double>(b);
    const double right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    // Bin b is [left, right); the last bin also takes hi.
    const double below_left = b == 0 ? 0.0 : cdf(std::nextafter(left, lo));
    const double upto_right = b + 1 == bins ? 1.0 : cdf(std::nextafter(right, lo));
    const double p = upto_right - below_left;
    if (p <= 1e-15) {
      if (counts[b] > 0) r.empty_bin_violation = true;
      continue;
    }
    const double expected = n * p;
    r.statistic += (counts[b] - expected) * (counts[b] - expected) / expected;
    ++used;
  }
  r.dof = used > 1 ? used - 1 : 1;
  boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.critical = boost::math::quantile(boost::math::complement(dist, alpha));
  r.pass = !r.empty_bin_violation && r.statistic <= r.critical;
  return r;
}

}  // namespace oracle
