#pragma once

// Accumulated training signal S(y) = ∫ p(x) K(x, y) dx and its summaries.

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "kernels.hpp"
#include "numfmt.hpp"
#include "quadrature.hpp"

namespace magsamp {

struct SignalProfile {
  std::vector<double> ys;
  std::vector<double> values;
  double min_value = 0.0;
  double argmin_y = 0.0;
  double total = 0.0;  // ∫ S(y) dy, trapezoid over ys
  double mean = 0.0;   // total / (b - a)
};

struct SignalSummary {
  double min_value = 0.0;
  double argmin_y = 0.0;
  double total = 0.0;
  double mean = 0.0;
};

namespace detail {

// Trapezoid weights at the cell edges for ∫ density(x) f(x) dx, each cell
// integrated by its own two-point rule. weights[k] multiplies f(edge k).
inline std::vector<double> density_edge_weights(const SamplingDistribution& dist) {
  const std::size_t n = dist.cells();
  std::vector<double> w(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double half = 0.5 * (dist.cell_hi(i) - dist.cell_lo(i)) * dist.density()[i];
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

inline std::vector<double> density_edges(const SamplingDistribution& dist) {
  std::vector<double> e(dist.cells() + 1);
  for (std::size_t i = 0; i < dist.cells(); ++i) e[i] = dist.cell_lo(i);
  e[dist.cells()] = dist.range().b;
  return e;
}

}  // namespace detail

inline SignalProfile accumulated_signal(const SamplingDistribution& dist, const KernelSpec& kernel,
                                        std::size_t grid_n) {
  if (grid_n < 2) throw ParameterError("signal grid needs grid_n >= 2");
  const MagRange& r = dist.range();
  kernel.check_covers(r);

  SignalProfile prof;
  prof.ys = uniform_grid(r.a, r.b, grid_n);
  prof.values.assign(grid_n, 0.0);

  const auto edges = detail::density_edges(dist);
  const auto weights = dist.has_density() ? detail::density_edge_weights(dist) : std::vector<double>{};

  for (std::size_t j = 0; j < grid_n; ++j) {
    const double y = prof.ys[j];
    double s = 0.0;
    for (const auto& at : dist.atoms()) s += at.weight * kernel(at.location, y);
    for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * kernel(edges[k], y);
    prof.values[j] = s;
  }

  std::size_t best = 0;
  for (std::size_t j = 1; j < grid_n; ++j)
    if (prof.values[j] < prof.values[best]) best = j;
  prof.min_value = prof.values[best];
  prof.argmin_y = prof.ys[best];
  prof.total = trapezoid(prof.ys, prof.values);
  prof.mean = prof.total / r.width();
  return prof;
}

inline SignalSummary signal_summary(const SamplingDistribution& dist, const KernelSpec& kernel, std::size_t grid_n) {
  auto p = accumulated_signal(dist, kernel, grid_n);
  return {p.min_value, p.argmin_y, p.total, p.mean};
}

// S(p) = ∫ p(x) K̄(x) dx, computed through transfer potentials rather than
// through the profile.
inline double total_signal(const SamplingDistribution& dist, const KernelSpec& kernel) {
  const MagRange& r = dist.range();
  kernel.check_covers(r);
  double s = 0.0;
  for (const auto& at : dist.atoms()) s += at.weight * transfer_potential(kernel, r, at.location);
  for (std::size_t i = 0; i < dist.cells(); ++i) {
    if (dist.density()[i] == 0.0) continue;
    s += dist.density()[i] * integrated_potential(kernel, r, dist.cell_lo(i), dist.cell_hi(i));
  }
  return s;
}

inline void write_profile_csv(std::ostream& out, const SignalProfile& p) {
  out << "y_mpp,signal\n";
  for (std::size_t j = 0; j < p.ys.size(); ++j) out << numfmt::format(p.ys[j]) << ',' << numfmt::format(p.values[j]) << '\n';
}

inline void write_summary_header(std::ostream& out) { out << "strategy,min,argmin,total,mean\n"; }

inline void write_summary_row(std::ostream& out, const std::string& strategy, const SignalSummary& s) {
  out << strategy << ',' << numfmt::format(s.min_value) << ',' << numfmt::format(s.argmin_y) << ','
      << numfmt::format(s.total) << ',' << numfmt::format(s.mean) << '\n';
}

}  // namespace magsamp
