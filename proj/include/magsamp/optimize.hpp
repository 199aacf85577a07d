#pragma once

// Optimized sampling distributions.
//
// Max-average: maximize S(p) + λ H[p]. The maximizer is the Gibbs density
// p*(x) ∝ exp(K̄(x) / λ), discretized here on equal cells.
//
// Max-min: maximize min_y S(y) over densities on equal cells, as the LP
//
//     max t  s.t.  A m >= t·1,  m >= 0,  1ᵀm = 1
//
// where m holds cell masses, targets y_j form a uniform grid including both
// endpoints and A[j][i] is the cell-average of K(·, y_j) over cell i (the
// same two-point rule the signal profile uses). Since A > 0, the optimum
// t* > 0 and q = m / t* solves min 1ᵀq s.t. A q >= 1, q >= 0. Its LP dual
// is the packing problem max 1ᵀu s.t. Aᵀu <= 1, u >= 0, which starts
// feasible at u = 0; the simplex solves that and reads q off the final
// reduced costs. t* = 1 / 1ᵀq.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "signal.hpp"
#include "simplex.hpp"

namespace magsamp {

enum class Objective { MaxAvgEntropy, MaxMin };

struct OptimizationConfig {
  Objective objective = Objective::MaxAvgEntropy;
  double lambda = 1.0;
  std::size_t grid_n = 1000;
  MagRange range{};
  KernelSpec kernel = KernelSpec::info_overlap();

  void validate() const {
    if (grid_n < 10) throw ParameterError("optimization grid needs grid_n >= 10");
    if (objective == Objective::MaxAvgEntropy && !(lambda > 0.0))
      throw ParameterError("entropy weight lambda must be > 0, got " + numfmt::format(lambda));
    kernel.check_covers(range);
  }
};

struct MaxMinSolution {
  SamplingDistribution distribution;
  double achieved_t = 0.0;
  std::vector<std::size_t> active_set;  // target grid indices with S(y) - t < 1e-6
  double upper_bound = 0.0;             // 1 / (packing optimum); t* <= upper_bound
  double dual_residual = 0.0;           // max violation of A q >= 1, q >= 0
  double primal_residual = 0.0;         // max violation of Aᵀu <= 1, u >= 0
  std::size_t iterations = 0;
};

// Gibbs density exp(K̄(x)/λ), evaluated at cell midpoints and normalized so
// the cells integrate to one.
inline SamplingDistribution optimize_max_avg(const OptimizationConfig& cfg) {
  if (cfg.objective != Objective::MaxAvgEntropy) throw ParameterError("optimize_max_avg needs the MaxAvgEntropy objective");
  cfg.validate();
  const MagRange& r = cfg.range;
  const std::size_t n = cfg.grid_n;
  const double w = r.width() / static_cast<double>(n);
  std::vector<double> potential(n);
  for (std::size_t i = 0; i < n; ++i)
    potential[i] = transfer_potential(cfg.kernel, r, r.a + w * (static_cast<double>(i) + 0.5));
  const double peak = *std::max_element(potential.begin(), potential.end());
  std::vector<double> dens(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dens[i] = std::exp((potential[i] - peak) / cfg.lambda);
    z += dens[i] * w;
  }
  for (auto& d : dens) d /= z;
  return SamplingDistribution(r, {}, std::move(dens));
}

// Differential entropy -∫ p log p of a density-only distribution, exact for
// the piecewise-constant cells.
inline double entropy(const SamplingDistribution& dist) {
  if (!dist.atoms().empty()) throw DomainError("entropy is undefined (-inf) for distributions with atoms");
  if (!dist.has_density()) throw DomainError("entropy needs a density");
  double h = 0.0;
  for (std::size_t i = 0; i < dist.cells(); ++i) {
    const double p = dist.density()[i];
    if (p > 0.0) h -= (dist.cell_hi(i) - dist.cell_lo(i)) * p * std::log(p);
  }
  return h;
}

// S(p) + λ H[p], with S(p) the integral (not the range mean).
inline double regularized_objective(const SamplingDistribution& dist, const OptimizationConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw ParameterError("entropy weight lambda must be > 0, got " + numfmt::format(cfg.lambda));
  const double h = entropy(dist);
  return total_signal(dist, cfg.kernel) + cfg.lambda * h;
}

namespace detail {

// A[j * cells + i]: mean of K(·, y_j) over cell i by the two-point rule.
inline std::vector<double> cell_average_kernel(const KernelSpec& k, const std::vector<double>& edges,
                                               const std::vector<double>& ys) {
  const std::size_t cells = edges.size() - 1;
  std::vector<double> a(ys.size() * cells);
  std::vector<double> at_edges(edges.size());
  for (std::size_t j = 0; j < ys.size(); ++j) {
    for (std::size_t e = 0; e < edges.size(); ++e) at_edges[e] = k(edges[e], ys[j]);
    for (std::size_t i = 0; i < cells; ++i) a[j * cells + i] = 0.5 * (at_edges[i] + at_edges[i + 1]);
  }
  return a;
}

}  // namespace detail

inline MaxMinSolution optimize_max_min(const OptimizationConfig& cfg, const SimplexOptions& opt = {}) {
  if (cfg.objective != Objective::MaxMin) throw ParameterError("optimize_max_min needs the MaxMin objective");
  cfg.validate();
  const MagRange& r = cfg.range;
  const std::size_t cells = cfg.grid_n;
  const std::size_t targets = cfg.grid_n;
  const double w = r.width() / static_cast<double>(cells);

  std::vector<double> edges(cells + 1);
  for (std::size_t i = 0; i < cells; ++i) edges[i] = r.a + w * static_cast<double>(i);
  edges[cells] = r.b;
  const auto ys = uniform_grid(r.a, r.b, targets);
  const auto a = detail::cell_average_kernel(cfg.kernel, edges, ys);

  // Packing LP: one row per cell, one column per target.
  std::vector<double> at(cells * targets);
  for (std::size_t j = 0; j < targets; ++j)
    for (std::size_t i = 0; i < cells; ++i) at[i * targets + j] = a[j * cells + i];
  const std::vector<double> ones_rows(cells, 1.0), ones_cols(targets, 1.0);

  DenseSimplex lp(cells, targets, at, ones_rows, ones_cols);
  const LpResult res = lp.solve(opt);
  if (res.status == LpStatus::IterationLimit)
    throw SolverError("max-min simplex hit its iteration budget after " + std::to_string(res.iterations) + " pivots",
                      res.objective);
  if (res.status == LpStatus::Unbounded) throw SolverError("max-min packing LP reported unbounded", 0.0);

  // Independent certificate check on the recovered dual q.
  std::vector<double> q = res.dual;
  double q_sum = 0.0, u_sum = 0.0, dual_residual = 0.0, primal_residual = 0.0;
  for (auto& v : q) {
    dual_residual = std::max(dual_residual, -v);
    v = std::max(v, 0.0);
    q_sum += v;
  }
  for (double u : res.x) {
    primal_residual = std::max(primal_residual, -u);
    u_sum += u;
  }
  for (std::size_t j = 0; j < targets; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < cells; ++i) s += a[j * cells + i] * q[i];
    dual_residual = std::max(dual_residual, 1.0 - s);
  }
  for (std::size_t i = 0; i < cells; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < targets; ++j) s += at[i * targets + j] * res.x[j];
    primal_residual = std::max(primal_residual, s - 1.0);
  }
  const double gap = std::abs(q_sum - u_sum) / std::max(1.0, u_sum);
  const double residual = std::max({dual_residual, primal_residual, gap});
  if (!(q_sum > 0.0) || residual > 1e-6)
    throw SolverError("max-min simplex solution failed certification", residual);

  std::vector<double> dens(cells);
  for (std::size_t i = 0; i < cells; ++i) dens[i] = q[i] / q_sum / w;
  SamplingDistribution dist(r, {}, std::move(dens));

  // achieved_t is measured on the returned distribution, not taken from the LP.
  const auto prof = accumulated_signal(dist, cfg.kernel, targets);
  MaxMinSolution sol{std::move(dist), prof.min_value, {}, 1.0 / u_sum, dual_residual, primal_residual, res.iterations};
  for (std::size_t j = 0; j < targets; ++j)
    if (prof.values[j] - sol.achieved_t < 1e-6) sol.active_set.push_back(j);
  if (sol.upper_bound - sol.achieved_t > 1e-6)
    throw SolverError("max-min optimality gap exceeds tolerance", sol.upper_bound - sol.achieved_t);
  return sol;
}

}  // namespace magsamp
