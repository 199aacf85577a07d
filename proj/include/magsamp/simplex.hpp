#pragma once

// Dense-tableau primal simplex for
//
//     maximize cᵀx  subject to  A x <= b,  x >= 0,  with b >= 0.
//
// The all-slack basis is feasible, so no phase one is needed. Entering
// columns follow Dantzig's largest-coefficient rule; after a run of
// degenerate pivots the solver falls back to Bland's rule, which cannot
// cycle, and returns to Dantzig once the objective moves again.
//
// The tableau is stored in the compact exchange form: one column per
// nonbasic variable and one row per basic variable, so a pivot costs
// O(m * n) on an m x n problem.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"

namespace magsamp {

enum class LpStatus { Optimal, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;     // primal, one per structural column
  std::vector<double> dual;  // one per constraint row, >= 0 at optimum
  std::size_t iterations = 0;
  std::size_t bland_pivots = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-11;
  double optimality_tol = 1e-11;
  std::size_t max_iterations = 0;  // 0: 50 * (rows + cols)
  std::size_t degenerate_run = 50;
};

class DenseSimplex {
 public:
  // `a` is row-major rows x cols.
  DenseSimplex(std::size_t rows, std::size_t cols, std::span<const double> a, std::span<const double> b,
               std::span<const double> c)
      : m_(rows), n_(cols), width_(cols + 1), d_((rows + 1) * (cols + 1)), basic_(rows), nonbasic_(cols) {
    if (a.size() != rows * cols || b.size() != rows || c.size() != cols)
      throw ShapeError("simplex: inconsistent problem dimensions");
    for (std::size_t i = 0; i < m_; ++i) {
      if (!(b[i] >= 0.0)) throw ParameterError("simplex: right-hand side must be nonnegative");
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = a[i * cols + j];
      at(i, n_) = b[i];
      basic_[i] = n_ + i;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      at(m_, j) = -c[j];
      nonbasic_[j] = j;
    }
    at(m_, n_) = 0.0;
  }

  LpResult solve(const SimplexOptions& opt = {}) {
    LpResult res;
    const std::size_t budget = opt.max_iterations ? opt.max_iterations : 50 * (m_ + n_);
    std::size_t degenerate = 0;
    bool bland = false;

    while (res.iterations < budget) {
      const std::size_t s = entering(bland, opt.optimality_tol);
      if (s == npos) {
        res.status = LpStatus::Optimal;
        break;
      }
      const std::size_t r = leaving(s, opt.pivot_tol);
      if (r == npos) {
        res.status = LpStatus::Unbounded;
        break;
      }
      const double before = at(m_, n_);
      pivot(r, s);
      ++res.iterations;
      if (bland) ++res.bland_pivots;
      if (at(m_, n_) > before) {
        degenerate = 0;
        bland = false;
      } else if (++degenerate >= opt.degenerate_run) {
        bland = true;
      }
    }

    res.objective = at(m_, n_);
    res.x.assign(n_, 0.0);
    res.dual.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basic_[i] < n_) res.x[basic_[i]] = at(i, n_);
    for (std::size_t j = 0; j < n_; ++j)
      if (nonbasic_[j] >= n_) res.dual[nonbasic_[j] - n_] = at(m_, j);
    return res;
  }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  double& at(std::size_t i, std::size_t j) { return d_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return d_[i * width_ + j]; }

  std::size_t entering(bool bland, double tol) const {
    std::size_t best = npos;
    for (std::size_t j = 0; j < n_; ++j) {
      const double rc = at(m_, j);
      if (rc >= -tol) continue;
      if (best == npos) {
        best = j;
      } else if (bland ? nonbasic_[j] < nonbasic_[best] : rc < at(m_, best)) {
        best = j;
      }
    }
    return best;
  }

  // Minimum ratio test; ties go to the smallest basic variable index.
  std::size_t leaving(std::size_t s, double tol) const {
    std::size_t best = npos;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double coef = at(i, s);
      if (coef <= tol) continue;
      const double ratio = at(i, n_) / coef;
      if (best == npos || ratio < best_ratio || (ratio == best_ratio && basic_[i] < basic_[best])) {
        best = i;
        best_ratio = ratio;
      }
    }
    return best;
  }

  void pivot(std::size_t r, std::size_t s) {
    const double inv = 1.0 / at(r, s);
    double* prow = &d_[r * width_];
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* row = &d_[i * width_];
      const double factor = row[s] * inv;
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= prow[j] * factor;
      row[s] = -factor;
    }
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[s] = inv;
    // keep the basic values from drifting below zero
    for (std::size_t i = 0; i < m_; ++i)
      if (at(i, n_) < 0.0) at(i, n_) = 0.0;
    std::swap(basic_[r], nonbasic_[s]);
  }

  std::size_t m_, n_, width_;
  std::vector<double> d_;
  std::vector<std::size_t> basic_, nonbasic_;
};

}  // namespace magsamp
