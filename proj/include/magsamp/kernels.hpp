#pragma once

// Magnification-similarity kernels and their transfer potentials.
//
// A kernel K(x, y) models how much training at magnification x (in microns
// per pixel) improves the representation at magnification y. The transfer
// potential K̄(x) = ∫_a^b K(x, y) dy is the total benefit of one sample at x
// over the whole range.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "numfmt.hpp"
#include "quadrature.hpp"

namespace magsamp {

struct MagRange {
  double a = 0.25;
  double b = 2.0;

  MagRange() = default;
  MagRange(double lo, double hi) : a(lo), b(hi) {
    if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
      throw DomainError("magnification range needs 0 < a < b, got [" + numfmt::format(lo) + ", " +
                        numfmt::format(hi) + "]");
  }

  double width() const { return b - a; }
  bool contains(double x) const { return x >= a && x <= b; }

  friend bool operator==(const MagRange&, const MagRange&) = default;
};

enum class KernelKind { AbsDistance, InfoOverlap, CustomTabulated };

// Rectilinear table of kernel samples, bilinearly interpolated.
struct KernelTable {
  std::vector<double> xs;      // strictly increasing
  std::vector<double> ys;      // strictly increasing
  std::vector<double> values;  // row-major, values[ix * ys.size() + iy]

  double at(std::size_t ix, std::size_t iy) const { return values[ix * ys.size() + iy]; }

  bool covers(const MagRange& r) const {
    return xs.front() <= r.a && xs.back() >= r.b && ys.front() <= r.a && ys.back() >= r.b;
  }

  double interpolate(double x, double y) const {
    if (x < xs.front() || x > xs.back() || y < ys.front() || y > ys.back())
      throw RangeError("custom kernel queried outside its table at (" + numfmt::format(x) + ", " +
                       numfmt::format(y) + ")");
    auto [ix, tx] = locate(xs, x);
    auto [iy, ty] = locate(ys, y);
    const double v00 = at(ix, iy), v01 = at(ix, iy + 1);
    const double v10 = at(ix + 1, iy), v11 = at(ix + 1, iy + 1);
    return (1.0 - tx) * ((1.0 - ty) * v00 + ty * v01) + tx * ((1.0 - ty) * v10 + ty * v11);
  }

 private:
  // Cell index and fractional position; exact at nodes.
  static std::pair<std::size_t, double> locate(const std::vector<double>& axis, double v) {
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t i = static_cast<std::size_t>(it - axis.begin());
    i = std::clamp<std::size_t>(i, 1, axis.size() - 1) - 1;
    const double t = (v - axis[i]) / (axis[i + 1] - axis[i]);
    return {i, t};
  }
};

class KernelSpec {
 public:
  static KernelSpec abs_distance() { return KernelSpec(KernelKind::AbsDistance); }
  static KernelSpec info_overlap() { return KernelSpec(KernelKind::InfoOverlap); }

  // Builds a tabulated kernel; values are row-major over (xs, ys).
  static KernelSpec custom(std::vector<double> xs, std::vector<double> ys, std::vector<double> values,
                           std::string label = "custom") {
    if (xs.size() < 2 || ys.size() < 2) throw ParameterError("custom kernel table needs at least 2x2 samples");
    if (values.size() != xs.size() * ys.size()) throw ShapeError("custom kernel table has wrong number of values");
    auto increasing = [](const std::vector<double>& v) {
      return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
    };
    if (!increasing(xs) || !increasing(ys)) throw ParameterError("custom kernel axes must be strictly increasing");
    if (xs.front() <= 0.0 || ys.front() <= 0.0) throw DomainError("custom kernel axes must be positive mpp values");
    for (double v : values)
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("custom kernel values must be finite and nonnegative");
    KernelSpec k(KernelKind::CustomTabulated);
    k.table_ = std::make_shared<const KernelTable>(KernelTable{std::move(xs), std::move(ys), std::move(values)});
    k.label_ = std::move(label);
    return k;
  }

  // Tabulates f(|x - y|) on a square grid of n nodes spanning `range`.
  template <typename F>
  static KernelSpec from_distance_profile(F&& f, const MagRange& range, std::size_t n) {
    auto axis = uniform_grid(range.a, range.b, n);
    std::vector<double> values(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) values[i * n + j] = f(std::abs(axis[i] - axis[j]));
    return custom(axis, axis, std::move(values), "distance-profile");
  }

  // Parses "abs", "info" or "custom:<path>".
  static KernelSpec parse(const std::string& selector);

  // Loads a CSV with header `x,y,value` holding a full rectilinear grid.
  static KernelSpec load_csv(const std::string& path);

  KernelKind kind() const { return kind_; }
  const KernelTable* table() const { return table_.get(); }

  std::string name() const {
    switch (kind_) {
      case KernelKind::AbsDistance: return "abs";
      case KernelKind::InfoOverlap: return "info";
      case KernelKind::CustomTabulated: return label_;
    }
    return {};
  }

  // Throws RangeError when a tabulated kernel does not cover `r`.
  void check_covers(const MagRange& r) const {
    if (table_ && !table_->covers(r))
      throw RangeError("custom kernel table does not cover the range [" + numfmt::format(r.a) + ", " +
                       numfmt::format(r.b) + "]");
  }

  double operator()(double x, double y) const {
    switch (kind_) {
      case KernelKind::AbsDistance: return 1.0 / (1.0 + std::abs(x - y));
      case KernelKind::InfoOverlap: {
        const double ratio = std::min(x, y) / std::max(x, y);
        return ratio * ratio;
      }
      case KernelKind::CustomTabulated: return table_->interpolate(x, y);
    }
    return 0.0;
  }

 private:
  explicit KernelSpec(KernelKind kind) : kind_(kind) {}

  KernelKind kind_;
  std::shared_ptr<const KernelTable> table_;
  std::string label_;
};

inline double eval_kernel(const KernelSpec& spec, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw DomainError("kernel arguments must be positive mpp values, got (" + numfmt::format(x) + ", " +
                      numfmt::format(y) + ")");
  return spec(x, y);
}

namespace detail {

inline void require_in_range(const MagRange& range, double x) {
  if (!range.contains(x))
    throw RangeError("mpp " + numfmt::format(x) + " outside range [" + numfmt::format(range.a) + ", " +
                     numfmt::format(range.b) + "]");
}

// Trapezoid of a tabulated kernel over y in [a, b], using the table's own y
// nodes as breakpoints. Exact for the bilinear interpolant.
inline double tabulated_potential(const KernelTable& t, const MagRange& r, double x) {
  std::vector<double> nodes{r.a};
  for (double y : t.ys)
    if (y > r.a && y < r.b) nodes.push_back(y);
  nodes.push_back(r.b);
  std::vector<double> vals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = t.interpolate(x, nodes[i]);
  return trapezoid(nodes, vals);
}

}  // namespace detail

// K̄(x) = ∫_a^b K(x, y) dy. Closed form for the built-in kernels.
inline double transfer_potential(const KernelSpec& spec, const MagRange& range, double x) {
  detail::require_in_range(range, x);
  const double a = range.a, b = range.b;
  switch (spec.kind()) {
    case KernelKind::AbsDistance: return std::log1p(x - a) + std::log1p(b - x);
    case KernelKind::InfoOverlap: return (x * x * x - a * a * a) / (3.0 * x * x) + x - x * x / b;
    case KernelKind::CustomTabulated:
      spec.check_covers(range);
      return detail::tabulated_potential(*spec.table(), range, x);
  }
  return 0.0;
}

// ∫_lo^hi K̄(x) dx for a sub-interval of the range. Closed-form
// antiderivatives for the built-in kernels; for tabulated kernels a
// trapezoid over `intervals` equal steps.
inline double integrated_potential(const KernelSpec& spec, const MagRange& range, double lo, double hi,
                                   std::size_t intervals = 1) {
  const double a = range.a, b = range.b;
  switch (spec.kind()) {
    case KernelKind::AbsDistance: {
      auto anti = [&](double x) {
        const double u = 1.0 + x - a, v = 1.0 + b - x;
        return (u * std::log(u) - u) - (v * std::log(v) - v);
      };
      return anti(hi) - anti(lo);
    }
    case KernelKind::InfoOverlap: {
      auto anti = [&](double x) { return 2.0 * x * x / 3.0 + a * a * a / (3.0 * x) - x * x * x / (3.0 * b); };
      return anti(hi) - anti(lo);
    }
    case KernelKind::CustomTabulated:
      return trapezoid([&](double x) { return transfer_potential(spec, range, x); }, lo, hi, intervals);
  }
  return 0.0;
}

struct TransferPotentialCurve {
  MagRange range;
  std::vector<double> xs;
  std::vector<double> values;
  double argmax_x = 0.0;
  double max_value = 0.0;
};

inline TransferPotentialCurve transfer_potential_curve(const KernelSpec& spec, const MagRange& range,
                                                       std::size_t grid_n) {
  if (grid_n < 2) throw ParameterError("transfer potential curve needs grid_n >= 2");
  TransferPotentialCurve c;
  c.range = range;
  c.xs = uniform_grid(range.a, range.b, grid_n);
  c.values.resize(grid_n);
  for (std::size_t i = 0; i < grid_n; ++i) c.values[i] = transfer_potential(spec, range, c.xs[i]);
  // strict > keeps the smallest x on ties
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid_n; ++i)
    if (c.values[i] > c.values[best]) best = i;
  c.argmax_x = c.xs[best];
  c.max_value = c.values[best];
  return c;
}

inline KernelSpec KernelSpec::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open custom kernel file");
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty custom kernel file");
  ++lineno;
  if (numfmt::trim(line) != "x,y,value") throw ParseError(path, 1, "expected header `x,y,value`");
  std::map<std::pair<double, double>, double> samples;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = numfmt::trim(line);
    if (body.empty()) continue;
    auto fields = numfmt::split(body, ',');
    if (fields.size() != 3) throw ParseError(path, lineno, "expected 3 fields");
    auto x = numfmt::parse_double(numfmt::trim(fields[0]));
    auto y = numfmt::parse_double(numfmt::trim(fields[1]));
    auto v = numfmt::parse_double(numfmt::trim(fields[2]));
    if (!x || !y || !v) throw ParseError(path, lineno, "non-numeric field");
    if (!samples.emplace(std::make_pair(*x, *y), *v).second)
      throw ParseError(path, lineno, "duplicate sample");
  }
  std::vector<double> xs, ys;
  for (const auto& [key, _] : samples) {
    xs.push_back(key.first);
    ys.push_back(key.second);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  if (samples.size() != xs.size() * ys.size())
    throw ParseError(path, 0, "samples do not form a full rectilinear grid");
  std::vector<double> values;
  values.reserve(samples.size());
  for (double x : xs)
    for (double y : ys) values.push_back(samples.at({x, y}));
  return custom(std::move(xs), std::move(ys), std::move(values), "custom:" + path);
}

inline KernelSpec KernelSpec::parse(const std::string& selector) {
  if (selector == "abs") return abs_distance();
  if (selector == "info") return info_overlap();
  if (selector.rfind("custom:", 0) == 0) return load_csv(selector.substr(7));
  throw UsageError("unknown kernel `" + selector + "` (expected abs, info or custom:<path>)");
}

}  // namespace magsamp
