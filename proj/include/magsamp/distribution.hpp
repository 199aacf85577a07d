#pragma once

// Sampling distributions over magnification: discrete atoms plus an optional
// piecewise-constant density on equal cells. Total mass is normalized to 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "kernels.hpp"
#include "numfmt.hpp"

namespace magsamp {

struct Atom {
  double location = 0.0;
  double weight = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

class SamplingDistribution {
 public:
  // Validates and rescales so atoms and density together carry unit mass.
  SamplingDistribution(MagRange range, std::vector<Atom> atoms, std::vector<double> density = {})
      : range_(range), atoms_(std::move(atoms)), density_(std::move(density)) {
    for (const auto& at : atoms_) {
      if (!std::isfinite(at.weight) || at.weight < 0.0) throw ValidationError("atom weights must be finite and >= 0");
      if (!range_.contains(at.location))
        throw RangeError("atom at " + numfmt::format(at.location) + " lies outside the range");
    }
    for (double d : density_)
      if (!std::isfinite(d) || d < 0.0) throw ValidationError("density values must be finite and >= 0");
    const double mass = raw_mass();
    if (!(mass > 0.0)) throw ValidationError("distribution has zero total mass");
    for (auto& at : atoms_) at.weight /= mass;
    for (auto& d : density_) d /= mass;
  }

  static SamplingDistribution uniform(const MagRange& range, std::size_t cells = 1000) {
    return SamplingDistribution(range, {}, std::vector<double>(cells, 1.0));
  }

  static SamplingDistribution point_mass(const MagRange& range, double x) {
    return SamplingDistribution(range, {{x, 1.0}});
  }

  // Equal weights on the given locations.
  static SamplingDistribution discrete_uniform(const MagRange& range, const std::vector<double>& locations) {
    std::vector<Atom> atoms;
    for (double x : locations) atoms.push_back({x, 1.0});
    return SamplingDistribution(range, std::move(atoms));
  }

  const MagRange& range() const { return range_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& density() const { return density_; }
  bool has_density() const { return !density_.empty(); }
  bool density_only() const { return atoms_.empty() && has_density(); }
  std::size_t cells() const { return density_.size(); }
  double cell_width() const { return density_.empty() ? 0.0 : range_.width() / static_cast<double>(density_.size()); }
  double cell_lo(std::size_t i) const { return range_.a + cell_width() * static_cast<double>(i); }
  double cell_hi(std::size_t i) const {
    return i + 1 == density_.size() ? range_.b : range_.a + cell_width() * static_cast<double>(i + 1);
  }

  double total_mass() const { return raw_mass(); }

  // Convex combination alpha * p + (1 - alpha) * q. Densities must share a
  // cell count (or be absent on one side).
  static SamplingDistribution mixture(double alpha, const SamplingDistribution& p, const SamplingDistribution& q) {
    if (!(p.range_ == q.range_)) throw RangeError("mixture of distributions over different ranges");
    if (p.has_density() && q.has_density() && p.cells() != q.cells())
      throw ShapeError("mixture of densities with different cell counts");
    std::vector<Atom> atoms;
    for (const auto& at : p.atoms_) atoms.push_back({at.location, alpha * at.weight});
    for (const auto& at : q.atoms_) atoms.push_back({at.location, (1.0 - alpha) * at.weight});
    std::vector<double> dens(std::max(p.cells(), q.cells()), 0.0);
    for (std::size_t i = 0; i < p.cells(); ++i) dens[i] += alpha * p.density_[i];
    for (std::size_t i = 0; i < q.cells(); ++i) dens[i] += (1.0 - alpha) * q.density_[i];
    return SamplingDistribution(p.range_, std::move(atoms), std::move(dens));
  }

 private:
  double raw_mass() const {
    double m = 0.0;
    for (const auto& at : atoms_) m += at.weight;
    const double w = cell_width();
    for (double d : density_) m += d * w;
    return m;
  }

  MagRange range_;
  std::vector<Atom> atoms_;
  std::vector<double> density_;
};

// Text format:
//   #msdist v1
//   range <a> <b>
//   atom <x> <w>          (zero or more)
//   density <n>           (optional, followed by n values over one or more lines)
// Further lines starting with '#' are comments.

inline void write_distribution(std::ostream& out, const SamplingDistribution& d,
                               const std::vector<std::string>& comments = {}) {
  out << "#msdist v1\n";
  out << "range " << numfmt::format(d.range().a) << ' ' << numfmt::format(d.range().b) << '\n';
  for (const auto& c : comments) out << "# " << c << '\n';
  for (const auto& at : d.atoms()) out << "atom " << numfmt::format(at.location) << ' ' << numfmt::format(at.weight) << '\n';
  if (d.has_density()) {
    out << "density " << d.cells() << '\n';
    for (std::size_t i = 0; i < d.cells(); ++i) {
      out << numfmt::format(d.density()[i]);
      out << ((i + 1) % 8 == 0 || i + 1 == d.cells() ? '\n' : ' ');
    }
  }
}

inline SamplingDistribution read_distribution(std::istream& in, const std::string& source = "<distribution>") {
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> ParseError { return ParseError(source, lineno, msg); };

  if (!std::getline(in, line)) {
    lineno = 1;
    throw fail("empty distribution file");
  }
  ++lineno;
  if (numfmt::trim(line) != "#msdist v1") throw fail("expected `#msdist v1` header");

  std::optional<MagRange> range;
  std::vector<Atom> atoms;
  std::vector<double> density;
  std::size_t density_expected = 0;
  bool density_seen = false;

  while (std::getline(in, line)) {
    ++lineno;
    auto body = numfmt::trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto tok = numfmt::split_ws(body);
    if (density.size() < density_expected) {
      for (auto t : tok) {
        auto v = numfmt::parse_double(t);
        if (!v) throw fail("non-numeric density value `" + std::string(t) + "`");
        if (density.size() == density_expected) throw fail("more density values than declared");
        density.push_back(*v);
      }
      continue;
    }
    if (tok[0] == "range") {
      if (lineno != 2 || tok.size() != 3) throw fail("`range <a> <b>` must be line 2");
      auto a = numfmt::parse_double(tok[1]);
      auto b = numfmt::parse_double(tok[2]);
      if (!a || !b) throw fail("non-numeric range bound");
      try {
        range = MagRange(*a, *b);
      } catch (const Error& e) {
        throw fail(e.what());
      }
    } else if (tok[0] == "atom") {
      if (!range) throw fail("atom before range");
      if (tok.size() != 3) throw fail("expected `atom <x> <w>`");
      auto x = numfmt::parse_double(tok[1]);
      auto w = numfmt::parse_double(tok[2]);
      if (!x || !w) throw fail("non-numeric atom field");
      atoms.push_back({*x, *w});
    } else if (tok[0] == "density") {
      if (!range) throw fail("density before range");
      if (density_seen) throw fail("second density block");
      if (tok.size() != 2) throw fail("expected `density <n>`");
      auto n = numfmt::parse_int<std::size_t>(tok[1]);
      if (!n || *n == 0) throw fail("density cell count must be a positive integer");
      density_seen = true;
      density_expected = *n;
      density.reserve(*n);
    } else {
      throw fail("unknown record `" + std::string(tok[0]) + "`");
    }
  }
  if (!range) throw fail("missing `range` line");
  if (density.size() != density_expected)
    throw fail("density declared " + std::to_string(density_expected) + " values, found " +
               std::to_string(density.size()));
  try {
    return SamplingDistribution(*range, std::move(atoms), std::move(density));
  } catch (const Error& e) {
    throw ParseError(source, 0, e.what());
  }
}

inline SamplingDistribution load_distribution(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open distribution file");
  return read_distribution(in, path);
}

inline void save_distribution(const std::string& path, const SamplingDistribution& d,
                              const std::vector<std::string>& comments = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_distribution(out, d, comments);
}

}  // namespace magsamp
