#pragma once

// Continuous-magnification crop planning.
//
// A target magnification t is drawn from a SamplingDistribution by inverse
// CDF. The patch is then synthesized from a source patch at a standard
// magnification s <= t by cropping round(output * t / s) pixels and resizing
// the crop to `output` pixels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "numfmt.hpp"
#include "rng.hpp"

namespace magsamp {

// Inverse CDF of a mixed atom/density distribution. Atoms keep their exact
// weights; within a density cell the location is uniform.
class InverseCdf {
 public:
  explicit InverseCdf(const SamplingDistribution& dist) {
    const MagRange& r = dist.range();
    std::vector<Atom> atoms = dist.atoms();
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.location < y.location; });

    const std::size_t cells = std::max<std::size_t>(dist.cells(), 1);
    auto cell_lo = [&](std::size_t i) { return dist.has_density() ? dist.cell_lo(i) : r.a; };
    auto cell_hi = [&](std::size_t i) { return dist.has_density() ? dist.cell_hi(i) : r.b; };
    auto cell_density = [&](std::size_t i) { return dist.has_density() ? dist.density()[i] : 0.0; };

    std::size_t next_atom = 0;
    for (std::size_t i = 0; i < cells; ++i) {
      const double lo = cell_lo(i), hi = cell_hi(i), d = cell_density(i);
      const bool last = i + 1 == cells;
      double cursor = lo;
      while (next_atom < atoms.size() && (atoms[next_atom].location < hi || last)) {
        const Atom& at = atoms[next_atom++];
        if (at.location > cursor) push_density(cursor, at.location, d);
        push({at.location, at.location, at.weight, true});
        cursor = std::max(cursor, at.location);
      }
      if (hi > cursor) push_density(cursor, hi, d);
    }
  }

  // Smallest x with F(x) > u, for u in [0, 1).
  double quantile(double u) const {
    auto it = std::upper_bound(cum_end_.begin(), cum_end_.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cum_end_.begin());
    if (k == pieces_.size()) {
      // u at or past the accumulated mass through rounding: last piece with mass
      k = pieces_.size() - 1;
      while (k > 0 && pieces_[k].mass <= 0.0) --k;
      return pieces_[k].hi;
    }
    const Piece& p = pieces_[k];
    if (p.atom) return p.lo;
    const double before = k == 0 ? 0.0 : cum_end_[k - 1];
    const double x = p.lo + (u - before) / p.mass * (p.hi - p.lo);
    return std::clamp(x, p.lo, p.hi);
  }

  // F(x) = P[X <= x].
  double cdf(double x) const {
    double f = 0.0;
    for (const auto& p : pieces_) {
      if (p.atom) {
        if (p.lo <= x) f += p.mass;
      } else if (x >= p.hi) {
        f += p.mass;
      } else if (x > p.lo) {
        f += p.mass * (x - p.lo) / (p.hi - p.lo);
      }
    }
    return f;
  }

 private:
  struct Piece {
    double lo, hi, mass;
    bool atom;
  };

  void push_density(double lo, double hi, double d) { push({lo, hi, d * (hi - lo), false}); }

  void push(const Piece& p) {
    pieces_.push_back(p);
    cum_end_.push_back((cum_end_.empty() ? 0.0 : cum_end_.back()) + p.mass);
  }

  std::vector<Piece> pieces_;
  std::vector<double> cum_end_;
};

inline double draw_target_mpp(const InverseCdf& icdf, CounterRng& rng) { return icdf.quantile(rng.next_unit()); }

inline double draw_target_mpp(const SamplingDistribution& dist, CounterRng& rng) {
  return draw_target_mpp(InverseCdf(dist), rng);
}

struct CropPlanEntry {
  std::uint64_t index = 0;
  double target_mpp = 0.0;
  double source_mpp = 0.0;
  std::int64_t source_size_px = 0;
  std::int64_t crop_size_px = 0;
  std::int64_t output_size_px = 0;
  double offset_x_frac = 0.0;
  double offset_y_frac = 0.0;
  std::uint64_t draw_index = 0;  // RNG counter of the target draw

  friend bool operator==(const CropPlanEntry&, const CropPlanEntry&) = default;
};

struct SamplerConfig {
  SamplingDistribution distribution;
  std::vector<double> standard_mpps{0.25, 0.5, 1.0, 2.0};
  std::int64_t source_size_px = 512;
  std::int64_t output_size_px = 224;
  std::uint64_t rng_seed = 0;

  // Each plan entry consumes this many RNG draws: target, offset x, offset y.
  static constexpr std::uint64_t kDrawsPerEntry = 3;

  // Checks the standard set and that every t in the range has an admissible
  // source magnification.
  void validate() const {
    if (standard_mpps.empty()) throw ParameterError("standard magnification set is empty");
    for (std::size_t i = 0; i < standard_mpps.size(); ++i) {
      if (!(standard_mpps[i] > 0.0)) throw ParameterError("standard magnifications must be > 0");
      if (i > 0 && !(standard_mpps[i] > standard_mpps[i - 1]))
        throw ParameterError("standard magnifications must be strictly increasing");
    }
    if (output_size_px < 1 || source_size_px < output_size_px)
      throw ParameterError("need 1 <= output_size_px <= source_size_px");

    const MagRange& r = distribution.range();
    if (standard_mpps.front() > r.a)
      throw FeasibilityError("no standard magnification <= " + numfmt::format(r.a));
    // With s the largest standard <= t, out * t / s grows within each band;
    // check the supremum of every band that meets the range.
    const double limit = static_cast<double>(source_size_px) + 0.5;
    const double out = static_cast<double>(output_size_px);
    for (std::size_t k = 0; k < standard_mpps.size(); ++k) {
      const double s = standard_mpps[k];
      const bool has_next = k + 1 < standard_mpps.size();
      const double band_hi = has_next ? standard_mpps[k + 1] : r.b;
      if (band_hi <= r.a || s > r.b) continue;
      if (!has_next || band_hi > r.b) {
        if (!(out * r.b / s < limit))
          throw FeasibilityError("no admissible source magnification for t = " + numfmt::format(r.b));
      } else if (out * band_hi / s > limit) {
        throw FeasibilityError("no admissible source magnification just below t = " + numfmt::format(band_hi));
      }
    }
  }
};

inline std::int64_t round_half_up(double v) { return static_cast<std::int64_t>(std::floor(v + 0.5)); }

// Chooses the largest admissible standard s <= t and draws the crop offsets.
inline CropPlanEntry plan_crop(double t, const SamplerConfig& cfg, CounterRng& rng) {
  const MagRange& r = cfg.distribution.range();
  if (!r.contains(t)) throw RangeError("target mpp " + numfmt::format(t) + " outside the distribution range");
  CropPlanEntry e;
  e.target_mpp = t;
  e.source_size_px = cfg.source_size_px;
  e.output_size_px = cfg.output_size_px;
  bool found = false;
  for (auto it = cfg.standard_mpps.rbegin(); it != cfg.standard_mpps.rend(); ++it) {
    const double s = *it;
    if (s > t) continue;
    const std::int64_t crop = round_half_up(static_cast<double>(cfg.output_size_px) * t / s);
    if (crop <= cfg.source_size_px) {
      e.source_mpp = s;
      e.crop_size_px = std::max<std::int64_t>(crop, 1);
      found = true;
      break;
    }
  }
  if (!found) throw FeasibilityError("no admissible source magnification for t = " + numfmt::format(t));
  e.offset_x_frac = rng.next_unit();
  e.offset_y_frac = rng.next_unit();
  return e;
}

inline std::vector<CropPlanEntry> generate_plan(const SamplerConfig& cfg, std::uint64_t n) {
  if (n < 1) throw ParameterError("plan needs n >= 1");
  cfg.validate();
  const InverseCdf icdf(cfg.distribution);
  std::vector<CropPlanEntry> plan;
  plan.reserve(n);
  CounterRng rng(cfg.rng_seed);
  for (std::uint64_t i = 0; i < n; ++i) {
    rng.seek(i * SamplerConfig::kDrawsPerEntry);
    const double t = draw_target_mpp(icdf, rng);
    CropPlanEntry e = plan_crop(t, cfg, rng);
    e.index = i;
    e.draw_index = i * SamplerConfig::kDrawsPerEntry;
    plan.push_back(e);
  }
  return plan;
}

inline constexpr const char* kPlanHeader =
    "index,target_mpp,source_mpp,source_size_px,crop_size_px,output_size_px,offset_x_frac,offset_y_frac";

inline void write_plan_csv(std::ostream& out, const std::vector<CropPlanEntry>& plan) {
  out << kPlanHeader << '\n';
  for (const auto& e : plan) {
    out << e.index << ',' << numfmt::format(e.target_mpp) << ',' << numfmt::format(e.source_mpp) << ','
        << e.source_size_px << ',' << e.crop_size_px << ',' << e.output_size_px << ','
        << numfmt::format(e.offset_x_frac) << ',' << numfmt::format(e.offset_y_frac) << '\n';
  }
}

inline std::vector<CropPlanEntry> read_plan_csv(std::istream& in, const std::string& source = "<plan>") {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || numfmt::trim(line) != kPlanHeader) throw ParseError(source, 1, "bad plan header");
  std::vector<CropPlanEntry> plan;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = numfmt::trim(line);
    if (body.empty()) continue;
    auto f = numfmt::split(body, ',');
    if (f.size() != 8) throw ParseError(source, lineno, "expected 8 fields");
    CropPlanEntry e;
    auto idx = numfmt::parse_int<std::uint64_t>(f[0]);
    auto t = numfmt::parse_double(f[1]);
    auto s = numfmt::parse_double(f[2]);
    auto src = numfmt::parse_int<std::int64_t>(f[3]);
    auto crop = numfmt::parse_int<std::int64_t>(f[4]);
    auto out = numfmt::parse_int<std::int64_t>(f[5]);
    auto ox = numfmt::parse_double(f[6]);
    auto oy = numfmt::parse_double(f[7]);
    if (!idx || !t || !s || !src || !crop || !out || !ox || !oy) throw ParseError(source, lineno, "malformed field");
    e.index = *idx;
    e.target_mpp = *t;
    e.source_mpp = *s;
    e.source_size_px = *src;
    e.crop_size_px = *crop;
    e.output_size_px = *out;
    e.offset_x_frac = *ox;
    e.offset_y_frac = *oy;
    e.draw_index = e.index * SamplerConfig::kDrawsPerEntry;
    plan.push_back(e);
  }
  return plan;
}

// H x W x C float image, row-major with interleaved channels.
struct Image {
  std::uint32_t height = 0, width = 0, channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(std::uint32_t h, std::uint32_t w, std::uint32_t c, float fill = 0.0f)
      : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, fill) {}

  float& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * channels + c]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * channels + c]; }

  friend bool operator==(const Image&, const Image&) = default;
};

// Crops the planned window and resizes it with corner-aligned bilinear
// sampling: output pixel i maps to crop coordinate i * (crop - 1) / (out - 1).
inline Image apply_crop(const Image& img, const CropPlanEntry& e) {
  if (e.source_size_px < 1 || img.height != static_cast<std::uint64_t>(e.source_size_px) ||
      img.width != static_cast<std::uint64_t>(e.source_size_px))
    throw ShapeError("image is " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                     ", plan expects a square source of " + std::to_string(e.source_size_px));
  if (e.crop_size_px < 1 || e.crop_size_px > e.source_size_px || e.output_size_px < 1)
    throw ShapeError("crop window does not fit the source image");
  if (!(e.offset_x_frac >= 0.0 && e.offset_x_frac <= 1.0 && e.offset_y_frac >= 0.0 && e.offset_y_frac <= 1.0))
    throw ShapeError("crop offsets must lie in [0, 1]");

  const std::int64_t slack = e.source_size_px - e.crop_size_px;
  const std::int64_t ox = round_half_up(e.offset_x_frac * static_cast<double>(slack));
  const std::int64_t oy = round_half_up(e.offset_y_frac * static_cast<double>(slack));
  const auto out_n = static_cast<std::uint32_t>(e.output_size_px);
  Image out(out_n, out_n, img.channels);

  if (e.crop_size_px == e.output_size_px) {
    for (std::uint32_t y = 0; y < out_n; ++y)
      for (std::uint32_t x = 0; x < out_n; ++x)
        for (std::uint32_t c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(oy + y, ox + x, c);
    return out;
  }

  const double scale = out_n > 1 ? static_cast<double>(e.crop_size_px - 1) / static_cast<double>(out_n - 1) : 0.0;
  const double centre = out_n > 1 ? 0.0 : 0.5 * static_cast<double>(e.crop_size_px - 1);
  const std::int64_t last = e.source_size_px - 1;
  for (std::uint32_t y = 0; y < out_n; ++y) {
    const double sy = static_cast<double>(oy) + centre + scale * y;
    const auto y0 = static_cast<std::int64_t>(std::floor(sy));
    const std::int64_t y1 = std::min(y0 + 1, last);
    const double fy = sy - static_cast<double>(y0);
    for (std::uint32_t x = 0; x < out_n; ++x) {
      const double sx = static_cast<double>(ox) + centre + scale * x;
      const auto x0 = static_cast<std::int64_t>(std::floor(sx));
      const std::int64_t x1 = std::min(x0 + 1, last);
      const double fx = sx - static_cast<double>(x0);
      for (std::uint32_t c = 0; c < img.channels; ++c) {
        const double top = (1.0 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c);
        const double bottom = (1.0 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c);
        out.at(y, x, c) = static_cast<float>((1.0 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

// Raw image format: "MSIM", u32 H, u32 W, u32 C, then H*W*C f32, little-endian.
inline void write_image(std::ostream& out, const Image& img) {
  out.write("MSIM", 4);
  detail::put_u32(out, img.height);
  detail::put_u32(out, img.width);
  detail::put_u32(out, img.channels);
  for (float v : img.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    detail::put_u32(out, bits);
  }
}

inline Image read_image(std::istream& in, const std::string& source = "<image>") {
  unsigned char hdr[16];
  if (!in.read(reinterpret_cast<char*>(hdr), 16)) throw ParseError(source, 0, "truncated image header");
  if (std::memcmp(hdr, "MSIM", 4) != 0) throw ParseError(source, 0, "bad image magic");
  Image img(detail::get_u32(hdr + 4), detail::get_u32(hdr + 8), detail::get_u32(hdr + 12));
  std::vector<unsigned char> raw(img.data.size() * 4);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
    throw ParseError(source, 0, "truncated image payload");
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const std::uint32_t bits = detail::get_u32(raw.data() + 4 * i);
    std::memcpy(&img.data[i], &bits, 4);
  }
  return img;
}

}  // namespace magsamp
