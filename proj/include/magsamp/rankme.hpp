#pragma once

// RankMe effective rank of embedding sets, per-magnification profiles and
// centroid cosine similarities.
//
//   RankMe(Z) = exp(-Σ_k p_k log p_k),   p_k = σ_k / Σ_i σ_i + ε
//
// The p_k are used as written, without renormalizing after adding ε.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "error.hpp"
#include "numfmt.hpp"

namespace magsamp {

inline constexpr double kDefaultRankMeEpsilon = 1e-7;
inline constexpr double kDefaultGroupTolerance = 1e-6;

struct EmbeddingSet {
  std::vector<std::string> ids;
  std::vector<double> mpps;
  Eigen::MatrixXd vectors;  // N x K

  std::size_t size() const { return mpps.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }

  void validate() const {
    if (mpps.empty()) throw ValidationError("embedding set is empty");
    if (vectors.cols() < 1) throw ValidationError("embedding dimension must be >= 1");
    if (static_cast<std::size_t>(vectors.rows()) != mpps.size() || ids.size() != mpps.size())
      throw ShapeError("embedding set has inconsistent row counts");
    for (double m : mpps)
      if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("embedding mpp values must be finite and > 0");
    if (!vectors.allFinite()) throw ValidationError("embedding vectors contain non-finite values");
  }
};

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& z) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(z);
  return svd.singularValues();
}

// Effective rank from singular values (any order, nonnegative).
inline double rankme_from_singular_values(const Eigen::VectorXd& sigma, double epsilon) {
  const double l1 = sigma.sum();
  if (!(l1 > 0.0)) throw DegenerateInputError("rankme of an all-zero matrix (singular values sum to 0)");
  double h = 0.0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    const double p = sigma[k] / l1 + epsilon;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::exp(h);
}

inline double rankme(const Eigen::MatrixXd& z, double epsilon = kDefaultRankMeEpsilon) {
  if (z.rows() < 1 || z.cols() < 1) throw ValidationError("rankme needs a non-empty matrix");
  if (!(epsilon >= 0.0)) throw ParameterError("rankme epsilon must be >= 0");
  if (!z.allFinite()) throw ValidationError("rankme input contains non-finite values");
  return rankme_from_singular_values(singular_values(z), epsilon);
}

struct RankMeGroup {
  double mpp = 0.0;
  std::size_t count = 0;
  double rankme = 0.0;
};

struct RankMeProfile {
  std::vector<RankMeGroup> groups;
  double epsilon = kDefaultRankMeEpsilon;
  std::vector<std::string> warnings;
};

namespace detail {

struct Grouping {
  std::vector<double> mpps;                     // representative (smallest) mpp per group
  std::vector<std::vector<std::size_t>> rows;   // canonical row order per group
};

// Rows sorted by (mpp, id, vector); a new group starts when an mpp exceeds
// the current group's first mpp by more than the tolerance. The canonical
// order makes every output independent of the input row order.
inline Grouping group_rows(const EmbeddingSet& set, double tolerance) {
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (set.mpps[l] != set.mpps[r]) return set.mpps[l] < set.mpps[r];
    if (set.ids[l] != set.ids[r]) return set.ids[l] < set.ids[r];
    for (Eigen::Index k = 0; k < set.vectors.cols(); ++k)
      if (set.vectors(l, k) != set.vectors(r, k)) return set.vectors(l, k) < set.vectors(r, k);
    return false;
  });
  Grouping g;
  for (std::size_t row : order) {
    if (g.mpps.empty() || set.mpps[row] - g.mpps.back() > tolerance) {
      g.mpps.push_back(set.mpps[row]);
      g.rows.emplace_back();
    }
    g.rows.back().push_back(row);
  }
  return g;
}

inline Eigen::MatrixXd gather(const EmbeddingSet& set, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), set.vectors.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = set.vectors.row(rows[i]);
  return m;
}

}  // namespace detail

inline RankMeProfile rankme_profile(const EmbeddingSet& set, double epsilon = kDefaultRankMeEpsilon,
                                    double group_tolerance = kDefaultGroupTolerance) {
  set.validate();
  if (!(group_tolerance >= 0.0)) throw ParameterError("group tolerance must be >= 0");
  const auto g = detail::group_rows(set, group_tolerance);
  RankMeProfile prof;
  prof.epsilon = epsilon;
  for (std::size_t k = 0; k < g.mpps.size(); ++k) {
    const auto& rows = g.rows[k];
    if (rows.size() < 2)
      prof.warnings.push_back("group at mpp " + numfmt::format(g.mpps[k]) + " has only " +
                              std::to_string(rows.size()) + " row");
    prof.groups.push_back({g.mpps[k], rows.size(), rankme(detail::gather(set, rows), epsilon)});
  }
  return prof;
}

struct SimilarityMatrix {
  std::vector<double> mpps;
  Eigen::MatrixXd cosines;
};

inline SimilarityMatrix centroid_similarity(const EmbeddingSet& set, double group_tolerance = kDefaultGroupTolerance) {
  set.validate();
  const auto g = detail::group_rows(set, group_tolerance);
  const auto n = static_cast<Eigen::Index>(g.mpps.size());
  Eigen::MatrixXd centroids(n, set.vectors.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    centroids.row(k) = detail::gather(set, g.rows[static_cast<std::size_t>(k)]).colwise().mean();
    if (centroids.row(k).norm() == 0.0)
      throw DegenerateInputError("centroid of group at mpp " + numfmt::format(g.mpps[static_cast<std::size_t>(k)]) +
                                 " is zero");
  }
  SimilarityMatrix out{g.mpps, Eigen::MatrixXd::Identity(n, n)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = centroids.row(i).dot(centroids.row(j)) / (centroids.row(i).norm() * centroids.row(j).norm());
      out.cosines(i, j) = out.cosines(j, i) = c;
    }
  return out;
}

// Min-max scaling across every (profile, mpp) cell: v' = (v - min) / (max - min).
inline std::vector<std::vector<double>> minmax_normalize_profiles(const std::vector<RankMeProfile>& profiles) {
  if (profiles.size() < 2) throw ParameterError("normalization needs at least 2 profiles");
  const auto& ref = profiles.front().groups;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : profiles) {
    if (p.groups.size() != ref.size()) throw ShapeError("profiles have different magnification grids");
    for (std::size_t k = 0; k < ref.size(); ++k) {
      if (std::abs(p.groups[k].mpp - ref[k].mpp) > 1e-9) throw ShapeError("profiles have different magnification grids");
      lo = std::min(lo, p.groups[k].rankme);
      hi = std::max(hi, p.groups[k].rankme);
    }
  }
  if (!(hi > lo)) throw DegenerateInputError("all profile values are equal; min-max normalization is undefined");
  std::vector<std::vector<double>> out;
  for (const auto& p : profiles) {
    std::vector<double> row;
    for (const auto& g : p.groups) row.push_back((g.rankme - lo) / (hi - lo));
    out.push_back(std::move(row));
  }
  return out;
}

inline void write_rankme_csv(std::ostream& out, const RankMeProfile& p) {
  out << "mpp,count,rankme\n";
  for (const auto& g : p.groups) out << numfmt::format(g.mpp) << ',' << g.count << ',' << numfmt::format(g.rankme) << '\n';
}

inline void write_similarity_csv(std::ostream& out, const SimilarityMatrix& m) {
  out << "mpp";
  for (double v : m.mpps) out << ',' << numfmt::format(v);
  out << '\n';
  for (std::size_t i = 0; i < m.mpps.size(); ++i) {
    out << numfmt::format(m.mpps[i]);
    for (std::size_t j = 0; j < m.mpps.size(); ++j)
      out << ',' << numfmt::format(m.cosines(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out << '\n';
  }
}

// CSV: header `id,mpp,d0,...,d{K-1}`.
inline EmbeddingSet read_embeddings_csv(std::istream& in, const std::string& source = "<embeddings>") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty embedding file");
  auto header = numfmt::split(numfmt::trim(line), ',');
  if (header.size() < 3 || header[0] != "id" || header[1] != "mpp")
    throw ParseError(source, 1, "expected header `id,mpp,d0,...`");
  const std::size_t k = header.size() - 2;
  for (std::size_t i = 0; i < k; ++i)
    if (header[i + 2] != "d" + std::to_string(i)) throw ParseError(source, 1, "expected column d" + std::to_string(i));

  EmbeddingSet set;
  std::vector<double> flat;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = numfmt::trim(line);
    if (body.empty()) continue;
    auto f = numfmt::split(body, ',');
    if (f.size() != k + 2) throw ParseError(source, lineno, "expected " + std::to_string(k + 2) + " fields");
    auto mpp = numfmt::parse_double(f[1]);
    if (!mpp) throw ParseError(source, lineno, "non-numeric mpp");
    set.ids.emplace_back(f[0]);
    set.mpps.push_back(*mpp);
    for (std::size_t i = 0; i < k; ++i) {
      auto v = numfmt::parse_double(f[i + 2]);
      if (!v) throw ParseError(source, lineno, "non-numeric component d" + std::to_string(i));
      flat.push_back(*v);
    }
  }
  const auto n = static_cast<Eigen::Index>(set.mpps.size());
  set.vectors = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), n, static_cast<Eigen::Index>(k));
  return set;
}

namespace detail {

template <typename T>
T read_le(std::istream& in, const std::string& source) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw ParseError(source, 0, "truncated binary embedding file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  if constexpr (std::is_floating_point_v<T>) {
    using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    const auto bits = static_cast<Bits>(v);
    T out;
    std::memcpy(&out, &bits, sizeof(T));
    return out;
  } else {
    return static_cast<T>(v);
  }
}

template <typename T>
void write_le(std::ostream& out, T value) {
  std::uint64_t v;
  if constexpr (std::is_floating_point_v<T>) {
    using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    Bits bits;
    std::memcpy(&bits, &value, sizeof(T));
    v = bits;
  } else {
    v = static_cast<std::uint64_t>(value);
  }
  char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, sizeof(T));
}

}  // namespace detail

// Binary: "MSEB", u16 version = 1, u64 N, u32 K, then N x (f64 mpp, K x f32),
// little-endian. Ids are the row indices.
inline EmbeddingSet read_embeddings_binary(std::istream& in, const std::string& source = "<embeddings>") {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MSEB", 4) != 0) throw ParseError(source, 0, "bad embedding magic");
  const auto version = detail::read_le<std::uint16_t>(in, source);
  if (version != 1) throw ParseError(source, 0, "unsupported embedding version " + std::to_string(version));
  const auto n = detail::read_le<std::uint64_t>(in, source);
  const auto k = detail::read_le<std::uint32_t>(in, source);
  if (k == 0) throw ParseError(source, 0, "embedding dimension is 0");
  EmbeddingSet set;
  set.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::uint64_t i = 0; i < n; ++i) {
    set.ids.push_back(std::to_string(i));
    set.mpps.push_back(detail::read_le<double>(in, source));
    for (std::uint32_t j = 0; j < k; ++j)
      set.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = detail::read_le<float>(in, source);
  }
  return set;
}

inline void write_embeddings_binary(std::ostream& out, const EmbeddingSet& set) {
  out.write("MSEB", 4);
  detail::write_le<std::uint16_t>(out, 1);
  detail::write_le<std::uint64_t>(out, set.size());
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.dim()));
  for (std::size_t i = 0; i < set.size(); ++i) {
    detail::write_le<double>(out, set.mpps[i]);
    for (std::size_t j = 0; j < set.dim(); ++j)
      detail::write_le<float>(out, static_cast<float>(set.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
  }
}

inline void write_embeddings_csv(std::ostream& out, const EmbeddingSet& set) {
  out << "id,mpp";
  for (std::size_t j = 0; j < set.dim(); ++j) out << ",d" << j;
  out << '\n';
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << set.ids[i] << ',' << numfmt::format(set.mpps[i]);
    for (std::size_t j = 0; j < set.dim(); ++j)
      out << ',' << numfmt::format(set.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out << '\n';
  }
}

// Sniffs the magic to pick the binary or CSV reader.
inline EmbeddingSet load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open embedding file");
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, "MSEB", 4) == 0;
  in.clear();
  in.seekg(0);
  return binary ? read_embeddings_binary(in, path) : read_embeddings_csv(in, path);
}

}  // namespace magsamp
