#pragma once

// Run manifests: `<out>.manifest.txt`, one `key value` line per entry,
// keys sorted.

#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

#include "error.hpp"

namespace magsamp {

inline constexpr const char* kToolVersion = "0.1.0";

// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open for digest");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

class RunManifest {
 public:
  explicit RunManifest(std::string subcommand) { entries_["subcommand"] = std::move(subcommand); entries_["tool_version"] = kToolVersion; }

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void add_input(const std::string& role, const std::string& path) {
    entries_["input." + role + ".path"] = path;
    entries_["input." + role + ".fnv1a64"] = hex64(fnv1a64_file(path));
  }

  const std::map<std::string, std::string>& entries() const { return entries_; }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << ' ' << v << '\n';
  }

  void save_beside(const std::string& output_path) const {
    std::ofstream out(output_path + ".manifest.txt", std::ios::binary);
    if (!out) throw Error("cannot write manifest for " + output_path);
    write(out);
  }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace magsamp
