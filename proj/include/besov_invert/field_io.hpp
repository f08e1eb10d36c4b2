#pragma once

// Binary field files:
//   "BCF1" u32 d, u32 J, then 2^{Jd} float64 coefficients in ell-order
//   "BGF1" u32 d, u32 J, then 2^{Jd} float64 grid samples, row-major
// All integers and floats little-endian.
//
// Sidecars are plain text, one key=value per line, in insertion order.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "besov_invert/errors.hpp"
#include "besov_invert/field.hpp"

namespace besov_invert::io {

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &v, sizeof(T));
    std::reverse(bytes.begin(), bytes.end());
    std::memcpy(&v, bytes.data(), sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("truncated field file: " + path);
  return to_little(v);
}

inline void write_field(const std::filesystem::path& path, const char* magic, int d, int J,
                        const std::vector<double>& values) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.write(magic, 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(J));
  for (double v : values) put<double>(os, v);
  if (!os) throw IoError("write failed: " + path.string());
}

inline std::vector<double> read_field(const std::filesystem::path& path, const char* magic, int& d, int& J) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  char m[4];
  is.read(m, 4);
  if (!is || std::memcmp(m, magic, 4) != 0) {
    throw IoError(path.string() + ": bad magic, expected " + std::string(magic, 4));
  }
  d = static_cast<int>(get<std::uint32_t>(is, path.string()));
  J = static_cast<int>(get<std::uint32_t>(is, path.string()));
  if ((d != 1 && d != 2) || J < 0 || J * d > 30) {
    throw IoError(path.string() + ": invalid header d=" + std::to_string(d) + " J=" + std::to_string(J));
  }
  std::vector<double> values(std::size_t{1} << (J * d));
  for (double& v : values) v = get<double>(is, path.string());
  if (is.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + ": trailing bytes");
  return values;
}

}  // namespace detail

inline void write_coeffs(const std::filesystem::path& path, const CoeffField& c) {
  detail::write_field(path, "BCF1", c.d, c.J, c.coeffs);
}

inline CoeffField read_coeffs(const std::filesystem::path& path) {
  CoeffField c;
  c.coeffs = detail::read_field(path, "BCF1", c.d, c.J);
  return c;
}

inline void write_grid(const std::filesystem::path& path, const GridField& g) {
  detail::write_field(path, "BGF1", g.d, g.grid_log2, g.values);
}

inline GridField read_grid(const std::filesystem::path& path) {
  GridField g;
  g.values = detail::read_field(path, "BGF1", g.d, g.grid_log2);
  return g;
}

/// Ordered key=value table used for sidecars, reports and config echoes.
class KeyValue {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = value;
        return;
      }
    }
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, long long value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }

  bool has(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return true;
    }
    return false;
  }
  const std::string& get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return v;
    }
    throw IoError("missing key: " + key);
  }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << str();
  }

  static KeyValue parse(std::istream& is, const std::string& origin) {
    KeyValue kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw IoError(origin + ":" + std::to_string(lineno) + ": expected key=value");
      }
      kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
  }

  static KeyValue read(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path.string());
    return parse(is, path.string());
  }

  /// Shortest representation that parses back to the same double.
  static std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
      std::snprintf(buf, sizeof buf, "%.*g", prec, v);
      if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace besov_invert::io
