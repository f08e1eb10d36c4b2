#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "besov_invert/errors.hpp"

namespace besov_invert {

/// Number of points of a 2^J-per-axis grid in dimension d.
constexpr std::size_t grid_size(int d, int grid_log2) { return std::size_t{1} << (grid_log2 * d); }

inline void require_dimension(int d) {
  if (d != 1 && d != 2) {
    throw ConfigError("dimension must be 1 or 2, got " + std::to_string(d));
  }
}

/// Values of a function on the uniform grid {0, 1/N, ..., (N-1)/N}^d of the torus,
/// stored row-major (the last axis varies fastest).
struct GridField {
  int d = 1;
  int grid_log2 = 0;
  std::vector<double> values;

  GridField() = default;
  GridField(int dim, int log2) : d(dim), grid_log2(log2), values(std::size_t{1} << (log2 * dim), 0.0) {
    require_dimension(dim);
  }

  std::size_t side() const { return std::size_t{1} << grid_log2; }
  std::size_t size() const { return values.size(); }
  /// Quadrature weight of one grid point, 1/N^d.
  double cell_volume() const { return 1.0 / static_cast<double>(values.size()); }
};

/// A function on T^d through its wavelet coefficients c_1 .. c_{2^{Jd}}; `coeffs[ell - 1]` holds c_ell.
struct CoeffField {
  int d = 1;
  int J = 0;
  std::vector<double> coeffs;

  CoeffField() = default;
  CoeffField(int dim, int levels) : d(dim), J(levels), coeffs(std::size_t{1} << (levels * dim), 0.0) {
    require_dimension(dim);
  }

  std::size_t size() const { return coeffs.size(); }
  double operator()(std::size_t ell) const { return coeffs[ell - 1]; }
  double& operator()(std::size_t ell) { return coeffs[ell - 1]; }
};

/// L^2(T^d) inner product by grid quadrature.
inline double l2_inner(const GridField& a, const GridField& b) {
  if (a.values.size() != b.values.size()) {
    throw ShapeError("grid size mismatch: " + std::to_string(a.values.size()) + " vs " +
                     std::to_string(b.values.size()));
  }
  return std::inner_product(a.values.begin(), a.values.end(), b.values.begin(), 0.0) * a.cell_volume();
}

inline double l2_norm(const GridField& a) { return std::sqrt(l2_inner(a, a)); }

inline double euclidean_norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace besov_invert
