#pragma once

// Periodized orthonormal wavelet bases on T^1 and T^2.
//
// Coefficients are numbered by one positive integer ell:
//   ell = 1                        scaling function phi(x_1)...phi(x_d)
//   ell = 2^{jd} + 1 .. 2^{(j+1)d}  wavelets of scale j >= 0
// Within scale j the orientation nu in {1, .., 2^d - 1} varies slowest (nu read
// as a binary number with nu_1 the most significant bit), then the translation
// k in row-major order (k_d fastest). So
//   ell = 2^{jd} + (nu - 1) 2^{jd} + rowmajor(k) + 1.
//
// dwt/idwt are isometries between grid functions with the L^2(T^d) quadrature
// inner product and coefficient vectors with the Euclidean one: idwt(e_ell) is
// the grid sampling of psi_ell, and idwt(e_1) is the constant 1.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "besov_invert/daubechies.hpp"
#include "besov_invert/errors.hpp"
#include "besov_invert/field.hpp"

namespace besov_invert {

struct WaveletBasis {
  int d = 1;
  int order = 4;  ///< vanishing moments; filters have 2*order taps
  int Jmax = 0;   ///< grid has 2^Jmax points per axis
  std::vector<double> lowpass;
  std::vector<double> highpass;

  std::size_t side() const { return std::size_t{1} << Jmax; }
  std::size_t size() const { return std::size_t{1} << (Jmax * d); }
};

inline WaveletBasis build_basis(int d, int order, int grid_log2) {
  require_dimension(d);
  auto taps = filters::daubechies(order);
  if (taps.empty()) {
    throw ConfigError("wavelet order must be in [" + std::to_string(filters::kMinOrder) + ", " +
                      std::to_string(filters::kMaxOrder) + "], got " + std::to_string(order));
  }
  if (grid_log2 < 0 || grid_log2 > 24 / d) {
    throw ConfigError("grid_log2 out of range: " + std::to_string(grid_log2));
  }
  const std::size_t points = std::size_t{1} << grid_log2;
  if (points < taps.size()) {
    throw ConfigError("grid of " + std::to_string(points) + " points per axis is smaller than filter length " +
                      std::to_string(taps.size()));
  }
  WaveletBasis basis;
  basis.d = d;
  basis.order = order;
  basis.Jmax = grid_log2;
  basis.lowpass.assign(taps.begin(), taps.end());
  const std::size_t L = taps.size();
  basis.highpass.resize(L);
  for (std::size_t t = 0; t < L; ++t) {
    basis.highpass[t] = ((t % 2 == 0) ? 1.0 : -1.0) * taps[L - 1 - t];
  }
  return basis;
}

// ---------------------------------------------------------------------------
// Index numbering

struct WaveletIndex {
  int j = 0;                  ///< scale; 0 for the scaling function
  int nu = 0;                 ///< orientation 1 .. 2^d - 1; 0 marks the scaling function
  std::array<long, 2> k{};    ///< translation, 0 <= k_i < 2^j

  bool is_scaling() const { return nu == 0; }
  friend bool operator==(const WaveletIndex&, const WaveletIndex&) = default;
};

inline std::size_t encode_index(const WaveletIndex& w, int d) {
  require_dimension(d);
  if (w.nu == 0) {
    if (w.j != 0 || w.k[0] != 0 || w.k[1] != 0) throw IndexError("scaling function has j = 0 and k = 0");
    return 1;
  }
  const int orientations = (1 << d) - 1;
  if (w.j < 0 || w.j > 30 / d) throw IndexError("scale out of range: " + std::to_string(w.j));
  if (w.nu < 1 || w.nu > orientations) throw IndexError("orientation out of range: " + std::to_string(w.nu));
  const long side = 1L << w.j;
  std::size_t flat = 0;
  for (int i = 0; i < d; ++i) {
    if (w.k[i] < 0 || w.k[i] >= side) {
      throw IndexError("translation k_" + std::to_string(i + 1) + " = " + std::to_string(w.k[i]) +
                       " outside [0, " + std::to_string(side - 1) + "]");
    }
    flat = flat * static_cast<std::size_t>(side) + static_cast<std::size_t>(w.k[i]);
  }
  const std::size_t block = std::size_t{1} << (w.j * d);
  return block + static_cast<std::size_t>(w.nu - 1) * block + flat + 1;
}

inline WaveletIndex decode_index(std::size_t ell, int d) {
  require_dimension(d);
  if (ell == 0) throw IndexError("wavelet index ell must be >= 1");
  WaveletIndex w;
  if (ell == 1) return w;
  int j = 0;
  while ((std::size_t{1} << ((j + 1) * d)) < ell) ++j;
  const std::size_t block = std::size_t{1} << (j * d);
  const std::size_t r = ell - block - 1;
  w.j = j;
  w.nu = static_cast<int>(r / block) + 1;
  std::size_t flat = r % block;
  const std::size_t side = std::size_t{1} << j;
  for (int i = d - 1; i >= 0; --i) {
    w.k[i] = static_cast<long>(flat % side);
    flat /= side;
  }
  return w;
}

/// Scale of coefficient ell (0 for both ell = 1 and the j = 0 wavelets).
inline int scale_of(std::size_t ell, int d) { return decode_index(ell, d).j; }

// ---------------------------------------------------------------------------
// Fast transforms

namespace detail {

// out[k] = sum_t taps[t] in[(2k + t) mod M], read with stride.
inline void filter_down(const double* in, std::size_t in_stride, std::size_t M, const std::vector<double>& taps,
                        double* out, std::size_t out_stride) {
  const std::size_t half = M / 2;
  for (std::size_t k = 0; k < half; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t < taps.size(); ++t) {
      acc += taps[t] * in[((2 * k + t) % M) * in_stride];
    }
    out[k * out_stride] = acc;
  }
}

// Transpose of filter_down: out[(2k + t) mod M] += taps[t] in[k].
inline void filter_up_add(const double* in, std::size_t in_stride, std::size_t M, const std::vector<double>& taps,
                          double* out, std::size_t out_stride) {
  const std::size_t half = M / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const double v = in[k * in_stride];
    for (std::size_t t = 0; t < taps.size(); ++t) {
      out[((2 * k + t) % M) * out_stride] += taps[t] * v;
    }
  }
}

inline const std::vector<double>& taps_for(const WaveletBasis& b, int nu_bit) {
  return nu_bit ? b.highpass : b.lowpass;
}

}  // namespace detail

/// Grid samples -> wavelet coefficients, c_ell = <f, psi_ell> by grid quadrature.
inline CoeffField dwt(const GridField& samples, const WaveletBasis& basis) {
  if (samples.d != basis.d || samples.size() != basis.size()) {
    throw ShapeError("dwt expects " + std::to_string(basis.size()) + " samples in dimension " +
                     std::to_string(basis.d) + ", got " + std::to_string(samples.size()));
  }
  const int d = basis.d;
  CoeffField out(d, basis.Jmax);
  const double scale = 1.0 / std::sqrt(static_cast<double>(samples.size()));
  std::vector<double> approx(samples.values);
  for (double& v : approx) v *= scale;

  for (std::size_t M = basis.side(); M >= 2; M /= 2) {
    const std::size_t h = M / 2;
    const int j = static_cast<int>(std::log2(static_cast<double>(h)) + 0.5);
    const std::size_t block = std::size_t{1} << (j * d);
    if (d == 1) {
      std::vector<double> lo(h);
      detail::filter_down(approx.data(), 1, M, basis.lowpass, lo.data(), 1);
      detail::filter_down(approx.data(), 1, M, basis.highpass, out.coeffs.data() + block, 1);
      approx.swap(lo);
    } else {
      // rows first (axis 2), giving M x h arrays for each filter
      std::array<std::vector<double>, 2> rows{std::vector<double>(M * h), std::vector<double>(M * h)};
      for (int b2 = 0; b2 < 2; ++b2) {
        for (std::size_t i1 = 0; i1 < M; ++i1) {
          detail::filter_down(approx.data() + i1 * M, 1, M, detail::taps_for(basis, b2), rows[b2].data() + i1 * h, 1);
        }
      }
      std::vector<double> next(h * h);
      for (int b1 = 0; b1 < 2; ++b1) {
        for (int b2 = 0; b2 < 2; ++b2) {
          const int nu = b1 * 2 + b2;
          double* dst = nu == 0 ? next.data() : out.coeffs.data() + block + static_cast<std::size_t>(nu - 1) * block;
          for (std::size_t i2 = 0; i2 < h; ++i2) {
            detail::filter_down(rows[b2].data() + i2, h, M, detail::taps_for(basis, b1), dst + i2, h);
          }
        }
      }
      approx.swap(next);
    }
  }
  out.coeffs[0] = approx[0];
  return out;
}

/// Wavelet coefficients -> grid samples of sum_ell c_ell psi_ell.
inline GridField idwt(const CoeffField& coeffs, const WaveletBasis& basis) {
  if (coeffs.d != basis.d || coeffs.size() != basis.size()) {
    throw ShapeError("idwt expects " + std::to_string(basis.size()) + " coefficients in dimension " +
                     std::to_string(basis.d) + ", got " + std::to_string(coeffs.size()));
  }
  const int d = basis.d;
  std::vector<double> approx{coeffs.coeffs[0]};
  for (std::size_t M = 2; M <= basis.side(); M *= 2) {
    const std::size_t h = M / 2;
    const int j = static_cast<int>(std::log2(static_cast<double>(h)) + 0.5);
    const std::size_t block = std::size_t{1} << (j * d);
    std::vector<double> next(d == 1 ? M : M * M, 0.0);
    if (d == 1) {
      detail::filter_up_add(approx.data(), 1, M, basis.lowpass, next.data(), 1);
      detail::filter_up_add(coeffs.coeffs.data() + block, 1, M, basis.highpass, next.data(), 1);
    } else {
      std::array<std::vector<double>, 2> rows{std::vector<double>(M * h, 0.0), std::vector<double>(M * h, 0.0)};
      for (int b1 = 0; b1 < 2; ++b1) {
        for (int b2 = 0; b2 < 2; ++b2) {
          const int nu = b1 * 2 + b2;
          const double* src =
              nu == 0 ? approx.data() : coeffs.coeffs.data() + block + static_cast<std::size_t>(nu - 1) * block;
          for (std::size_t i2 = 0; i2 < h; ++i2) {
            detail::filter_up_add(src + i2, h, M, detail::taps_for(basis, b1), rows[b2].data() + i2, h);
          }
        }
      }
      for (int b2 = 0; b2 < 2; ++b2) {
        for (std::size_t i1 = 0; i1 < M; ++i1) {
          detail::filter_up_add(rows[b2].data() + i1 * h, 1, M, detail::taps_for(basis, b2), next.data() + i1 * M, 1);
        }
      }
    }
    approx.swap(next);
  }
  GridField out(d, basis.Jmax);
  const double scale = std::sqrt(static_cast<double>(out.size()));
  for (std::size_t i = 0; i < approx.size(); ++i) out.values[i] = approx[i] * scale;
  return out;
}

/// T_n: keeps c_1 .. c_n and zeroes the rest.
inline CoeffField truncate(const CoeffField& c, std::size_t n) {
  if (n > c.size()) {
    throw IndexError("truncation count " + std::to_string(n) + " exceeds coefficient count " +
                     std::to_string(c.size()));
  }
  CoeffField out = c;
  std::fill(out.coeffs.begin() + static_cast<std::ptrdiff_t>(n), out.coeffs.end(), 0.0);
  return out;
}

/// Grid samples of the basis function psi_ell.
inline GridField basis_function(std::size_t ell, const WaveletBasis& basis) {
  if (ell == 0 || ell > basis.size()) throw IndexError("basis index out of range: " + std::to_string(ell));
  CoeffField e(basis.d, basis.Jmax);
  e(ell) = 1.0;
  return idwt(e, basis);
}

}  // namespace besov_invert
