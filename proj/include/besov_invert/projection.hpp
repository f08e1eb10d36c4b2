#pragma once

// Nested families of orthogonal projections on grid functions, used both for
// the measurement projection P_k and the unknown truncation T_n.

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "besov_invert/errors.hpp"
#include "besov_invert/field.hpp"
#include "besov_invert/fourier.hpp"
#include "besov_invert/wavelet.hpp"

namespace besov_invert {

enum class BasisKind { fourier, wavelet };

inline std::string to_string(BasisKind k) { return k == BasisKind::fourier ? "fourier" : "wavelet"; }

inline BasisKind parse_basis_kind(const std::string& s) {
  if (s == "fourier" || s == "fourier_trunc") return BasisKind::fourier;
  if (s == "wavelet" || s == "wavelet_trunc") return BasisKind::wavelet;
  throw ConfigError("unknown basis kind '" + s + "' (expected fourier or wavelet)");
}

/// An ordered orthonormal basis phi_1, phi_2, ... of grid functions. The first
/// r elements span the range of the r-th projection.
class ProjectionFamily {
 public:
  ProjectionFamily(BasisKind kind, int d, int grid_log2, int wavelet_order = 4)
      : kind_(kind), d_(d), log2_(grid_log2) {
    require_dimension(d);
    if (kind == BasisKind::fourier) {
      fourier_.emplace(d, grid_log2);
    } else {
      wavelet_ = build_basis(d, wavelet_order, grid_log2);
    }
  }

  BasisKind kind() const { return kind_; }
  int d() const { return d_; }
  int grid_log2() const { return log2_; }
  std::size_t dimension() const { return grid_size(d_, log2_); }
  const FourierOrdering* fourier() const { return fourier_ ? &*fourier_ : nullptr; }
  const WaveletBasis* wavelet() const { return wavelet_ ? &*wavelet_ : nullptr; }

  GridField project(const GridField& u, std::size_t count) const {
    check(u);
    check_count(count);
    if (fourier_) return fourier_->project(u, count);
    return idwt(truncate(dwt(u, *wavelet_), count), *wavelet_);
  }

  /// <u, phi_r> for r = 1 .. count.
  std::vector<double> coefficients(const GridField& u, std::size_t count) const {
    check(u);
    check_count(count);
    std::vector<double> c(count);
    if (wavelet_) {
      const CoeffField w = dwt(u, *wavelet_);
      std::copy_n(w.coeffs.begin(), count, c.begin());
      return c;
    }
    const Spectrum s = fourier_coefficients(u);
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t b = fourier_->bin(r);
      switch (fourier_->role(b)) {
        case FourierOrdering::Role::self_conjugate: c[r] = s[b].real(); break;
        case FourierOrdering::Role::cosine: c[r] = std::numbers::sqrt2 * s[b].real(); break;
        case FourierOrdering::Role::sine: c[r] = -std::numbers::sqrt2 * s[b].imag(); break;
      }
    }
    return c;
  }

  /// sum_r c_r phi_r.
  GridField synthesize(std::span<const double> c) const {
    check_count(c.size());
    if (wavelet_) {
      CoeffField w(d_, log2_);
      std::copy(c.begin(), c.end(), w.coeffs.begin());
      return idwt(w, *wavelet_);
    }
    Spectrum s(dimension(), 0.0);
    const double h = std::numbers::sqrt2 / 2.0;
    for (std::size_t r = 0; r < c.size(); ++r) {
      const std::size_t b = fourier_->bin(r);
      const std::size_t q = fourier_->partner(b);
      switch (fourier_->role(b)) {
        case FourierOrdering::Role::self_conjugate: s[b] += c[r]; break;
        case FourierOrdering::Role::cosine:
          s[b] += h * c[r];
          s[q] += h * c[r];
          break;
        case FourierOrdering::Role::sine:
          s[b] += std::complex<double>(0.0, -h * c[r]);
          s[q] += std::complex<double>(0.0, h * c[r]);
          break;
      }
    }
    return from_fourier(std::move(s), d_, log2_);
  }

  GridField basis_function(std::size_t r) const {
    std::vector<double> e(r + 1, 0.0);
    e[r] = 1.0;
    return synthesize(e);
  }

 private:
  void check(const GridField& u) const {
    if (u.d != d_ || u.grid_log2 != log2_) {
      throw ShapeError("field on a " + std::to_string(u.side()) + "-point grid in dimension " + std::to_string(u.d) +
                       " does not match the projection grid");
    }
  }
  void check_count(std::size_t count) const {
    if (count > dimension()) {
      throw IndexError("projection size " + std::to_string(count) + " exceeds grid dimension " +
                       std::to_string(dimension()));
    }
  }

  BasisKind kind_;
  int d_;
  int log2_;
  std::optional<FourierOrdering> fourier_;
  std::optional<WaveletBasis> wavelet_;
};

}  // namespace besov_invert
