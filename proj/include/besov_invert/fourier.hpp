#pragma once

// Discrete Fourier analysis on the uniform torus grid.
//
// Fourier coefficients are L^2-normalized: uhat(xi) = N^{-d} sum_x u(x) e^{-2 pi i xi.x},
// with integer frequencies xi_i in [-N/2, N/2). A multiplier m acts as
// (m u)^(xi) = m(xi) uhat(xi).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "besov_invert/errors.hpp"
#include "besov_invert/field.hpp"

namespace besov_invert {

using Frequency = std::array<long, 2>;
using Spectrum = std::vector<std::complex<double>>;

/// Signed integer frequency of FFT bin i on an N-point axis.
constexpr long signed_frequency(std::size_t i, std::size_t N) {
  return i < N / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(N);
}

inline Frequency frequency_of(std::size_t flat, int d, std::size_t N) {
  if (d == 1) return {signed_frequency(flat, N), 0};
  return {signed_frequency(flat / N, N), signed_frequency(flat % N, N)};
}

inline double frequency_norm2(const Frequency& xi) {
  return static_cast<double>(xi[0] * xi[0] + xi[1] * xi[1]);
}

namespace detail {

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine = [] {
    Eigen::FFT<double> e;
    e.SetFlag(Eigen::FFT<double>::Unscaled);
    return e;
  }();
  return engine;
}

// Unnormalized in-place transform of a d-dimensional row-major array.
inline void transform(Spectrum& data, int d, std::size_t N, bool inverse) {
  auto& fft = fft_engine();
  std::vector<std::complex<double>> line(N), out(N);
  auto run = [&](std::size_t offset, std::size_t stride) {
    for (std::size_t i = 0; i < N; ++i) line[i] = data[offset + i * stride];
    if (inverse) {
      fft.inv(out, line);
    } else {
      fft.fwd(out, line);
    }
    for (std::size_t i = 0; i < N; ++i) data[offset + i * stride] = out[i];
  };
  if (d == 1) {
    run(0, 1);
    return;
  }
  for (std::size_t r = 0; r < N; ++r) run(r * N, 1);
  for (std::size_t c = 0; c < N; ++c) run(c, N);
}

}  // namespace detail

inline Spectrum fourier_coefficients(const GridField& u) {
  Spectrum s(u.values.begin(), u.values.end());
  detail::transform(s, u.d, u.side(), false);
  const double scale = u.cell_volume();
  for (auto& c : s) c *= scale;
  return s;
}

/// Inverse of fourier_coefficients; the imaginary part is dropped.
inline GridField from_fourier(Spectrum s, int d, int grid_log2) {
  GridField u(d, grid_log2);
  if (s.size() != u.size()) throw ShapeError("spectrum size mismatch");
  detail::transform(s, d, u.side(), true);
  for (std::size_t i = 0; i < s.size(); ++i) u.values[i] = s[i].real();
  return u;
}

/// Applies the real Fourier multiplier `m(xi)` to a grid function.
inline GridField apply_multiplier(const GridField& u, const std::function<double(const Frequency&)>& m) {
  Spectrum s = fourier_coefficients(u);
  const std::size_t N = u.side();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= m(frequency_of(i, u.d, N));
  return from_fourier(std::move(s), u.d, u.grid_log2);
}

/// Symbol of (I - Delta)^power on T^d: (1 + |2 pi xi|^2)^power.
inline double bessel_symbol(const Frequency& xi, double power) {
  const double two_pi = 2.0 * std::numbers::pi;
  return std::pow(1.0 + two_pi * two_pi * frequency_norm2(xi), power);
}

/// The real orthonormal Fourier basis of the grid, ordered by |xi|^2 ascending
/// with ties broken lexicographically on the signed frequency vector.
///
/// Each conjugate pair {xi, -xi} contributes sqrt(2) cos(2 pi xi.x) at the
/// position of its lexicographically smaller member and sqrt(2) sin(2 pi eta.x)
/// at the larger member eta. Self-conjugate frequencies (xi = -xi mod N)
/// contribute cos(2 pi xi.x) alone.
class FourierOrdering {
 public:
  enum class Role { self_conjugate, cosine, sine };

  FourierOrdering(int d, int grid_log2) : d_(d), log2_(grid_log2), N_(std::size_t{1} << grid_log2) {
    require_dimension(d);
    const std::size_t total = grid_size(d, grid_log2);
    order_.resize(total);
    for (std::size_t i = 0; i < total; ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const Frequency fa = frequency_of(a, d_, N_), fb = frequency_of(b, d_, N_);
      const double na = frequency_norm2(fa), nb = frequency_norm2(fb);
      if (na != nb) return na < nb;
      return fa < fb;
    });
    rank_.resize(total);
    for (std::size_t r = 0; r < total; ++r) rank_[order_[r]] = r;
    partner_.resize(total);
    role_.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
      partner_[i] = conjugate_index(i);
      if (partner_[i] == i) {
        role_[i] = Role::self_conjugate;
      } else {
        role_[i] = rank_[i] < rank_[partner_[i]] ? Role::cosine : Role::sine;
      }
    }
  }

  int d() const { return d_; }
  int grid_log2() const { return log2_; }
  std::size_t size() const { return order_.size(); }
  /// FFT bin of the r-th basis function (0-based rank).
  std::size_t bin(std::size_t r) const { return order_.at(r); }
  std::size_t rank(std::size_t bin) const { return rank_.at(bin); }
  std::size_t partner(std::size_t bin) const { return partner_.at(bin); }
  Role role(std::size_t bin) const { return role_.at(bin); }
  Frequency frequency(std::size_t r) const { return frequency_of(bin(r), d_, N_); }

  /// Grid samples of the r-th real basis function.
  GridField basis_function(std::size_t r) const {
    const std::size_t b = bin(r);
    const Role ro = role(b);
    // sine entries are labelled by the larger member; sin(2 pi eta.x)
    const Frequency xi = frequency_of(b, d_, N_);
    GridField g(d_, log2_);
    const double two_pi = 2.0 * std::numbers::pi;
    const double amp = ro == Role::self_conjugate ? 1.0 : std::numbers::sqrt2;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double phase = 0.0;
      if (d_ == 1) {
        phase = two_pi * static_cast<double>(xi[0]) * static_cast<double>(i) / static_cast<double>(N_);
      } else {
        const double x1 = static_cast<double>(i / N_) / static_cast<double>(N_);
        const double x2 = static_cast<double>(i % N_) / static_cast<double>(N_);
        phase = two_pi * (static_cast<double>(xi[0]) * x1 + static_cast<double>(xi[1]) * x2);
      }
      g.values[i] = amp * (ro == Role::sine ? std::sin(phase) : std::cos(phase));
    }
    return g;
  }

  /// Orthogonal projection onto the span of the first k basis functions.
  GridField project(const GridField& u, std::size_t k) const {
    if (u.d != d_ || u.grid_log2 != log2_) throw ShapeError("projection grid mismatch");
    if (k > size()) {
      throw IndexError("projection size " + std::to_string(k) + " exceeds grid dimension " + std::to_string(size()));
    }
    if (k == size()) return u;
    Spectrum s = fourier_coefficients(u);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool kept = rank_[i] < k;
      const bool partner_kept = rank_[partner_[i]] < k;
      if (kept && partner_kept) continue;
      if (!kept && !partner_kept) {
        s[i] = 0.0;
        continue;
      }
      // exactly one member kept: it is the cosine one (it comes first)
      s[i] = std::complex<double>(s[i].real(), 0.0);
    }
    return from_fourier(std::move(s), d_, log2_);
  }

 private:
  std::size_t conjugate_index(std::size_t i) const {
    auto neg = [&](std::size_t a) { return (N_ - a) % N_; };
    if (d_ == 1) return neg(i);
    return neg(i / N_) * N_ + neg(i % N_);
  }

  int d_;
  int log2_;
  std::size_t N_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rank_;
  std::vector<std::size_t> partner_;
  std::vector<Role> role_;
};

}  // namespace besov_invert
