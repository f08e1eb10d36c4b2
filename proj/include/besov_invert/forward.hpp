#pragma once

// Smoothing forward operator, measurement projection and white noise.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "besov_invert/errors.hpp"
#include "besov_invert/field.hpp"
#include "besov_invert/field_io.hpp"
#include "besov_invert/fourier.hpp"
#include "besov_invert/projection.hpp"
#include "besov_invert/rng.hpp"
#include "besov_invert/wavelet.hpp"

namespace besov_invert {

struct ForwardSetup {
  int d = 1;
  int grid_log2 = 9;
  double sigma = 0.05;               ///< width of the periodic Gaussian blur
  std::vector<double> multiplier;    ///< optional user table by FFT bin; overrides sigma
  BasisKind proj_kind = BasisKind::fourier;
  std::size_t k = 0;                 ///< 0 means the full grid
  double noise_scale = 1.0;
  int wavelet_order = 4;             ///< used by wavelet_trunc

  std::size_t grid_count() const { return grid_size(d, grid_log2); }
  std::size_t measured() const { return k == 0 ? grid_count() : k; }

  void validate() const {
    require_dimension(d);
    if (grid_log2 < 1 || grid_log2 * d > 24) throw ConfigError("grid_log2 out of range: " + std::to_string(grid_log2));
    if (multiplier.empty()) {
      if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0, got " + std::to_string(sigma));
    } else {
      if (multiplier.size() != grid_count()) {
        throw ShapeError("multiplier table has " + std::to_string(multiplier.size()) + " entries, grid has " +
                         std::to_string(grid_count()));
      }
      for (double m : multiplier) {
        if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError("multiplier values must be positive and finite");
      }
    }
    if (k > grid_count()) {
      throw IndexError("k = " + std::to_string(k) + " exceeds grid dimension " + std::to_string(grid_count()));
    }
    if (!(noise_scale >= 0.0)) throw ParameterError("noise_scale must be >= 0");
  }

  /// exp(-2 pi^2 sigma^2 |xi|^2), or the table entry of bin xi.
  double symbol(const Frequency& xi) const {
    if (!multiplier.empty()) {
      const std::size_t N = std::size_t{1} << grid_log2;
      auto wrap = [N](long f) { return static_cast<std::size_t>(f < 0 ? f + static_cast<long>(N) : f); };
      const std::size_t bin = d == 1 ? wrap(xi[0]) : wrap(xi[0]) * N + wrap(xi[1]);
      return multiplier[bin];
    }
    return std::exp(-2.0 * std::numbers::pi * std::numbers::pi * sigma * sigma * frequency_norm2(xi));
  }

  ProjectionFamily projection_family() const { return ProjectionFamily(proj_kind, d, grid_log2, wavelet_order); }
};

inline void require_grid(const GridField& u, const ForwardSetup& setup) {
  if (u.d != setup.d || u.grid_log2 != setup.grid_log2) {
    throw ShapeError("field shape (d=" + std::to_string(u.d) + ", grid_log2=" + std::to_string(u.grid_log2) +
                     ") does not match setup (d=" + std::to_string(setup.d) +
                     ", grid_log2=" + std::to_string(setup.grid_log2) + ")");
  }
}

inline GridField apply_forward(const GridField& u, const ForwardSetup& setup) {
  require_grid(u, setup);
  return apply_multiplier(u, [&setup](const Frequency& xi) { return setup.symbol(xi); });
}

inline GridField apply_forward(const CoeffField& c, const WaveletBasis& basis, const ForwardSetup& setup) {
  return apply_forward(idwt(c, basis), setup);
}

inline GridField apply_projection(const GridField& v, const ForwardSetup& setup, std::size_t k) {
  require_grid(v, setup);
  return setup.projection_family().project(v, k);
}

/// White noise on the grid: entries N(0, N^d) so that the quadrature pairing
/// <E, phi> has variance ||phi||^2_{L^2}.
inline GridField sample_white_noise(int grid_log2, int d, std::uint64_t seed, double scale = 1.0) {
  GridField e(d, grid_log2);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, scale * std::sqrt(static_cast<double>(e.size())));
  for (double& v : e.values) v = normal(rng);
  return e;
}

struct Measurement {
  enum class Kind { continuum_m, practical_mk, computational_mkn };
  Kind kind = Kind::practical_mk;
  GridField data;
  std::size_t k = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double noise_scale = 1.0;
  BasisKind proj_kind = BasisKind::fourier;
};

inline std::string to_string(Measurement::Kind k) {
  switch (k) {
    case Measurement::Kind::continuum_m: return "continuum_m";
    case Measurement::Kind::practical_mk: return "practical_mk";
    case Measurement::Kind::computational_mkn: return "computational_mkn";
  }
  return "unknown";
}

inline Measurement::Kind parse_measurement_kind(const std::string& s) {
  if (s == "continuum_m") return Measurement::Kind::continuum_m;
  if (s == "practical_mk") return Measurement::Kind::practical_mk;
  if (s == "computational_mkn") return Measurement::Kind::computational_mkn;
  throw ConfigError("unknown measurement kind '" + s + "'");
}

/// The three measurement variants, all built from one noise draw.
struct MeasurementSet {
  GridField noise;
  Measurement m;    ///< A u + eps
  Measurement mk;   ///< P_k (A u + eps)
  Measurement mkn;  ///< P_k A T_n u + P_k eps
};

inline MeasurementSet synthesize_all(const GridField& u_true, const ForwardSetup& setup, std::size_t k, std::size_t n,
                                     const ProjectionFamily& unknown, std::uint64_t seed) {
  setup.validate();
  require_grid(u_true, setup);
  if (k > setup.grid_count()) throw IndexError("k = " + std::to_string(k) + " exceeds grid dimension");
  if (n > unknown.dimension()) throw IndexError("n = " + std::to_string(n) + " exceeds coefficient count");
  const ProjectionFamily pk = setup.projection_family();

  MeasurementSet out;
  out.noise = sample_white_noise(setup.grid_log2, setup.d, seed, setup.noise_scale);
  const GridField au = apply_forward(u_true, setup);
  GridField m = au;
  for (std::size_t i = 0; i < m.size(); ++i) m.values[i] += out.noise.values[i];

  const GridField aun = apply_forward(unknown.project(u_true, n), setup);
  GridField mkn = pk.project(aun, k);
  const GridField pe = pk.project(out.noise, k);
  for (std::size_t i = 0; i < mkn.size(); ++i) mkn.values[i] += pe.values[i];

  auto make = [&](Measurement::Kind kind, GridField data) {
    Measurement r;
    r.kind = kind;
    r.data = std::move(data);
    r.k = k;
    r.n = n;
    r.seed = seed;
    r.sigma = setup.multiplier.empty() ? setup.sigma : 0.0;
    r.noise_scale = setup.noise_scale;
    r.proj_kind = setup.proj_kind;
    return r;
  };
  out.mk = make(Measurement::Kind::practical_mk, pk.project(m, k));
  out.m = make(Measurement::Kind::continuum_m, std::move(m));
  out.mkn = make(Measurement::Kind::computational_mkn, std::move(mkn));
  return out;
}

inline Measurement synthesize_measurement(const GridField& u_true, const ForwardSetup& setup, Measurement::Kind kind,
                                          std::size_t k, std::size_t n, const ProjectionFamily& unknown,
                                          std::uint64_t seed) {
  MeasurementSet all = synthesize_all(u_true, setup, k, n, unknown, seed);
  switch (kind) {
    case Measurement::Kind::continuum_m: return std::move(all.m);
    case Measurement::Kind::practical_mk: return std::move(all.mk);
    case Measurement::Kind::computational_mkn: return std::move(all.mkn);
  }
  return all.mk;
}

/// Wavelet-coefficient truth; T_n truncates the wavelet expansion.
inline Measurement synthesize_measurement(const CoeffField& u_true, const WaveletBasis& basis,
                                          const ForwardSetup& setup, Measurement::Kind kind, std::size_t k,
                                          std::size_t n, std::uint64_t seed) {
  const ProjectionFamily unknown(BasisKind::wavelet, basis.d, basis.Jmax, basis.order);
  return synthesize_measurement(idwt(u_true, basis), setup, kind, k, n, unknown, seed);
}

inline io::KeyValue measurement_sidecar(const Measurement& m) {
  io::KeyValue kv;
  kv.set("kind", to_string(m.kind));
  kv.set("d", m.data.d);
  kv.set("grid_log2", m.data.grid_log2);
  kv.set("k", static_cast<std::uint64_t>(m.k));
  kv.set("n", static_cast<std::uint64_t>(m.n));
  kv.set("seed", static_cast<std::uint64_t>(m.seed));
  kv.set("sigma", m.sigma);
  kv.set("noise_scale", m.noise_scale);
  kv.set("projection", to_string(m.proj_kind));
  return kv;
}

inline void write_measurement(const std::filesystem::path& grid_path, const Measurement& m) {
  io::write_grid(grid_path, m.data);
  measurement_sidecar(m).write(std::filesystem::path(grid_path.string() + ".meta"));
}

inline Measurement read_measurement(const std::filesystem::path& grid_path) {
  Measurement m;
  m.data = io::read_grid(grid_path);
  const auto kv = io::KeyValue::read(std::filesystem::path(grid_path.string() + ".meta"));
  m.kind = parse_measurement_kind(kv.get("kind"));
  m.k = std::stoull(kv.get("k"));
  m.n = std::stoull(kv.get("n"));
  m.seed = std::stoull(kv.get("seed"));
  m.sigma = std::stod(kv.get("sigma"));
  m.noise_scale = std::stod(kv.get("noise_scale"));
  m.proj_kind = parse_basis_kind(kv.get("projection"));
  return m;
}

}  // namespace besov_invert
