#pragma once

// Shared random problem instances for the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <random>

#include "besov_invert/besov_invert.hpp"

namespace testing_support {

namespace bi = besov_invert;

struct GaussianInstance {
  bi::PosteriorSpec spec;
  bi::GridField u_true;
};

/// Random Gaussian-prior posterior: blur width, alpha, n, k and projection drawn
/// from `seed`; unknown basis Fourier; data the practical measurement of a prior draw.
inline GaussianInstance random_gaussian_instance(int d, int grid_log2, std::size_t n_max, std::uint64_t seed) {
  bi::Rng rng = bi::make_rng(seed, 99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GaussianInstance inst;
  bi::PosteriorSpec& s = inst.spec;
  s.setup.d = d;
  s.setup.grid_log2 = grid_log2;
  s.setup.sigma = 0.02 + 0.06 * unif(rng);
  s.setup.noise_scale = 0.05;
  s.setup.proj_kind = unif(rng) < 0.5 ? bi::BasisKind::fourier : bi::BasisKind::wavelet;
  const std::size_t full = s.setup.grid_count();
  s.n = 8 + static_cast<std::size_t>(unif(rng) * static_cast<double>(n_max - 8));
  s.k = s.n + static_cast<std::size_t>(unif(rng) * static_cast<double>(full - s.n));
  s.setup.k = s.k;
  s.alpha = std::pow(10.0, -3.0 + 3.0 * unif(rng));
  s.prior.kind = bi::PriorSpec::Kind::gaussian;
  s.unknown_basis = bi::BasisKind::fourier;

  bi::PriorSpec g;
  g.kind = bi::PriorSpec::Kind::gaussian;
  g.d = d;
  g.seed = bi::split_seed(seed, 1);
  inst.u_true = bi::sample_gaussian_prior(g, grid_log2);
  const bi::ProjectionFamily unknown(s.unknown_basis, d, grid_log2);
  s.data = bi::synthesize_all(inst.u_true, s.setup, s.k, s.n, unknown, bi::split_seed(seed, 2)).mk;
  return inst;
}

/// Small Besov posterior for sampler/quadrature comparisons: d = 1, 16-point
/// grid, DB2 unknown basis, k = 8 Fourier modes.
inline bi::PosteriorSpec small_besov_spec(std::size_t n, double p, std::uint64_t seed, double noise_scale = 0.5) {
  bi::PosteriorSpec s;
  s.setup.d = 1;
  s.setup.grid_log2 = 4;
  s.setup.sigma = 0.03;
  s.setup.noise_scale = noise_scale;
  s.setup.wavelet_order = 2;
  s.setup.k = 8;
  s.k = 8;
  s.n = n;
  s.alpha = 1.0;
  s.prior.kind = bi::PriorSpec::Kind::besov;
  s.prior.s = 1.0;
  s.prior.p = p;
  s.unknown_basis = bi::BasisKind::wavelet;
  const bi::ProjectionFamily unknown(bi::BasisKind::wavelet, 1, 4, 2);
  const bi::GridField u = bi::power_law_truth(unknown, 1.0);
  s.data = bi::synthesize_all(u, s.setup, s.k, n, unknown, seed).mk;
  return s;
}

/// Random-walk step matched to the target's coordinate precision.
inline double mh_step(const bi::Target& t) {
  double prec = 0.0;
  for (Eigen::Index i = 0; i < t.dim(); ++i) {
    const double pen = t.lambda.size() ? t.lambda(i) * (t.p == 2.0 ? 2.0 : 1.0) : 0.0;
    prec = std::max(prec, t.Q(i, i) + pen);
  }
  return 2.4 / std::sqrt(static_cast<double>(t.dim()) * prec);
}

}  // namespace testing_support
