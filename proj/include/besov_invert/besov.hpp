#pragma once

// Besov norms in single-index form and the Besov / Gaussian smoothness priors.
//
//   ||c||_{B^s_pp} = (sum_ell ell^{ps/d + p/2 - 1} |c_ell|^p)^{1/p},  p < inf
//   ||c||_{B^s_inf} = sup_ell ell^{s/d + 1/2} |c_ell|
//
// A B^s_pp prior draws c_ell = alpha^{-1/p} ell^{-(s/d + 1/2 - 1/p)} X_ell with X_ell
// i.i.d. of density c_p exp(-|x|^p), so that its formal density is proportional
// to exp(-alpha ||c||^p).

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "besov_invert/errors.hpp"
#include "besov_invert/field.hpp"
#include "besov_invert/fourier.hpp"
#include "besov_invert/rng.hpp"
#include "besov_invert/stats.hpp"
#include "besov_invert/wavelet.hpp"

namespace besov_invert {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct BesovParams {
  double s = 1.0;
  double p = 1.0;  ///< kInfinity selects the sup norm
  int d = 1;

  void validate() const {
    if (!(p >= 1.0)) throw ParameterError("p must satisfy p >= 1, got " + std::to_string(p));
    if (!std::isfinite(s)) throw ParameterError("s must be finite");
    require_dimension(d);
  }
  /// Exponent of ell in the p-th power of the norm.
  double weight_exponent() const { return p * s / d + p / 2.0 - 1.0; }
  /// Decay exponent of prior coefficients: -(s/d + 1/2 - 1/p).
  double decay_exponent() const { return -(s / d + 0.5 - 1.0 / p); }
};

inline double besov_norm(std::span<const double> c, const BesovParams& bp) {
  bp.validate();
  if (!all_finite(c)) throw NumericalError("besov_norm of non-finite coefficients");
  if (std::isinf(bp.p)) {
    double sup = 0.0;
    const double e = bp.s / bp.d + 0.5;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] != 0.0) sup = std::max(sup, std::pow(static_cast<double>(i + 1), e) * std::abs(c[i]));
    }
    return sup;
  }
  const double w = bp.weight_exponent();
  // scale by the largest weighted entry to keep pow() in range
  double big = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] != 0.0) big = std::max(big, std::pow(static_cast<double>(i + 1), w / bp.p) * std::abs(c[i]));
  }
  if (big == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    acc += std::pow(std::pow(static_cast<double>(i + 1), w / bp.p) * std::abs(c[i]) / big, bp.p);
  }
  return big * std::pow(acc, 1.0 / bp.p);
}

inline double besov_norm(const CoeffField& c, const BesovParams& bp) { return besov_norm(c.coeffs, bp); }

/// B^{s1}_{p1 p1} embeds in B^{s2}_{p2 p2} iff s1 - d/p1 >= s2 - d/p2.
inline bool embedding_check(const BesovParams& a, const BesovParams& b) {
  a.validate();
  b.validate();
  if (a.d != b.d) throw ParameterError("embedding_check needs a common dimension");
  return a.s - a.d / a.p >= b.s - b.d / b.p;
}

// ---------------------------------------------------------------------------
// The coefficient law c_p exp(-|x|^p)

inline void require_finite_p(double p) {
  if (!(p >= 1.0) || std::isinf(p)) {
    throw ParameterError("p must satisfy 1 <= p < inf, got " + std::to_string(p));
  }
}

inline double coeff_normalization(double p) {
  require_finite_p(p);
  return p / (2.0 * std::tgamma(1.0 / p));
}

inline double coeff_density(double p, double x) { return coeff_normalization(p) * std::exp(-std::pow(std::abs(x), p)); }

inline double coeff_cdf(double p, double x) {
  require_finite_p(p);
  const double half = 0.5 * boost::math::gamma_p(1.0 / p, std::pow(std::abs(x), p));
  return x >= 0.0 ? 0.5 + half : 0.5 - half;
}

/// E|X|^p = Gamma(1 + 1/p) / Gamma(1/p) = 1/p.
inline double coeff_abs_moment_p(double p) {
  require_finite_p(p);
  return 1.0 / p;
}

template <class Engine>
double sample_coeff(double p, Engine& rng) {
  require_finite_p(p);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (p == 1.0) {
    const double e = std::exponential_distribution<double>(1.0)(rng);
    return unif(rng) < 0.5 ? -e : e;
  }
  if (p == 2.0) return std::normal_distribution<double>(0.0, std::sqrt(0.5))(rng);
  // Laplace envelope: exp(-|x|^p) <= M exp(-|x|) with log M = max_t (t - t^p)
  const double tstar = std::pow(1.0 / p, 1.0 / (p - 1.0));
  const double logM = tstar - std::pow(tstar, p);
  std::exponential_distribution<double> expo(1.0);
  for (;;) {
    const double t = expo(rng);
    const double log_accept = -std::pow(t, p) + t - logM;
    if (std::log(unif(rng)) <= log_accept) return unif(rng) < 0.5 ? -t : t;
  }
}

/// E exp(k |X|^p) = (1 - k)^{-1/p} for 0 < k < 1.
inline double moment_identity(double p, double k) {
  require_finite_p(p);
  if (!(k > 0.0 && k < 1.0)) {
    throw ParameterError("moment_identity needs k in (0, 1), got " + std::to_string(k) +
                         "; the expectation is infinite for k >= 1");
  }
  return std::pow(1.0 - k, -1.0 / p);
}

// ---------------------------------------------------------------------------
// Priors

struct PriorSpec {
  enum class Kind { besov, gaussian };
  Kind kind = Kind::besov;
  int d = 1;
  int J = 0;              ///< coefficients ell <= 2^{Jd} are drawn
  std::uint64_t seed = 0;
  double s = 1.0;
  double p = 1.0;
  double alpha = 1.0;
  int order = 2;          ///< Gaussian covariance alpha^{-1} (I - Delta)^{-order} on H^{-1}

  BesovParams besov() const { return {s, p, d}; }
  double decay_exponent() const { return besov().decay_exponent(); }

  void validate() const {
    require_dimension(d);
    if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0, got " + std::to_string(alpha));
    if (kind == Kind::besov) {
      besov().validate();
      require_finite_p(p);
    } else if (order != 2) {
      throw ParameterError("gaussian prior order is fixed to 2");
    }
  }
};

/// Variance of the L^2 Fourier coefficient at xi of a Gaussian smoothness prior
/// sample. Its covariance as an operator on H^{-1} is alpha^{-1} (I - Delta)^{-2},
/// which on L^2 coefficients is alpha^{-1} (1 + |2 pi xi|^2)^{-1}.
inline double gaussian_prior_l2_variance(const Frequency& xi, double alpha) {
  return bessel_symbol(xi, -1.0) / alpha;
}

/// Same variance measured against the H^{-1}-normalized mode (1 + |2 pi xi|^2)^{1/2} e_xi.
inline double gaussian_prior_hminus1_variance(const Frequency& xi, double alpha) {
  return bessel_symbol(xi, -2.0) / alpha;
}

inline CoeffField sample_besov_prior(const PriorSpec& spec, const WaveletBasis& basis) {
  spec.validate();
  if (spec.kind != PriorSpec::Kind::besov) throw ParameterError("sample_besov_prior needs a besov prior");
  if (spec.d != basis.d) throw ShapeError("prior and basis dimensions differ");
  if (spec.J > basis.Jmax) {
    throw ParameterError("prior scale J = " + std::to_string(spec.J) + " exceeds basis Jmax = " +
                         std::to_string(basis.Jmax));
  }
  CoeffField c(basis.d, basis.Jmax);
  const std::size_t count = grid_size(spec.d, spec.J);
  const double e = spec.decay_exponent();
  const double scale = std::pow(spec.alpha, -1.0 / spec.p);
  Rng rng = make_rng(spec.seed);
  for (std::size_t ell = 1; ell <= count; ++ell) {
    c(ell) = scale * std::pow(static_cast<double>(ell), e) * sample_coeff(spec.p, rng);
  }
  return c;
}

/// Draws a Gaussian smoothness prior sample on the grid by Fourier filtering of white noise.
inline GridField sample_gaussian_prior(const PriorSpec& spec, int grid_log2) {
  spec.validate();
  if (spec.kind != PriorSpec::Kind::gaussian) throw ParameterError("sample_gaussian_prior needs a gaussian prior");
  GridField w(spec.d, grid_log2);
  Rng rng = make_rng(spec.seed);
  // entries N(0, N^d) make every Fourier coefficient unit variance
  std::normal_distribution<double> normal(0.0, std::sqrt(static_cast<double>(w.size())));
  for (double& v : w.values) v = normal(rng);
  const double alpha = spec.alpha;
  return apply_multiplier(w, [alpha](const Frequency& xi) { return std::sqrt(gaussian_prior_l2_variance(xi, alpha)); });
}

// ---------------------------------------------------------------------------
// Finiteness threshold of ||U||_{B^t_pp}

struct ThresholdReport {
  double s = 0.0, p = 1.0, t = 0.0;
  int d = 1;
  double threshold = 0.0;          ///< s - d/p
  double predicted_exponent = 0.0; ///< (t - s) p / d
  double fitted_slope = 0.0;       ///< of the mean increment vs ell, log-log
  bool convergent = false;
  bool marginal = false;           ///< |slope + 1| <= 0.15
  std::vector<std::size_t> checkpoints;
  std::vector<double> partial_sums;  ///< mean S_N at each checkpoint

  std::string verdict() const { return convergent ? "convergent" : (marginal ? "divergent (marginal)" : "divergent"); }
};

inline constexpr double kThresholdSlope = -1.0;
inline constexpr double kThresholdBand = 0.15;

inline ThresholdReport norm_threshold_probe(double s, double p, int d, double t, std::size_t n_terms,
                                            std::size_t n_samples, std::uint64_t seed = 1) {
  require_finite_p(p);
  require_dimension(d);
  if (n_terms < 16 || n_samples < 1) throw ParameterError("norm_threshold_probe needs n_terms >= 16 and n_samples >= 1");
  ThresholdReport rep;
  rep.s = s;
  rep.p = p;
  rep.t = t;
  rep.d = d;
  rep.threshold = s - d / p;
  rep.predicted_exponent = (t - s) * p / d;

  // term_ell = ell^{pt/d + p/2 - 1} |ell^{-(s/d + 1/2 - 1/p)} X_ell|^p = ell^{(t-s)p/d} |X_ell|^p
  std::vector<double> mean_inc(n_terms, 0.0);
  for (std::size_t r = 0; r < n_samples; ++r) {
    Rng rng = make_rng(seed, r);
    for (std::size_t ell = 1; ell <= n_terms; ++ell) {
      const double x = sample_coeff(p, rng);
      const double term = std::pow(static_cast<double>(ell), rep.predicted_exponent) * std::pow(std::abs(x), p);
      mean_inc[ell - 1] += term / static_cast<double>(n_samples);
    }
  }
  double acc = 0.0;
  for (std::size_t ell = 1; ell <= n_terms; ++ell) {
    acc += mean_inc[ell - 1];
    if ((ell & (ell - 1)) == 0 || ell == n_terms) {
      rep.checkpoints.push_back(ell);
      rep.partial_sums.push_back(acc);
    }
  }

  // geometric bins over the tail half of the decades, starting at ell = 8
  std::vector<double> lx, ly;
  for (std::size_t lo = 8; lo < n_terms; lo *= 2) {
    const std::size_t hi = std::min(2 * lo, n_terms + 1);
    double sum = 0.0, logc = 0.0;
    for (std::size_t ell = lo; ell < hi; ++ell) {
      sum += mean_inc[ell - 1];
      logc += std::log(static_cast<double>(ell));
    }
    const double cnt = static_cast<double>(hi - lo);
    if (sum > 0.0) {
      lx.push_back(logc / cnt);
      ly.push_back(std::log(sum / cnt));
    }
  }
  rep.fitted_slope = stats::ols(lx, ly).slope;
  rep.convergent = rep.fitted_slope < kThresholdSlope - kThresholdBand;
  rep.marginal = std::abs(rep.fitted_slope - kThresholdSlope) <= kThresholdBand;
  return rep;
}

}  // namespace besov_invert
