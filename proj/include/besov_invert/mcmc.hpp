#pragma once

// Samplers for the discrete posteriors: exact single-site Gibbs for l1 penalties
// and random-walk Metropolis for general p. Chain summaries and posterior
// probabilities of coordinate boxes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "besov_invert/errors.hpp"
#include "besov_invert/linalg.hpp"
#include "besov_invert/posterior.hpp"
#include "besov_invert/quadrature.hpp"
#include "besov_invert/rng.hpp"
#include "besov_invert/stats.hpp"
#include "besov_invert/work_pool.hpp"

namespace besov_invert {

// ---------------------------------------------------------------------------
// Exact conditionals

/// Standard normal conditioned on z >= c.
template <class Engine>
double sample_normal_tail(double c, Engine& rng) {
  std::normal_distribution<double> normal;
  if (c <= 0.0) {
    for (;;) {
      const double z = normal(rng);
      if (z >= c) return z;
    }
  }
  // exponential proposal with the optimal rate
  const double rate = 0.5 * (c + std::sqrt(c * c + 4.0));
  std::exponential_distribution<double> expo(rate);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    const double z = c + expo(rng);
    if (std::log(unif(rng)) <= -0.5 * (z - rate) * (z - rate)) return z;
  }
}

/// Draw from the density proportional to exp(-a x^2 / 2 + beta x - lambda |x|), a >= 0, lambda >= 0.
template <class Engine>
double sample_l1_conditional(double a, double beta, double lambda, Engine& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (a <= 0.0) {
    // asymmetric Laplace: rate lambda - beta on x > 0, lambda + beta on x < 0
    if (lambda <= std::abs(beta)) throw NumericalError("improper conditional: |beta| >= lambda with zero curvature");
    const double rp = lambda - beta, rn = lambda + beta;
    const double w_pos = rn / (rp + rn);  // mass 1/rp relative to 1/rn
    const double e = std::exponential_distribution<double>(1.0)(rng);
    return unif(rng) < w_pos ? e / rp : -e / rn;
  }
  const double sa = std::sqrt(a);
  const double mu_pos = (beta - lambda) / a;
  const double mu_neg = (beta + lambda) / a;
  const double log_pos = 0.5 * a * mu_pos * mu_pos + stats::log_normal_cdf(mu_pos * sa);
  const double log_neg = 0.5 * a * mu_neg * mu_neg + stats::log_normal_cdf(-mu_neg * sa);
  const double top = std::max(log_pos, log_neg);
  const double w_pos = std::exp(log_pos - top) / (std::exp(log_pos - top) + std::exp(log_neg - top));
  if (unif(rng) < w_pos) return mu_pos + sample_normal_tail(-mu_pos * sa, rng) / sa;
  return mu_neg - sample_normal_tail(mu_neg * sa, rng) / sa;
}

/// CDF of the same density, by the piece masses; used to validate the sampler.
inline double l1_conditional_cdf(double a, double beta, double lambda, double x) {
  if (a <= 0.0) {
    const double rp = lambda - beta, rn = lambda + beta;
    const double w_pos = rn / (rp + rn);
    if (x < 0.0) return (1.0 - w_pos) * std::exp(rn * x);
    return (1.0 - w_pos) + w_pos * (1.0 - std::exp(-rp * x));
  }
  const double sa = std::sqrt(a);
  const double mu_pos = (beta - lambda) / a, mu_neg = (beta + lambda) / a;
  const double log_pos = 0.5 * a * mu_pos * mu_pos + stats::log_normal_cdf(mu_pos * sa);
  const double log_neg = 0.5 * a * mu_neg * mu_neg + stats::log_normal_cdf(-mu_neg * sa);
  const double top = std::max(log_pos, log_neg);
  const double w_pos = std::exp(log_pos - top) / (std::exp(log_pos - top) + std::exp(log_neg - top));
  const double w_neg = 1.0 - w_pos;
  if (x < 0.0) {
    // negative piece: N(mu_neg, 1/a) restricted to (-inf, 0]
    return w_neg * std::exp(stats::log_normal_cdf((x - mu_neg) * sa) - stats::log_normal_cdf(-mu_neg * sa));
  }
  const double upper = std::exp(stats::log_normal_cdf(-(x - mu_pos) * sa) - stats::log_normal_cdf(mu_pos * sa));
  return w_neg + w_pos * (1.0 - upper);
}

// ---------------------------------------------------------------------------
// Chain summaries

struct ChainOptions {
  std::size_t iters = 10000;     ///< total iterations including burn-in
  std::size_t burn_in = SIZE_MAX;  ///< SIZE_MAX selects 20% of iters
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  double level = 0.95;           ///< central credible level for coordinate quantiles
  double proposal_scale = 0.1;   ///< random-walk step for mh_fallback
  std::size_t warn_window = 1000;

  std::size_t resolved_burn_in() const { return burn_in == SIZE_MAX ? iters / 5 : burn_in; }
  void validate() const {
    if (iters < 1) throw ParameterError("iters must be >= 1");
    if (thin < 1) throw ParameterError("thin must be >= 1");
    if (resolved_burn_in() >= iters) throw ParameterError("burn_in must be smaller than iters");
    if (!(level > 0.0 && level < 1.0)) throw ParameterError("level must be in (0, 1)");
    if (!(proposal_scale > 0.0)) throw ParameterError("proposal_scale must be > 0");
  }
  std::size_t kept() const { return (iters - resolved_burn_in() + thin - 1) / thin; }
};

struct ChainResult {
  Matrix samples;  ///< one row per kept draw
  Vector mean;
  Vector lo, hi;   ///< coordinate quantiles at `level`
  Vector ess;
  Vector mcse;     ///< sd / sqrt(ess)
  double acceptance = 1.0;
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::size_t chains = 1;
  double level = 0.95;
  std::vector<std::string> warnings;

  Eigen::Index dim() const { return samples.cols(); }
  Eigen::Index size() const { return samples.rows(); }
  double ess_min() const { return ess.size() ? ess.minCoeff() : 0.0; }
};

/// Effective sample size by Geyer's initial positive sequence on the FFT autocorrelation.
inline double effective_sample_size(const Eigen::Ref<const Vector>& x) {
  const Eigen::Index n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double m = x.mean();
  std::size_t len = 1;
  while (len < 2 * static_cast<std::size_t>(n)) len *= 2;
  std::vector<std::complex<double>> buf(len, 0.0), spec;
  for (Eigen::Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = x(i) - m;
  Eigen::FFT<double> fft;
  fft.fwd(spec, buf);
  for (auto& c : spec) c = std::norm(c);
  std::vector<std::complex<double>> ac;
  fft.inv(ac, spec);
  const double c0 = ac[0].real();
  if (!(c0 > 0.0)) return static_cast<double>(n);
  double tau = -1.0;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    const double pair = (ac[static_cast<std::size_t>(k)].real() + ac[static_cast<std::size_t>(k + 1)].real()) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return std::min(static_cast<double>(n) / tau, static_cast<double>(n) * std::log10(static_cast<double>(n)));
}

inline void summarize(ChainResult& r) {
  const Eigen::Index n = r.samples.cols(), m = r.samples.rows();
  r.mean = Vector::Zero(n);
  r.lo = r.hi = r.ess = r.mcse = Vector::Zero(n);
  if (m == 0) return;
  r.mean = r.samples.colwise().mean().transpose();
  const double tail = 0.5 * (1.0 - r.level);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> col(r.samples.col(j).data(), r.samples.col(j).data() + m);
    r.lo(j) = stats::quantile(col, tail);
    r.hi(j) = stats::quantile(std::move(col), 1.0 - tail);
    r.ess(j) = effective_sample_size(r.samples.col(j));
    const double var = m > 1 ? (r.samples.col(j).array() - r.mean(j)).square().sum() / static_cast<double>(m - 1) : 0.0;
    r.mcse(j) = std::sqrt(var / r.ess(j));
  }
}

// ---------------------------------------------------------------------------
// Samplers

/// Single-site Gibbs with exact conditionals for an l1 (or absent) penalty.
inline ChainResult gibbs_l1(const Target& t, const ChainOptions& opt, const Vector* start = nullptr) {
  t.validate();
  opt.validate();
  if (t.has_penalty() && t.p != 1.0) throw ParameterError("gibbs_l1 needs p = 1, got p = " + std::to_string(t.p));
  const Eigen::Index n = t.dim();
  Rng rng = make_rng(opt.seed);
  Vector x = start ? *start : Vector::Zero(n);
  if (x.size() != n) throw ShapeError("gibbs_l1: start vector size mismatch");
  Vector r = t.b - t.Q * x;

  ChainResult out;
  out.seed = opt.seed;
  out.burn_in = opt.resolved_burn_in();
  out.thin = opt.thin;
  out.level = opt.level;
  out.samples.resize(static_cast<Eigen::Index>(opt.kept()), n);
  Eigen::Index row = 0;
  for (std::size_t it = 0; it < opt.iters; ++it) {
    for (Eigen::Index l = 0; l < n; ++l) {
      const double a = t.Q(l, l);
      const double beta = r(l) + a * x(l);
      const double lam = t.lambda.size() ? t.lambda(l) : 0.0;
      const double nx = sample_l1_conditional(a, beta, lam, rng);
      const double dx = nx - x(l);
      if (dx != 0.0) {
        r.noalias() -= t.Q.col(l) * dx;
        x(l) = nx;
      }
    }
    if (it >= out.burn_in && (it - out.burn_in) % opt.thin == 0) out.samples.row(row++) = x.transpose();
  }
  out.acceptance = 1.0;
  summarize(out);
  return out;
}

/// Random-walk Metropolis with isotropic Gaussian proposals.
inline ChainResult mh_fallback(const Target& t, const ChainOptions& opt, const Vector* start = nullptr) {
  t.validate();
  opt.validate();
  const Eigen::Index n = t.dim();
  Rng rng = make_rng(opt.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x = start ? *start : Vector::Zero(n);
  if (x.size() != n) throw ShapeError("mh_fallback: start vector size mismatch");
  double lp = t.log_density(x);

  ChainResult out;
  out.seed = opt.seed;
  out.burn_in = opt.resolved_burn_in();
  out.thin = opt.thin;
  out.level = opt.level;
  out.samples.resize(static_cast<Eigen::Index>(opt.kept()), n);
  Eigen::Index row = 0;
  std::size_t accepted = 0, window_accepts = 0, window_fill = 0;
  bool warned = false;
  Vector y(n);
  for (std::size_t it = 0; it < opt.iters; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) y(i) = x(i) + opt.proposal_scale * normal(rng);
    const double ly = t.log_density(y);
    if (std::log(unif(rng)) < ly - lp) {
      x = y;
      lp = ly;
      ++accepted;
      ++window_accepts;
    }
    if (++window_fill == opt.warn_window) {
      if (window_accepts == 0 && !warned) {
        out.warnings.push_back("no proposal accepted in iterations " + std::to_string(it + 1 - opt.warn_window) + ".." +
                               std::to_string(it) + "; reduce proposal_scale");
        warned = true;
      }
      window_accepts = 0;
      window_fill = 0;
    }
    if (it >= out.burn_in && (it - out.burn_in) % opt.thin == 0) out.samples.row(row++) = x.transpose();
  }
  out.acceptance = static_cast<double>(accepted) / static_cast<double>(opt.iters);
  summarize(out);
  return out;
}

enum class SamplerKind { gibbs, mh };

inline std::string to_string(SamplerKind k) { return k == SamplerKind::gibbs ? "gibbs" : "mh"; }

/// Independent chains on split seeds, pooled in chain order.
inline ChainResult run_chains(const Target& t, SamplerKind kind, const ChainOptions& opt, std::size_t chains) {
  if (chains < 1) throw ParameterError("chains must be >= 1");
  std::vector<ChainResult> parts(chains);
  parallel_for(chains, [&](std::size_t c) {
    ChainOptions o = opt;
    o.seed = chains == 1 ? opt.seed : split_seed(opt.seed, c);
    parts[c] = kind == SamplerKind::gibbs ? gibbs_l1(t, o) : mh_fallback(t, o);
  });
  if (chains == 1) return std::move(parts[0]);
  ChainResult out;
  out.seed = opt.seed;
  out.burn_in = parts[0].burn_in;
  out.thin = parts[0].thin;
  out.level = opt.level;
  out.chains = chains;
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.size();
  out.samples.resize(rows, t.dim());
  Eigen::Index at = 0;
  double acc = 0.0;
  for (const auto& p : parts) {
    out.samples.middleRows(at, p.size()) = p.samples;
    at += p.size();
    acc += p.acceptance;
    for (const auto& w : p.warnings) out.warnings.push_back(w);
  }
  out.acceptance = acc / static_cast<double>(chains);
  summarize(out);
  // pooled ess is the sum over chains
  out.ess = Vector::Zero(t.dim());
  for (const auto& p : parts) out.ess += p.ess;
  for (Eigen::Index j = 0; j < t.dim(); ++j) {
    const double var = (out.samples.col(j).array() - out.mean(j)).square().sum() / static_cast<double>(std::max<Eigen::Index>(rows - 1, 1));
    out.mcse(j) = std::sqrt(var / out.ess(j));
  }
  return out;
}

struct ProbabilityEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
};

inline ProbabilityEstimate posterior_probability(const ChainResult& chain, const Box& box) {
  if (chain.size() == 0) throw NumericalError("posterior_probability: the chain has no samples");
  box.validate(static_cast<std::size_t>(chain.dim()));
  std::size_t inside = 0;
  std::vector<double> row(static_cast<std::size_t>(chain.dim()));
  for (Eigen::Index i = 0; i < chain.size(); ++i) {
    for (Eigen::Index j = 0; j < chain.dim(); ++j) row[static_cast<std::size_t>(j)] = chain.samples(i, j);
    if (box.contains(row.data(), row.size())) ++inside;
  }
  ProbabilityEstimate e;
  const double m = static_cast<double>(chain.size());
  e.probability = static_cast<double>(inside) / m;
  e.standard_error = std::sqrt(e.probability * (1.0 - e.probability) / m);
  return e;
}

}  // namespace besov_invert
