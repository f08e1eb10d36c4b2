#pragma once

// Desk-scale experiments: (n, k) convergence studies, local Lipschitz probes of
// the reconstructor, the five discretization examples, and a 2-D deblurring demo.
//
// The "continuum" reference of a study is its largest computable cell on the
// master grid, not a true infinite-dimensional limit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "besov_invert/besov.hpp"
#include "besov_invert/errors.hpp"
#include "besov_invert/field.hpp"
#include "besov_invert/forward.hpp"
#include "besov_invert/fourier.hpp"
#include "besov_invert/linalg.hpp"
#include "besov_invert/mcmc.hpp"
#include "besov_invert/posterior.hpp"
#include "besov_invert/projection.hpp"
#include "besov_invert/quadrature.hpp"
#include "besov_invert/rng.hpp"
#include "besov_invert/stats.hpp"
#include "besov_invert/wavelet.hpp"
#include "besov_invert/work_pool.hpp"

namespace besov_invert {

// Seed streams derived from one experiment seed.
inline constexpr std::uint64_t kTruthStream = 1;
inline constexpr std::uint64_t kNoiseStream = 2;
inline constexpr std::uint64_t kChainStream = 3;

enum class Backend { closed_form, gibbs, mh, quadrature };

inline std::string to_string(Backend b) {
  switch (b) {
    case Backend::closed_form: return "closed_form";
    case Backend::gibbs: return "gibbs";
    case Backend::mh: return "mh";
    case Backend::quadrature: return "quadrature";
  }
  return "unknown";
}

inline Backend parse_backend(const std::string& s) {
  if (s == "closed_form") return Backend::closed_form;
  if (s == "gibbs") return Backend::gibbs;
  if (s == "mh") return Backend::mh;
  if (s == "quadrature") return Backend::quadrature;
  throw ConfigError("unknown backend '" + s + "' (expected closed_form, gibbs, mh or quadrature)");
}

// ---------------------------------------------------------------------------
// Ground truths

enum class TruthKind { prior_draw, bumps, power_law };

inline TruthKind parse_truth_kind(const std::string& s) {
  if (s == "prior_draw") return TruthKind::prior_draw;
  if (s == "bumps") return TruthKind::bumps;
  if (s == "power_law") return TruthKind::power_law;
  throw ConfigError("unknown truth '" + s + "' (expected prior_draw, bumps or power_law)");
}

inline std::string to_string(TruthKind t) {
  switch (t) {
    case TruthKind::prior_draw: return "prior_draw";
    case TruthKind::bumps: return "bumps";
    case TruthKind::power_law: return "power_law";
  }
  return "unknown";
}

/// Superposition of smoothed indicators of a disc, a square and a smaller
/// disc (intervals in 1-D), periodized.
inline GridField smooth_bumps(int d, int grid_log2, double edge = 0.02) {
  GridField u(d, grid_log2);
  const std::size_t N = u.side();
  auto wrap = [](double x) { return x - std::round(x); };
  auto step = [edge](double r) { return 0.5 * (1.0 - std::tanh(r / edge)); };
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x1 = static_cast<double>(d == 1 ? i : i / N) / static_cast<double>(N);
    const double x2 = d == 1 ? 0.0 : static_cast<double>(i % N) / static_cast<double>(N);
    double v = 0.0;
    if (d == 1) {
      v += step(std::abs(wrap(x1 - 0.3)) - 0.12);
      v += 0.6 * step(std::abs(wrap(x1 - 0.7)) - 0.05);
    } else {
      v += step(std::hypot(wrap(x1 - 0.32), wrap(x2 - 0.30)) - 0.16);
      v += 0.7 * step(std::max(std::abs(wrap(x1 - 0.70)), std::abs(wrap(x2 - 0.68))) - 0.12);
      v += 0.5 * step(std::hypot(wrap(x1 - 0.72), wrap(x2 - 0.22)) - 0.07);
    }
    u.values[i] = v;
  }
  return u;
}

/// Coefficients (r + 1)^{-decay} in the given ordered basis.
inline GridField power_law_truth(const ProjectionFamily& family, double decay) {
  std::vector<double> c(family.dimension());
  for (std::size_t r = 0; r < c.size(); ++r) c[r] = std::pow(static_cast<double>(r + 1), -decay);
  return family.synthesize(c);
}

// ---------------------------------------------------------------------------
// Convergence study

struct ConvergenceConfig {
  ForwardSetup setup;  ///< setup.k is ignored; the k ladder drives P_k
  PriorSpec prior;     ///< kind and (s, p); alpha below
  double alpha = 1e-3;
  BasisKind unknown_basis = BasisKind::fourier;
  std::vector<std::size_t> n_ladder{8, 16, 32, 64, 128, 256};
  std::vector<std::size_t> k_ladder{8, 16, 32, 64, 128, 256};
  std::size_t n_ref = 0;  ///< 0 selects the full master grid
  std::size_t k_ref = 0;
  Backend backend = Backend::closed_form;
  ChainOptions chain;
  std::size_t chains = 1;
  double ess_threshold = 100.0;
  TruthKind truth = TruthKind::prior_draw;
  double truth_decay = 1.0;
  double norm_t = 0.0;  ///< error norm B^t_pp on wavelet coefficients; (0, 2) is L^2
  double norm_p = 2.0;
  std::uint64_t seed = 20240607;
};

struct StudyCell {
  std::size_t n = 0, k = 0;
  double error = 0.0;
  double eta1 = 0.0, eta2 = 0.0, eta3 = 0.0;
  double ess_min = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  bool flagged = false;  ///< sampler ESS below threshold
};

struct ConvergenceStudy {
  std::vector<StudyCell> cells;  ///< sorted by (n, k); the reference cell last
  std::size_t n_ref = 0, k_ref = 0;
  double reference_norm = 0.0;
  double rate_n = std::numeric_limits<double>::quiet_NaN();  ///< slope of log e vs log n at k = k_max
  double rate_k = std::numeric_limits<double>::quiet_NaN();  ///< slope of log e vs log k at n = n_max
  bool monotone_n = true;
  bool monotone_k = true;
  /// cauchy[i][j] = ||u_{n_i, k_{j+1}} - u_{n_i, k_j}||
  std::vector<std::vector<double>> cauchy;
  std::uint64_t seed = 0;  ///< noise seed shared by every cell
  std::vector<std::string> notes;

  const StudyCell& cell(std::size_t n, std::size_t k) const {
    for (const auto& c : cells) {
      if (c.n == n && c.k == k) return c;
    }
    throw IndexError("no study cell (" + std::to_string(n) + ", " + std::to_string(k) + ")");
  }
};

namespace detail {

inline double field_distance(const GridField& a, const GridField& b, const WaveletBasis& basis, double t, double p) {
  GridField diff = a;
  for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= b.values[i];
  if (t == 0.0 && p == 2.0) return l2_norm(diff);
  return besov_norm(dwt(diff, basis), BesovParams{t, p, diff.d});
}

inline GridField subtract(const GridField& a, const GridField& b) {
  GridField r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] -= b.values[i];
  return r;
}

struct CellEstimate {
  GridField field;
  double ess_min = std::numeric_limits<double>::infinity();
};

inline CellEstimate estimate_cell(const PosteriorSpec& spec, Backend backend, const ChainOptions& chain,
                                  std::size_t chains) {
  const DiscretePosterior post(spec);
  CellEstimate out;
  switch (backend) {
    case Backend::closed_form: {
      if (spec.prior.kind != PriorSpec::Kind::gaussian) {
        throw ConfigError("closed_form backend needs a gaussian prior");
      }
      out.field = gaussian_cm(post).field;
      break;
    }
    case Backend::quadrature: {
      out.field = post.synthesize(quadrature_reconstructor(post, GFunction::identity()).value);
      break;
    }
    case Backend::gibbs:
    case Backend::mh: {
      const ChainResult r = run_chains(post.target(), backend == Backend::gibbs ? SamplerKind::gibbs : SamplerKind::mh,
                                       chain, chains);
      out.field = post.synthesize(r.mean);
      out.ess_min = r.ess_min();
      break;
    }
  }
  return out;
}

inline GridField make_truth(const ConvergenceConfig& cfg, const ProjectionFamily& unknown) {
  switch (cfg.truth) {
    case TruthKind::prior_draw: {
      PriorSpec g;
      g.kind = PriorSpec::Kind::gaussian;
      g.d = cfg.setup.d;
      g.alpha = 1.0;
      g.seed = split_seed(cfg.seed, kTruthStream);
      return sample_gaussian_prior(g, cfg.setup.grid_log2);
    }
    case TruthKind::bumps: return smooth_bumps(cfg.setup.d, cfg.setup.grid_log2);
    case TruthKind::power_law: return power_law_truth(unknown, cfg.truth_decay);
  }
  throw ConfigError("unknown truth kind");
}

}  // namespace detail

inline ConvergenceStudy run_convergence_study(const ConvergenceConfig& cfg) {
  ForwardSetup setup = cfg.setup;
  setup.k = 0;
  setup.validate();
  const std::size_t full = setup.grid_count();
  const std::size_t n_ref = cfg.n_ref == 0 ? full : cfg.n_ref;
  const std::size_t k_ref = cfg.k_ref == 0 ? full : cfg.k_ref;
  if (cfg.n_ladder.empty() || cfg.k_ladder.empty()) throw ConfigError("n_ladder and k_ladder must be non-empty");
  for (std::size_t n : cfg.n_ladder) {
    if (n < 1 || n > n_ref) throw ConfigError("n_ladder entry " + std::to_string(n) + " outside [1, n_ref]");
  }
  for (std::size_t k : cfg.k_ladder) {
    if (k < 1 || k > k_ref) throw ConfigError("k_ladder entry " + std::to_string(k) + " outside [1, k_ref]");
  }
  if (n_ref > full || k_ref > full) throw ConfigError("reference cell exceeds the master grid");

  const ProjectionFamily unknown(cfg.unknown_basis, setup.d, setup.grid_log2, setup.wavelet_order);
  const ProjectionFamily pk = setup.projection_family();
  const WaveletBasis norm_basis = build_basis(setup.d, setup.wavelet_order, setup.grid_log2);

  // one frozen (u_true, eps); every cell consumes m_k = P_k m of this m
  const GridField u_true = detail::make_truth(cfg, unknown);
  const std::uint64_t noise_seed = split_seed(cfg.seed, kNoiseStream);
  const MeasurementSet meas = synthesize_all(u_true, setup, full, full, unknown, noise_seed);
  const GridField& m = meas.m.data;
  const GridField au = apply_forward(u_true, setup);

  std::vector<std::size_t> ns = cfg.n_ladder, ks = cfg.k_ladder;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  struct Job {
    std::size_t n, k;
  };
  std::vector<Job> jobs;
  for (std::size_t n : ns) {
    for (std::size_t k : ks) jobs.push_back({n, k});
  }
  const bool ref_in_ladder =
      std::find(ns.begin(), ns.end(), n_ref) != ns.end() && std::find(ks.begin(), ks.end(), k_ref) != ks.end();
  if (!ref_in_ladder) jobs.push_back({n_ref, k_ref});

  std::vector<detail::CellEstimate> est(jobs.size());
  std::vector<StudyCell> cells(jobs.size());
  ChainOptions chain = cfg.chain;
  chain.seed = split_seed(cfg.seed, kChainStream);
  parallel_for(jobs.size(), [&](std::size_t j) {
    PosteriorSpec spec;
    spec.prior = cfg.prior;
    spec.setup = setup;
    spec.alpha = cfg.alpha;
    spec.n = jobs[j].n;
    spec.k = jobs[j].k;
    spec.unknown_basis = cfg.unknown_basis;
    spec.noise_model = NoiseModel::projected;
    spec.data = meas.m;
    spec.data.kind = Measurement::Kind::practical_mk;
    spec.data.k = jobs[j].k;
    spec.data.data = pk.project(m, jobs[j].k);
    est[j] = detail::estimate_cell(spec, cfg.backend, chain, cfg.chains);

    StudyCell& c = cells[j];
    c.n = jobs[j].n;
    c.k = jobs[j].k;
    c.seed = noise_seed;
    c.eta1 = l2_norm(detail::subtract(m, spec.data.data));
    c.eta2 = l2_norm(detail::subtract(u_true, unknown.project(u_true, c.n)));
    c.eta3 = l2_norm(detail::subtract(au, pk.project(au, c.k)));
    c.ess_min = est[j].ess_min;
    c.flagged = std::isfinite(c.ess_min) && c.ess_min < cfg.ess_threshold;
  });

  std::size_t ref_index = 0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (jobs[j].n == n_ref && jobs[j].k == k_ref) ref_index = j;
  }
  const GridField& ref = est[ref_index].field;
  ConvergenceStudy study;
  study.n_ref = n_ref;
  study.k_ref = k_ref;
  study.seed = noise_seed;
  study.reference_norm = detail::field_distance(ref, GridField(ref.d, ref.grid_log2), norm_basis, cfg.norm_t, cfg.norm_p);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    cells[j].error = j == ref_index ? 0.0 : detail::field_distance(est[j].field, ref, norm_basis, cfg.norm_t, cfg.norm_p);
    if (!std::isfinite(cells[j].error) || cells[j].error < 0.0) throw NumericalError("non-finite study error");
  }

  auto index_of = [&](std::size_t n, std::size_t k) {
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].n == n && jobs[j].k == k) return j;
    }
    throw IndexError("missing study cell");
  };
  const double tol = 1e-12 * std::max(study.reference_norm, 1e-300);
  for (std::size_t k : ks) {
    for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
      if (cells[index_of(ns[i + 1], k)].error > cells[index_of(ns[i], k)].error + tol) study.monotone_n = false;
    }
  }
  for (std::size_t n : ns) {
    for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
      if (cells[index_of(n, ks[i + 1])].error > cells[index_of(n, ks[i])].error + tol) study.monotone_k = false;
    }
    std::vector<double> row;
    for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
      row.push_back(detail::field_distance(est[index_of(n, ks[i + 1])].field, est[index_of(n, ks[i])].field, norm_basis,
                                           cfg.norm_t, cfg.norm_p));
    }
    study.cauchy.push_back(std::move(row));
  }

  auto fit = [&](bool along_n) {
    std::vector<double> lx, ly;
    const auto& axis = along_n ? ns : ks;
    for (std::size_t v : axis) {
      const std::size_t j = along_n ? index_of(v, ks.back()) : index_of(ns.back(), v);
      if (j == ref_index || cells[j].flagged || !(cells[j].error > 0.0)) continue;
      lx.push_back(std::log(static_cast<double>(v)));
      ly.push_back(std::log(cells[j].error));
    }
    return lx.size() >= 2 ? stats::ols(lx, ly).slope : std::numeric_limits<double>::quiet_NaN();
  };
  study.rate_n = fit(true);
  study.rate_k = fit(false);

  std::vector<std::size_t> order(jobs.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if ((a == ref_index) != (b == ref_index)) return b == ref_index;
    return std::pair(cells[a].n, cells[a].k) < std::pair(cells[b].n, cells[b].k);
  });
  for (std::size_t j : order) study.cells.push_back(cells[j]);
  study.notes.push_back("reference is the largest computable cell (n=" + std::to_string(n_ref) +
                        ", k=" + std::to_string(k_ref) + ") on the master grid, not the continuum limit");
  study.notes.push_back("eta1, eta2, eta3 are L2 tail proxies ||(I-P_k)m||, ||(I-T_n)u_true||, ||(I-P_k)A u_true||");
  return study;
}

// ---------------------------------------------------------------------------
// Stability probe

struct StabilityConfig {
  Backend backend = Backend::quadrature;  ///< quadrature (Laplace prior) or closed_form (Gaussian)
  int d = 1;
  int grid_log2 = 4;
  double sigma = 0.05;
  std::size_t n = 1;
  std::size_t k = 4;
  double alpha = 1.0;
  BasisKind unknown_basis = BasisKind::wavelet;
  int wavelet_order = 2;
  std::vector<double> norm_ladder{0.1, 1.0, 10.0};
  std::vector<double> delta_ladder{1e-2, 1e-3, 1e-4};
  std::uint64_t seed = 7;
};

struct StabilityRow {
  double norm_m = 0.0, delta = 0.0, ratio = 0.0;
};

struct StabilityProbe {
  std::vector<StabilityRow> rows;
  double c = 0.0;
  double gamma = 0.0;
  double ratio_spread = 0.0;  ///< (max - min) / max over all rows
  bool enveloped = false;
  bool quotients_converge = true;  ///< |r(d_{i+1}) - r(d_i)| non-increasing along the delta ladder
};

inline StabilityProbe run_stability_probe(const StabilityConfig& cfg) {
  if (cfg.norm_ladder.empty() || cfg.delta_ladder.empty()) throw ConfigError("norm and delta ladders must be non-empty");
  for (double v : cfg.delta_ladder) {
    if (!(v > 0.0)) throw ConfigError("delta_ladder entries must be > 0");
  }
  ForwardSetup setup;
  setup.d = cfg.d;
  setup.grid_log2 = cfg.grid_log2;
  setup.sigma = cfg.sigma;
  setup.k = cfg.k;
  setup.wavelet_order = cfg.wavelet_order;
  setup.validate();
  const ProjectionFamily pk = setup.projection_family();

  auto random_direction = [&](std::uint64_t stream) {
    GridField w = sample_white_noise(cfg.grid_log2, cfg.d, split_seed(cfg.seed, stream));
    GridField v = pk.project(w, setup.measured());
    const double nv = l2_norm(v);
    if (!(nv > 0.0)) throw NumericalError("degenerate probe direction");
    for (double& x : v.values) x /= nv;
    return v;
  };
  const GridField base_dir = random_direction(11);
  const GridField pert_dir = random_direction(12);

  PosteriorSpec spec;
  spec.setup = setup;
  spec.alpha = cfg.alpha;
  spec.n = cfg.n;
  spec.k = setup.measured();
  spec.unknown_basis = cfg.unknown_basis;
  spec.data.data = base_dir;
  if (cfg.backend == Backend::closed_form) {
    spec.prior.kind = PriorSpec::Kind::gaussian;
  } else if (cfg.backend == Backend::quadrature) {
    spec.prior.kind = PriorSpec::Kind::besov;
    spec.prior.p = 1.0;
    spec.prior.s = cfg.d / 2.0;  // unit weights: plain l1 penalty
  } else {
    throw ConfigError("stability probe supports the closed_form and quadrature backends");
  }
  const DiscretePosterior post(spec);

  auto reconstruct = [&](const GridField& m) -> Vector {
    const Target t = post.target_for(m);
    if (cfg.backend == Backend::closed_form) return solve_spd(t.Q, t.b);
    return quadrature_reconstructor(t, GFunction::identity()).value;
  };

  StabilityProbe probe;
  for (double nm : cfg.norm_ladder) {
    GridField m = base_dir;
    for (double& x : m.values) x *= nm;
    const Vector r0 = reconstruct(m);
    std::vector<double> ratios;
    for (double delta : cfg.delta_ladder) {
      GridField mp = m;
      for (std::size_t i = 0; i < mp.size(); ++i) mp.values[i] += delta * pert_dir.values[i];
      const double ratio = (reconstruct(mp) - r0).norm() / delta;
      if (!std::isfinite(ratio)) throw NumericalError("non-finite Lipschitz ratio");
      probe.rows.push_back({nm, delta, ratio});
      ratios.push_back(ratio);
    }
    for (std::size_t i = 0; i + 2 < ratios.size(); ++i) {
      const double d0 = std::abs(ratios[i + 1] - ratios[i]), d1 = std::abs(ratios[i + 2] - ratios[i + 1]);
      if (d1 > d0 + 1e-9 * std::max(1.0, ratios[i])) probe.quotients_converge = false;
    }
  }

  // envelope c (1 + |m|)^gamma: gamma by least squares on the per-norm maxima, c inflated to cover every row
  std::vector<double> lx, ly;
  double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
  for (double nm : cfg.norm_ladder) {
    double worst = 0.0;
    for (const auto& r : probe.rows) {
      if (r.norm_m == nm) worst = std::max(worst, r.ratio);
    }
    lx.push_back(std::log1p(nm));
    ly.push_back(std::log(std::max(worst, std::numeric_limits<double>::min())));
  }
  for (const auto& r : probe.rows) {
    rmax = std::max(rmax, r.ratio);
    rmin = std::min(rmin, r.ratio);
  }
  probe.gamma = lx.size() >= 2 ? std::max(0.0, stats::ols(lx, ly).slope) : 0.0;
  probe.c = 0.0;
  for (const auto& r : probe.rows) probe.c = std::max(probe.c, r.ratio / std::pow(1.0 + r.norm_m, probe.gamma));
  probe.enveloped = true;
  for (const auto& r : probe.rows) {
    if (r.ratio > probe.c * std::pow(1.0 + r.norm_m, probe.gamma) * (1.0 + 1e-12)) probe.enveloped = false;
  }
  probe.ratio_spread = rmax > 0.0 ? (rmax - rmin) / rmax : 0.0;
  return probe;
}

// ---------------------------------------------------------------------------
// Discretization examples

struct AppendixRow {
  std::size_t n = 0;
  double variance = 0.0;     ///< exact variance of the pairing (or of the point value)
  double mc_variance = std::numeric_limits<double>::quiet_NaN();
  double mc_se = std::numeric_limits<double>::quiet_NaN();
  double limit = std::numeric_limits<double>::quiet_NaN();
  double skewness = std::numeric_limits<double>::quiet_NaN();
  double excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
  double ks_pvalue = std::numeric_limits<double>::quiet_NaN();
  double point_variance = std::numeric_limits<double>::quiet_NaN();  ///< example 5 only
};

struct AppendixReport {
  int which = 1;
  std::string title;
  std::vector<AppendixRow> rows;
};

struct AppendixConfig {
  int which = 1;
  std::vector<std::size_t> n_ladder{8, 16, 32, 64, 128, 256};
  std::size_t samples = 10000;
  std::string phi = "cosine";  ///< example 2 test function: "cosine" (1/2 + cos 2 pi t) or "constant"
  std::uint64_t seed = 5;
};

namespace detail {

// phi(t) = 1/2 + cos(2 pi t): integral over ((j-1)/n, j/n]
inline double example_phi_cell(std::size_t j, std::size_t n) {
  const double a = static_cast<double>(j - 1) / static_cast<double>(n), b = static_cast<double>(j) / static_cast<double>(n);
  const double tp = 2.0 * std::numbers::pi;
  return 0.5 * (b - a) + (std::sin(tp * b) - std::sin(tp * a)) / tp;
}
inline constexpr double kExamplePhiNorm2 = 0.25 + 0.5;  // ||1/2 + cos(2 pi t)||^2

template <class Draw>
void monte_carlo(AppendixRow& row, std::size_t samples, Draw&& draw, std::vector<double>* keep = nullptr) {
  std::vector<double> xs(samples);
  for (auto& x : xs) x = draw();
  row.mc_variance = stats::variance(xs);
  // se of the sample variance under normality
  row.mc_se = row.mc_variance * std::sqrt(2.0 / static_cast<double>(samples - 1));
  row.skewness = stats::skewness(xs);
  row.excess_kurtosis = stats::excess_kurtosis(xs);
  if (keep) *keep = std::move(xs);
}

// Hat-function discretization on the periodic 1-D mesh with n nodes: the pairing
// with cos(2 pi xi t) has variance |f|^2 / K(theta) with K = M + S.
inline double hat_pairing_variance_1d(std::size_t n, int xi) {
  const double h = 1.0 / static_cast<double>(n);
  const double theta = 2.0 * std::numbers::pi * xi / static_cast<double>(n);
  const double kh = h * (2.0 / 3.0 + std::cos(theta) / 3.0) + (2.0 - 2.0 * std::cos(theta)) / h;
  const double arg = std::numbers::pi * xi * h;
  const double sinc2 = xi == 0 ? 1.0 : std::pow(std::sin(arg) / arg, 2);
  const double f = h * sinc2;  // load amplitude
  const double norm2 = xi == 0 ? f * f * static_cast<double>(n) : f * f * static_cast<double>(n) / 2.0;
  return norm2 / kh;
}

// 2-D P1 periodic mesh, n x n nodes, squares split along one diagonal.
inline double p1_mass_symbol_2d(double t1, double t2, double h) {
  return h * h * (0.5 + (std::cos(t1) + std::cos(t2) + std::cos(t1 + t2)) / 6.0);
}
inline double p1_stiffness_symbol_2d(double t1, double t2) { return 4.0 - 2.0 * std::cos(t1) - 2.0 * std::cos(t2); }

}  // namespace detail

inline AppendixReport appendix_example(const AppendixConfig& cfg) {
  if (cfg.which < 1 || cfg.which > 5) throw ConfigError("which must be in 1..5, got " + std::to_string(cfg.which));
  if (cfg.samples < 2) throw ConfigError("samples must be >= 2");
  if (cfg.phi != "cosine" && cfg.phi != "constant") throw ConfigError("phi must be cosine or constant, got '" + cfg.phi + "'");
  const bool constant_phi = cfg.phi == "constant";
  AppendixReport rep;
  rep.which = cfg.which;
  std::size_t idx = 0;
  for (std::size_t n : cfg.n_ladder) {
    if (n < 2) throw ConfigError("n_ladder entries must be >= 2");
    AppendixRow row;
    row.n = n;
    Rng rng = make_rng(cfg.seed, idx++);
    std::normal_distribution<double> normal;
    switch (cfg.which) {
      case 1: {
        rep.title = "non-proper discretization of white noise, a_j = 1, phi = 1";
        // <U_n, 1> = sum_j X_j / n
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) var += (1.0 / static_cast<double>(n)) * (1.0 / static_cast<double>(n));
        row.variance = var;
        row.limit = 0.0;
        detail::monte_carlo(row, cfg.samples, [&] {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += normal(rng) / static_cast<double>(n);
          return s;
        });
        break;
      }
      case 2: {
        rep.title = std::string("proper discretization of white noise, a_j = sqrt(n), phi = ") +
                    (constant_phi ? "1" : "1/2 + cos(2 pi t)");
        std::vector<double> cell(n);
        double var = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
          const double integral = constant_phi ? 1.0 / static_cast<double>(n) : detail::example_phi_cell(j, n);
          cell[j - 1] = std::sqrt(static_cast<double>(n)) * integral;
          var += cell[j - 1] * cell[j - 1];
        }
        row.variance = var;
        row.limit = constant_phi ? 1.0 : detail::kExamplePhiNorm2;
        std::vector<double> xs;
        detail::monte_carlo(row, cfg.samples, [&] {
          double s = 0.0;
          for (double c : cell) s += c * normal(rng);
          return s;
        }, &xs);
        const double sd = std::sqrt(row.limit);
        row.ks_pvalue = stats::ks_pvalue(stats::ks_statistic(xs, [sd](double x) { return stats::normal_cdf(x / sd); }),
                                         xs.size());
        break;
      }
      case 3: {
        rep.title = "hat-function discretization of the Gaussian smoothness prior, phi = cos(2 pi t)";
        row.variance = detail::hat_pairing_variance_1d(n, 1);
        row.limit = 0.5 / (1.0 + 4.0 * std::numbers::pi * std::numbers::pi);
        // MC: node values c = K^{-1/2} X through the circulant symbol
        const int lg = static_cast<int>(std::log2(static_cast<double>(n)) + 0.5);
        if ((std::size_t{1} << lg) != n) throw ConfigError("example 3 needs power-of-two n");
        const double h = 1.0 / static_cast<double>(n);
        const double arg = std::numbers::pi * h;
        const double f_amp = h * std::pow(std::sin(arg) / arg, 2);
        detail::monte_carlo(row, cfg.samples, [&] {
          GridField w(1, lg);
          for (double& v : w.values) v = normal(rng);
          const GridField c = apply_multiplier(w, [h, n](const Frequency& xi) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(xi[0]) / static_cast<double>(n);
            return 1.0 / std::sqrt(h * (2.0 / 3.0 + std::cos(th) / 3.0) + (2.0 - 2.0 * std::cos(th)) / h);
          });
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            s += c.values[j] * f_amp * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) * h);
          }
          return s;
        });
        break;
      }
      case 4: {
        rep.title = "discrete total variation prior on [0, 1], a_n = sqrt(n), phi = 1";
        // increments: i.i.d. Laplace(rate a) conditioned on summing to zero, sampled exactly as a
        // Gaussian scale mixture V = S D with S ~ Gamma(n - 1/2, rate a^2 / 2), D ~ Dirichlet(1, ..., 1)
        const double a = std::sqrt(static_cast<double>(n));
        std::gamma_distribution<double> gamma_s(static_cast<double>(n) - 0.5, 2.0 / (a * a));
        std::exponential_distribution<double> expo(1.0);
        std::vector<double> v(n), z(n);
        detail::monte_carlo(row, cfg.samples, [&] {
          const double S = gamma_s(rng);
          double dsum = 0.0;
          for (auto& e : v) dsum += (e = expo(rng));
          double sz = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            v[j] = S * v[j] / dsum;
            z[j] = normal(rng);
            sz += std::sqrt(v[j]) * z[j];
          }
          // node values u_0 = 0, u_j = u_{j-1} + Delta_j; <U_n, 1> by the trapezoid rule (exact for P1)
          double u = 0.0, integral = 0.0;
          const double h = 1.0 / static_cast<double>(n);
          for (std::size_t j = 0; j < n; ++j) {
            const double delta = std::sqrt(v[j]) * z[j] - v[j] * sz / S;
            const double next = u + delta;
            integral += 0.5 * h * (u + next);
            u = next;
          }
          return integral;
        });
        row.variance = row.mc_variance;
        row.limit = 0.0;  // excess kurtosis of the Gaussian limit
        break;
      }
      case 5: {
        rep.title = "2-D P1 discretization of the Gaussian smoothness prior, phi = cos(2 pi x_1)";
        const double h = 1.0 / static_cast<double>(n);
        double point = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const double t1 = 2.0 * std::numbers::pi * static_cast<double>(i) * h;
            const double t2 = 2.0 * std::numbers::pi * static_cast<double>(j) * h;
            point += 1.0 / (detail::p1_mass_symbol_2d(t1, t2, h) + detail::p1_stiffness_symbol_2d(t1, t2));
          }
        }
        row.point_variance = point / static_cast<double>(n * n);
        const double t1 = 2.0 * std::numbers::pi * h;
        const double mhat = detail::p1_mass_symbol_2d(t1, 0.0, h);
        const double khat = mhat + detail::p1_stiffness_symbol_2d(t1, 0.0);
        // consistent load f = M phi_nodes: |f|^2 = mhat^2 n^2 / 2
        row.variance = mhat * mhat * static_cast<double>(n * n) / 2.0 / khat;
        row.limit = 0.5 / (1.0 + 4.0 * std::numbers::pi * std::numbers::pi);
        break;
      }
    }
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Deblurring demo

struct DeblurConfig {
  int grid_log2 = 5;  ///< d = 2
  double sigma = 0.03;
  double noise_scale = 0.01;
  double alpha_gaussian = 1e-4;
  double alpha_besov = 2.0;
  double s = 1.0;
  int wavelet_order = 4;
  std::vector<std::size_t> n_ladder{64, 256, 1024};
  std::size_t k = 0;  ///< 0: full grid
  ChainOptions chain;
  bool run_besov = true;
  std::uint64_t seed = 11;
};

struct DeblurRow {
  std::string prior;
  std::size_t n = 0, k = 0;
  double rel_l2_error = 0.0;
  double l1_wavelet_norm = 0.0;
  double ess_min = std::numeric_limits<double>::infinity();
};

struct DeblurReport {
  GridField truth, data;
  std::vector<DeblurRow> rows;
  std::vector<GridField> estimates;  ///< parallel to rows
  std::uint64_t seed = 0;
};

inline DeblurReport run_deblur_demo(const DeblurConfig& cfg) {
  ForwardSetup setup;
  setup.d = 2;
  setup.grid_log2 = cfg.grid_log2;
  setup.sigma = cfg.sigma;
  setup.noise_scale = cfg.noise_scale;
  setup.wavelet_order = cfg.wavelet_order;
  setup.k = 0;
  setup.validate();
  const std::size_t full = setup.grid_count();
  const std::size_t k = cfg.k == 0 ? full : cfg.k;
  const WaveletBasis basis = build_basis(2, cfg.wavelet_order, cfg.grid_log2);
  const ProjectionFamily wav(BasisKind::wavelet, 2, cfg.grid_log2, cfg.wavelet_order);

  DeblurReport rep;
  rep.seed = cfg.seed;
  rep.truth = smooth_bumps(2, cfg.grid_log2);
  const MeasurementSet meas = synthesize_all(rep.truth, setup, k, full, wav, split_seed(cfg.seed, kNoiseStream));
  rep.data = meas.mk.data;
  const double truth_norm = l2_norm(rep.truth);

  auto record = [&](const std::string& prior, std::size_t n, const GridField& est, double ess) {
    DeblurRow row;
    row.prior = prior;
    row.n = n;
    row.k = k;
    row.rel_l2_error = l2_norm(detail::subtract(est, rep.truth)) / truth_norm;
    const CoeffField c = dwt(est, basis);
    row.l1_wavelet_norm = 0.0;
    for (double v : c.coeffs) row.l1_wavelet_norm += std::abs(v);
    row.ess_min = ess;
    rep.rows.push_back(row);
    rep.estimates.push_back(est);
  };

  for (std::size_t n : cfg.n_ladder) {
    if (n < 1 || n > full) throw CapabilityError("n = " + std::to_string(n) + " exceeds the master grid dimension");
    PosteriorSpec spec;
    spec.setup = setup;
    spec.n = n;
    spec.k = k;
    spec.data = meas.mk;

    spec.prior.kind = PriorSpec::Kind::gaussian;
    spec.alpha = cfg.alpha_gaussian;
    spec.unknown_basis = BasisKind::fourier;
    record("gaussian", n, gaussian_cm(DiscretePosterior(spec)).field, std::numeric_limits<double>::infinity());

    if (cfg.run_besov) {
      spec.prior.kind = PriorSpec::Kind::besov;
      spec.prior.s = cfg.s;
      spec.prior.p = 1.0;
      spec.alpha = cfg.alpha_besov;
      spec.unknown_basis = BasisKind::wavelet;
      const DiscretePosterior post(spec);
      ChainOptions chain = cfg.chain;
      chain.seed = split_seed(cfg.seed, kChainStream + n);
      const ChainResult r = gibbs_l1(post.target(), chain);
      record("besov", n, post.synthesize(r.mean), r.ess_min());
    }
  }
  return rep;
}

}  // namespace besov_invert
