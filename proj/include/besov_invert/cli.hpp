#pragma once

// Subcommand dispatch for the command-line driver. Each subcommand writes its
// artifacts, the resolved config and the version string under cfg.out.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "besov_invert/besov.hpp"
#include "besov_invert/config.hpp"
#include "besov_invert/errors.hpp"
#include "besov_invert/experiments.hpp"
#include "besov_invert/field_io.hpp"
#include "besov_invert/forward.hpp"
#include "besov_invert/mcmc.hpp"
#include "besov_invert/posterior.hpp"
#include "besov_invert/quadrature.hpp"
#include "besov_invert/report_io.hpp"
#include "besov_invert/wavelet.hpp"

#ifndef BESOV_INVERT_VERSION
#define BESOV_INVERT_VERSION "0.0.0"
#endif

namespace besov_invert {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitCapability = 4;

inline const char* version() { return BESOV_INVERT_VERSION; }

namespace cli_detail {

namespace fs = std::filesystem;

inline ForwardSetup forward_setup(const RunConfig& c) {
  ForwardSetup s;
  s.d = c.dimension;
  s.grid_log2 = c.grid_log2;
  s.sigma = c.sigma;
  s.proj_kind = parse_basis_kind(c.projection);
  s.k = static_cast<std::size_t>(c.k);
  s.noise_scale = c.noise_scale;
  s.wavelet_order = c.wavelet_order;
  return s;
}

inline PriorSpec prior_spec(const RunConfig& c) {
  PriorSpec p;
  p.kind = c.prior == "besov" ? PriorSpec::Kind::besov : PriorSpec::Kind::gaussian;
  p.d = c.dimension;
  p.J = c.grid_log2;
  p.seed = split_seed(c.seed, kTruthStream);
  p.s = c.s;
  p.p = c.p;
  p.alpha = c.alpha;
  return p;
}

inline ChainOptions chain_options(const RunConfig& c) {
  ChainOptions o;
  o.iters = static_cast<std::size_t>(c.iters);
  o.burn_in = c.burn_in < 0 ? SIZE_MAX : static_cast<std::size_t>(c.burn_in);
  o.thin = static_cast<std::size_t>(c.thin);
  o.seed = split_seed(c.seed, kChainStream);
  o.level = c.level;
  o.proposal_scale = c.proposal_scale;
  return o;
}

inline GridField truth_field(const RunConfig& c, const ProjectionFamily& unknown) {
  if (!c.input.empty()) {
    GridField u = io::read_grid(c.input);
    if (u.d != c.dimension || u.grid_log2 != c.grid_log2) {
      throw ShapeError("input grid " + c.input + " does not match dimension/grid_log2 of the config");
    }
    return u;
  }
  if (c.truth == "bumps") return smooth_bumps(c.dimension, c.grid_log2);
  if (c.truth == "power_law") return power_law_truth(unknown, c.truth_decay);
  PriorSpec g = prior_spec(c);
  g.kind = PriorSpec::Kind::gaussian;
  return sample_gaussian_prior(g, c.grid_log2);
}

inline void write_field_artifacts(const fs::path& dir, const std::string& stem, const GridField& g) {
  io::write_grid(dir / (stem + ".bgf"), g);
  if (g.d == 2) io::write_png(dir / (stem + ".png"), g);
}

inline void run_sample_prior(const RunConfig& c, const fs::path& dir) {
  const PriorSpec spec = prior_spec(c);
  io::KeyValue info;
  info.set("prior", c.prior);
  info.set("seed", spec.seed);
  if (spec.kind == PriorSpec::Kind::besov) {
    const WaveletBasis basis = build_basis(c.dimension, c.wavelet_order, c.grid_log2);
    const CoeffField coeffs = sample_besov_prior(spec, basis);
    io::write_coeffs(dir / "prior_coeffs.bcf", coeffs);
    const GridField u = idwt(coeffs, basis);
    write_field_artifacts(dir, "prior_field", u);
    info.set("besov_norm", besov_norm(coeffs, spec.besov()));
    info.set("l2_norm", l2_norm(u));
  } else {
    const GridField u = sample_gaussian_prior(spec, c.grid_log2);
    write_field_artifacts(dir, "prior_field", u);
    info.set("l2_norm", l2_norm(u));
  }
  info.write(dir / "report.txt");
}

inline void run_forward(const RunConfig& c, const fs::path& dir) {
  const ForwardSetup setup = forward_setup(c);
  setup.validate();
  const ProjectionFamily unknown(parse_basis_kind(c.unknown_basis), c.dimension, c.grid_log2, c.wavelet_order);
  const GridField u = truth_field(c, unknown);
  const std::size_t n = static_cast<std::size_t>(c.n);
  if (n > unknown.dimension()) throw CapabilityError("n = " + std::to_string(n) + " exceeds the master grid dimension");
  const MeasurementSet set =
      synthesize_all(u, setup, setup.measured(), n, unknown, split_seed(c.seed, kNoiseStream));
  write_field_artifacts(dir, "truth", u);
  write_measurement(dir / "m.bgf", set.m);
  write_measurement(dir / "m_k.bgf", set.mk);
  write_measurement(dir / "m_kn.bgf", set.mkn);
  if (c.dimension == 2) io::write_png(dir / "m_k.png", set.mk.data);
}

inline void run_reconstruct(const RunConfig& c, const fs::path& dir) {
  PosteriorSpec spec;
  spec.prior = prior_spec(c);
  spec.setup = forward_setup(c);
  spec.setup.validate();
  spec.alpha = c.alpha;
  spec.n = static_cast<std::size_t>(c.n);
  spec.k = static_cast<std::size_t>(c.k);
  spec.unknown_basis = parse_basis_kind(c.unknown_basis);
  spec.noise_model = c.noise_model == "full" ? NoiseModel::full : NoiseModel::projected;
  if (spec.n > spec.setup.grid_count()) {
    throw CapabilityError("n = " + std::to_string(spec.n) + " exceeds the master grid dimension " +
                          std::to_string(spec.setup.grid_count()));
  }
  if (!c.input.empty()) {
    spec.data = read_measurement(c.input);
  } else {
    const ProjectionFamily unknown(spec.unknown_basis, c.dimension, c.grid_log2, c.wavelet_order);
    const GridField u = truth_field(c, unknown);
    spec.data = synthesize_all(u, spec.setup, spec.setup.measured(), spec.n, unknown, split_seed(c.seed, kNoiseStream)).mk;
    write_field_artifacts(dir, "truth", u);
    write_measurement(dir / "m_k.bgf", spec.data);
  }

  std::string backend = c.backend;
  if (backend == "auto") {
    backend = c.prior == "gaussian" ? "closed_form" : (c.p == 1.0 ? "gibbs" : "mh");
  }
  const DiscretePosterior post(spec);
  io::KeyValue info;
  info.set("backend", backend);
  info.set("estimator", c.estimator);
  info.set("n", static_cast<std::uint64_t>(spec.n));
  info.set("k", static_cast<std::uint64_t>(spec.measured()));
  info.set("noise_model", to_string(spec.noise_model));
  Vector coeffs;
  if (c.estimator == "tikhonov") {
    const Estimate e = tikhonov_solve(post);
    coeffs = e.coeffs;
    info.set("relative_residual", e.solve.relative_residual);
  } else if (backend == "closed_form") {
    const Estimate e = gaussian_cm(post);
    coeffs = e.coeffs;
    info.set("relative_residual", e.solve.relative_residual);
  } else if (backend == "quadrature") {
    const QuadratureResult r = quadrature_reconstructor(post, GFunction::identity());
    coeffs = r.value;
    info.set("quadrature_relative_error", r.relative_error);
  } else {
    if (backend == "gibbs" && post.target().has_penalty() && post.target().p != 1.0) {
      throw ConfigError("config field 'backend' violates gibbs requires p = 1 (got p = " +
                        io::KeyValue::format_double(c.p) + ")");
    }
    const ChainResult chain = run_chains(post.target(), backend == "gibbs" ? SamplerKind::gibbs : SamplerKind::mh,
                                         chain_options(c), static_cast<std::size_t>(c.chains));
    coeffs = chain.mean;
    io::write_chain_csv(dir / "chain.csv", chain);
    io::write_chain_report(dir, chain, info);
    io::emit_credible_band(dir, chain);
  }
  write_field_artifacts(dir, "estimate", post.synthesize(coeffs));
  {
    auto os = io::open_out(dir / "coefficients.csv");
    os << "ell,value\n";
    for (Eigen::Index j = 0; j < coeffs.size(); ++j) os << (j + 1) << ',' << io::num(coeffs(j)) << '\n';
  }
  if (!fs::exists(dir / "report.txt")) info.write(dir / "report.txt");
}

inline void run_converge_study(const RunConfig& c, const fs::path& dir) {
  ConvergenceConfig cc;
  cc.setup = forward_setup(c);
  cc.prior = prior_spec(c);
  cc.alpha = c.alpha;
  cc.unknown_basis = parse_basis_kind(c.unknown_basis);
  cc.n_ladder.assign(c.n_ladder.begin(), c.n_ladder.end());
  cc.k_ladder.assign(c.k_ladder.begin(), c.k_ladder.end());
  cc.n_ref = static_cast<std::size_t>(c.n_ref);
  cc.k_ref = static_cast<std::size_t>(c.k_ref);
  cc.backend = c.backend == "auto" ? (c.prior == "gaussian" ? Backend::closed_form : Backend::gibbs)
                                   : parse_backend(c.backend);
  cc.chain = chain_options(c);
  cc.chains = static_cast<std::size_t>(c.chains);
  cc.ess_threshold = c.ess_threshold;
  cc.truth = parse_truth_kind(c.truth);
  cc.truth_decay = c.truth_decay;
  cc.norm_t = c.norm_t;
  cc.norm_p = c.norm_p;
  cc.seed = c.seed;
  const ConvergenceStudy study = run_convergence_study(cc);
  io::write_study_csv(dir / "study.csv", study);
  io::study_summary(study).write(dir / "summary.txt");
  io::emit_study_plots(dir, study);
}

inline void run_stability_probe(const RunConfig& c, const fs::path& dir) {
  StabilityConfig sc;
  sc.backend = c.backend == "auto" ? Backend::quadrature : parse_backend(c.backend);
  sc.d = c.dimension;
  sc.grid_log2 = c.grid_log2;
  sc.sigma = c.sigma;
  sc.n = static_cast<std::size_t>(c.n);
  sc.k = static_cast<std::size_t>(c.k);
  sc.alpha = c.alpha;
  sc.unknown_basis = parse_basis_kind(c.unknown_basis);
  sc.wavelet_order = c.wavelet_order;
  sc.norm_ladder = c.norm_ladder;
  sc.delta_ladder = c.delta_ladder;
  sc.seed = c.seed;
  const StabilityProbe probe = besov_invert::run_stability_probe(sc);
  io::write_probe_csv(dir / "probe.csv", probe);
  io::KeyValue kv;
  kv.set("c", probe.c);
  kv.set("gamma", probe.gamma);
  kv.set("ratio_spread", probe.ratio_spread);
  kv.set("enveloped", probe.enveloped ? "true" : "false");
  kv.set("quotients_converge", probe.quotients_converge ? "true" : "false");
  kv.write(dir / "summary.txt");
}

inline void run_appendix(const RunConfig& c, const fs::path& dir) {
  AppendixConfig ac;
  ac.which = c.which;
  ac.n_ladder.assign(c.n_ladder.begin(), c.n_ladder.end());
  ac.samples = static_cast<std::size_t>(c.samples);
  ac.phi = c.phi;
  ac.seed = c.seed;
  const AppendixReport rep = appendix_example(ac);
  io::write_appendix_csv(dir / "appendix.csv", rep);
  io::KeyValue kv;
  kv.set("which", rep.which);
  kv.set("title", rep.title);
  kv.write(dir / "summary.txt");
}

inline void run_deblur(const RunConfig& c, const fs::path& dir) {
  if (c.dimension != 2) throw ConfigError("config field 'dimension' violates deblur-demo requires dimension = 2 (got " +
                                          std::to_string(c.dimension) + ")");
  DeblurConfig dc;
  dc.grid_log2 = c.grid_log2;
  dc.sigma = c.sigma;
  dc.noise_scale = c.noise_scale;
  dc.alpha_gaussian = c.alpha;
  dc.alpha_besov = c.alpha;
  dc.s = c.s;
  dc.wavelet_order = c.wavelet_order;
  dc.n_ladder.assign(c.n_ladder.begin(), c.n_ladder.end());
  dc.k = static_cast<std::size_t>(c.k);
  dc.chain = chain_options(c);
  dc.seed = c.seed;
  const DeblurReport rep = run_deblur_demo(dc);
  write_field_artifacts(dir, "truth", rep.truth);
  write_field_artifacts(dir, "data", rep.data);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    write_field_artifacts(dir, "estimate_" + rep.rows[i].prior + "_n" + std::to_string(rep.rows[i].n), rep.estimates[i]);
  }
  io::write_deblur_csv(dir / "deblur.csv", rep);
}

}  // namespace cli_detail

/// Runs one subcommand; throws on failure.
inline void run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  validate_config(cfg);
  const fs::path dir = cfg.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  io::KeyValue echo = echo_config(cfg);
  echo.write(dir / "config.resolved");
  {
    auto os = io::open_out(dir / "VERSION");
    os << "besov_invert " << version() << '\n';
  }
  const std::string& s = cfg.subcommand;
  if (s == "sample-prior") cli_detail::run_sample_prior(cfg, dir);
  else if (s == "forward") cli_detail::run_forward(cfg, dir);
  else if (s == "reconstruct") cli_detail::run_reconstruct(cfg, dir);
  else if (s == "converge-study") cli_detail::run_converge_study(cfg, dir);
  else if (s == "stability-probe") cli_detail::run_stability_probe(cfg, dir);
  else if (s == "appendix-example") cli_detail::run_appendix(cfg, dir);
  else if (s == "deblur-demo") cli_detail::run_deblur(cfg, dir);
  else throw ConfigError("unknown subcommand '" + s + "'");
}

/// Maps the exception currently being handled to an exit code.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const CapabilityError*>(&e)) return kExitCapability;
  return kExitOther;
}

/// Runs and converts failures into an exit code plus a one-line diagnostic.
inline int dispatch(const RunConfig& cfg, std::ostream& err = std::cerr) {
  try {
    run(cfg);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "besov_invert: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace besov_invert
