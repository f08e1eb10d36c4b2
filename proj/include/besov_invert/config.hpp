#pragma once

// Flat key=value run configuration. Every key is declared in one schema table;
// unknown keys are rejected with the closest known key as a hint.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "besov_invert/errors.hpp"
#include "besov_invert/field_io.hpp"

namespace besov_invert {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"sample-prior",    "forward",          "reconstruct", "converge-study",
                                              "stability-probe", "appendix-example", "deblur-demo"};
  return names;
}

struct RunConfig {
  std::string subcommand;
  std::string out = "out";
  std::uint64_t seed = 1;

  // geometry
  int dimension = 1;
  int grid_log2 = 8;
  int wavelet_order = 4;

  // prior
  std::string prior = "gaussian";
  double s = 1.0;
  double p = 1.0;
  double alpha = 1.0;

  // forward model and data
  double sigma = 0.05;
  std::string projection = "fourier";
  std::string unknown_basis = "fourier";
  std::string noise_model = "projected";
  double noise_scale = 0.01;
  std::string truth = "bumps";
  double truth_decay = 1.0;
  std::string input;  ///< BGF1 grid (forward: unknown field; reconstruct: measurement)

  // discretization
  long long n = 16;
  long long k = 0;
  std::vector<long long> n_ladder{8, 16, 32, 64};
  std::vector<long long> k_ladder{8, 16, 32, 64};
  long long n_ref = 0;
  long long k_ref = 0;

  // reconstruction
  std::string backend = "auto";
  std::string estimator = "cm";
  long long iters = 20000;
  long long burn_in = -1;  ///< -1: 20 % of iters
  long long thin = 1;
  long long chains = 1;
  double proposal_scale = 0.1;
  double level = 0.95;
  double ess_threshold = 100.0;

  // studies
  double norm_t = 0.0;
  double norm_p = 2.0;
  std::vector<double> norm_ladder{0.1, 1.0, 10.0};
  std::vector<double> delta_ladder{1e-2, 1e-3, 1e-4};
  int which = 1;
  long long samples = 10000;
  std::string phi = "cosine";
};

namespace config_detail {

struct Field {
  std::string name;
  std::string type;
  std::function<void(RunConfig&, const std::string&)> parse;
  std::function<std::string(const RunConfig&)> format;
};

inline ConfigError type_error(const std::string& key, const std::string& type, const std::string& value) {
  return ConfigError("config field '" + key + "': expected " + type + ", got '" + value + "'");
}

inline long long to_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw type_error(key, "integer", v);
  }
  if (pos != v.size()) throw type_error(key, "integer", v);
  return x;
}

inline double to_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw type_error(key, "number", v);
  }
  if (pos != v.size()) throw type_error(key, "number", v);
  return x;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = io::KeyValue::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
Field integer_field(const std::string& name, T RunConfig::*m) {
  return {name, "integer",
          [name, m](RunConfig& c, const std::string& v) {
            const long long x = to_integer(name, v);
            if (x < static_cast<long long>(std::numeric_limits<T>::min()) ||
                (x > 0 && static_cast<unsigned long long>(x) > static_cast<unsigned long long>(std::numeric_limits<T>::max()))) {
              throw ConfigError("config field '" + name + "': value " + v + " out of range");
            }
            c.*m = static_cast<T>(x);
          },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

inline Field seed_field(const std::string& name, std::uint64_t RunConfig::*m) {
  return {name, "unsigned integer",
          [name, m](RunConfig& c, const std::string& v) {
            if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
              throw type_error(name, "unsigned integer", v);
            }
            try {
              c.*m = std::stoull(v);
            } catch (const std::exception&) {
              throw type_error(name, "unsigned integer", v);
            }
          },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

inline Field real_field(const std::string& name, double RunConfig::*m) {
  return {name, "number", [name, m](RunConfig& c, const std::string& v) { c.*m = to_real(name, v); },
          [m](const RunConfig& c) { return io::KeyValue::format_double(c.*m); }};
}

inline Field string_field(const std::string& name, std::string RunConfig::*m) {
  return {name, "string", [m](RunConfig& c, const std::string& v) { c.*m = v; },
          [m](const RunConfig& c) { return c.*m; }};
}

inline Field integer_list_field(const std::string& name, std::vector<long long> RunConfig::*m) {
  return {name, "comma-separated integers",
          [name, m](RunConfig& c, const std::string& v) {
            std::vector<long long> xs;
            for (const auto& item : split_list(v)) xs.push_back(to_integer(name, item));
            c.*m = std::move(xs);
          },
          [m](const RunConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < (c.*m).size(); ++i) s += (i ? "," : "") + std::to_string((c.*m)[i]);
            return s;
          }};
}

inline Field real_list_field(const std::string& name, std::vector<double> RunConfig::*m) {
  return {name, "comma-separated numbers",
          [name, m](RunConfig& c, const std::string& v) {
            std::vector<double> xs;
            for (const auto& item : split_list(v)) xs.push_back(to_real(name, item));
            c.*m = std::move(xs);
          },
          [m](const RunConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < (c.*m).size(); ++i) s += (i ? "," : "") + io::KeyValue::format_double((c.*m)[i]);
            return s;
          }};
}

}  // namespace config_detail

inline const std::vector<config_detail::Field>& config_schema() {
  using namespace config_detail;
  static const std::vector<Field> schema{
      string_field("subcommand", &RunConfig::subcommand),
      string_field("out", &RunConfig::out),
      seed_field("seed", &RunConfig::seed),
      integer_field("dimension", &RunConfig::dimension),
      integer_field("grid_log2", &RunConfig::grid_log2),
      integer_field("wavelet_order", &RunConfig::wavelet_order),
      string_field("prior", &RunConfig::prior),
      real_field("s", &RunConfig::s),
      real_field("p", &RunConfig::p),
      real_field("alpha", &RunConfig::alpha),
      real_field("sigma", &RunConfig::sigma),
      string_field("projection", &RunConfig::projection),
      string_field("unknown_basis", &RunConfig::unknown_basis),
      string_field("noise_model", &RunConfig::noise_model),
      real_field("noise_scale", &RunConfig::noise_scale),
      string_field("truth", &RunConfig::truth),
      real_field("truth_decay", &RunConfig::truth_decay),
      string_field("input", &RunConfig::input),
      integer_field("n", &RunConfig::n),
      integer_field("k", &RunConfig::k),
      integer_list_field("n_ladder", &RunConfig::n_ladder),
      integer_list_field("k_ladder", &RunConfig::k_ladder),
      integer_field("n_ref", &RunConfig::n_ref),
      integer_field("k_ref", &RunConfig::k_ref),
      string_field("backend", &RunConfig::backend),
      string_field("estimator", &RunConfig::estimator),
      integer_field("iters", &RunConfig::iters),
      integer_field("burn_in", &RunConfig::burn_in),
      integer_field("thin", &RunConfig::thin),
      integer_field("chains", &RunConfig::chains),
      real_field("proposal_scale", &RunConfig::proposal_scale),
      real_field("level", &RunConfig::level),
      real_field("ess_threshold", &RunConfig::ess_threshold),
      real_field("norm_t", &RunConfig::norm_t),
      real_field("norm_p", &RunConfig::norm_p),
      real_list_field("norm_ladder", &RunConfig::norm_ladder),
      real_list_field("delta_ladder", &RunConfig::delta_ladder),
      integer_field("which", &RunConfig::which),
      integer_field("samples", &RunConfig::samples),
      string_field("phi", &RunConfig::phi),
  };
  return schema;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
      // adjacent transposition counts as one edit
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) cur[j] = std::min(cur[j], prev[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Closest schema key, or "" when nothing is reasonably close.
inline std::string suggest_key(const std::string& key) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& f : config_schema()) {
    const std::size_t d = edit_distance(key, f.name);
    if (d < best_d) {
      best_d = d;
      best = f.name;
    }
  }
  return best_d <= std::max<std::size_t>(2, key.size() / 3) ? best : std::string{};
}

inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : config_schema()) {
    if (f.name == key) {
      f.parse(cfg, value);
      return;
    }
  }
  const std::string hint = suggest_key(key);
  throw ConfigError("unknown config key '" + key + "'" + (hint.empty() ? "" : " (did you mean '" + hint + "'?)"));
}

namespace config_detail {

inline ConfigError violation(const std::string& field, const std::string& constraint, const std::string& value) {
  return ConfigError("config field '" + field + "' violates " + constraint + " (got " + value + ")");
}

inline std::string fmt(double v) { return io::KeyValue::format_double(v); }

inline void require_one_of(const std::string& field, const std::string& v, const std::vector<std::string>& options) {
  if (std::find(options.begin(), options.end(), v) != options.end()) return;
  std::string list;
  for (const auto& o : options) list += (list.empty() ? "" : "|") + o;
  throw violation(field, field + " in {" + list + "}", "'" + v + "'");
}

}  // namespace config_detail

/// Field-level constraints. Cross-field limits that depend on the grid (n, k
/// against the master grid) are left to the backends, which raise capability errors.
inline void validate_config(const RunConfig& c) {
  using namespace config_detail;
  if (c.subcommand.empty()) throw ConfigError("config field 'subcommand' is required");
  require_one_of("subcommand", c.subcommand, subcommands());
  if (c.out.empty()) throw violation("out", "out non-empty", "''");
  if (c.dimension != 1 && c.dimension != 2) throw violation("dimension", "dimension in {1,2}", std::to_string(c.dimension));
  if (c.grid_log2 < 1 || c.grid_log2 * c.dimension > 24) {
    throw violation("grid_log2", "1 <= grid_log2 and dimension*grid_log2 <= 24", std::to_string(c.grid_log2));
  }
  if (c.wavelet_order < 1 || c.wavelet_order > 8) {
    throw violation("wavelet_order", "1 <= wavelet_order <= 8", std::to_string(c.wavelet_order));
  }
  require_one_of("prior", c.prior, {"gaussian", "besov"});
  if (!(c.p >= 1.0)) throw violation("p", "p >= 1", fmt(c.p));
  if (!std::isfinite(c.s)) throw violation("s", "s finite", fmt(c.s));
  if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) throw violation("alpha", "alpha > 0", fmt(c.alpha));
  if (!(c.sigma > 0.0) || !std::isfinite(c.sigma)) throw violation("sigma", "sigma > 0", fmt(c.sigma));
  require_one_of("projection", c.projection, {"fourier", "wavelet"});
  require_one_of("unknown_basis", c.unknown_basis, {"fourier", "wavelet"});
  require_one_of("noise_model", c.noise_model, {"projected", "full"});
  if (!(c.noise_scale >= 0.0) || !std::isfinite(c.noise_scale)) {
    throw violation("noise_scale", "noise_scale >= 0", fmt(c.noise_scale));
  }
  require_one_of("truth", c.truth, {"bumps", "prior_draw", "power_law"});
  if (!(c.truth_decay > 0.0)) throw violation("truth_decay", "truth_decay > 0", fmt(c.truth_decay));
  if (c.n < 1) throw violation("n", "n >= 1", std::to_string(c.n));
  if (c.k < 0) throw violation("k", "k >= 0 (0 = full grid)", std::to_string(c.k));
  for (const auto* lad : {&c.n_ladder, &c.k_ladder}) {
    const std::string name = lad == &c.n_ladder ? "n_ladder" : "k_ladder";
    if (lad->empty()) throw violation(name, name + " non-empty", "''");
    for (long long v : *lad) {
      if (v < 1) throw violation(name, "entries >= 1", std::to_string(v));
    }
  }
  if (c.n_ref < 0) throw violation("n_ref", "n_ref >= 0", std::to_string(c.n_ref));
  if (c.k_ref < 0) throw violation("k_ref", "k_ref >= 0", std::to_string(c.k_ref));
  require_one_of("backend", c.backend, {"auto", "closed_form", "gibbs", "mh", "quadrature"});
  require_one_of("estimator", c.estimator, {"cm", "tikhonov"});
  if (c.iters < 1) throw violation("iters", "iters >= 1", std::to_string(c.iters));
  if (c.burn_in < -1 || c.burn_in >= c.iters) {
    throw violation("burn_in", "-1 <= burn_in < iters (-1 = 20%)", std::to_string(c.burn_in));
  }
  if (c.thin < 1) throw violation("thin", "thin >= 1", std::to_string(c.thin));
  if (c.chains < 1 || c.chains > 256) throw violation("chains", "1 <= chains <= 256", std::to_string(c.chains));
  if (!(c.proposal_scale > 0.0)) throw violation("proposal_scale", "proposal_scale > 0", fmt(c.proposal_scale));
  if (!(c.level > 0.0 && c.level < 1.0)) throw violation("level", "0 < level < 1", fmt(c.level));
  if (!(c.ess_threshold >= 0.0)) throw violation("ess_threshold", "ess_threshold >= 0", fmt(c.ess_threshold));
  if (!std::isfinite(c.norm_t)) throw violation("norm_t", "norm_t finite", fmt(c.norm_t));
  if (!(c.norm_p >= 1.0)) throw violation("norm_p", "norm_p >= 1", fmt(c.norm_p));
  if (c.norm_ladder.empty()) throw violation("norm_ladder", "norm_ladder non-empty", "''");
  for (double v : c.norm_ladder) {
    if (!(v >= 0.0)) throw violation("norm_ladder", "entries >= 0", fmt(v));
  }
  if (c.delta_ladder.empty()) throw violation("delta_ladder", "delta_ladder non-empty", "''");
  for (double v : c.delta_ladder) {
    if (!(v > 0.0)) throw violation("delta_ladder", "entries > 0", fmt(v));
  }
  if (c.which < 1 || c.which > 5) throw violation("which", "1 <= which <= 5", std::to_string(c.which));
  if (c.samples < 2) throw violation("samples", "samples >= 2", std::to_string(c.samples));
  require_one_of("phi", c.phi, {"cosine", "constant"});
}

/// Applies file entries, then overrides (later wins), then validates.
inline RunConfig parse_config(const io::KeyValue& file, const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  RunConfig cfg;
  for (const auto& [k, v] : file.entries()) set_config_value(cfg, k, v);
  for (const auto& [k, v] : overrides) set_config_value(cfg, k, v);
  validate_config(cfg);
  return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  io::KeyValue kv;
  try {
    kv = io::KeyValue::read(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(kv, overrides);
}

/// Every schema key with its resolved value, in schema order.
inline io::KeyValue echo_config(const RunConfig& cfg) {
  io::KeyValue kv;
  for (const auto& f : config_schema()) kv.set(f.name, f.format(cfg));
  return kv;
}

}  // namespace besov_invert
