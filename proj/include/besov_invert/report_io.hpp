#pragma once

// CSV tables, chain dumps, gnuplot data/scripts and optional PNG rasters.
// Every number goes through KeyValue::format_double so that equal results give
// byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "besov_invert/errors.hpp"
#include "besov_invert/experiments.hpp"
#include "besov_invert/field.hpp"
#include "besov_invert/field_io.hpp"
#include "besov_invert/mcmc.hpp"

#ifdef BESOV_INVERT_HAVE_PNG
#include <png.h>
#endif

namespace besov_invert::io {

inline constexpr const char* kStudyHeader = "n,k,error,eta1,eta2,eta3,ess_min,seed";
inline constexpr const char* kProbeHeader = "norm_m,delta,ratio";
inline constexpr const char* kAppendixHeader =
    "n,variance,mc_variance,mc_se,limit,skewness,excess_kurtosis,ks_pvalue,point_variance";
inline constexpr const char* kDeblurHeader = "prior,n,k,rel_l2_error,l1_wavelet_norm,ess_min";
inline constexpr const char* kQuantileHeader = "ell,mean,lo,hi,ess,mcse";

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return KeyValue::format_double(v);
}

inline double parse_num(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw IoError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw IoError("not a number: '" + s + "'");
  return v;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Rows of a CSV with the expected header; throws IoError on a header mismatch.
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, const std::string& header) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != header) {
    throw IoError(path.string() + ": expected header '" + header + "', got '" + line + "'");
  }
  const std::size_t cols = split_csv(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != cols) throw IoError(path.string() + ": wrong column count in '" + line + "'");
    rows.push_back(std::move(cells));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// chains

/// "iter,ell_1,...,ell_n", one row per stored draw.
inline void write_chain_csv(const std::filesystem::path& path, const ChainResult& chain) {
  if (chain.size() == 0 || chain.dim() == 0) throw ConfigError("refusing to write an empty chain");
  auto os = open_out(path);
  os << "iter";
  for (Eigen::Index j = 0; j < chain.dim(); ++j) os << ",ell_" << (j + 1);
  os << '\n';
  for (Eigen::Index i = 0; i < chain.size(); ++i) {
    os << (static_cast<std::size_t>(i) * chain.thin);
    for (Eigen::Index j = 0; j < chain.dim(); ++j) os << ',' << num(chain.samples(i, j));
    os << '\n';
  }
}

inline Matrix read_chain_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path.string());
  std::string line;
  std::getline(is, line);
  const auto head = split_csv(line);
  if (head.empty() || head[0] != "iter") throw IoError(path.string() + ": not a chain dump");
  for (std::size_t j = 1; j < head.size(); ++j) {
    if (head[j] != "ell_" + std::to_string(j)) throw IoError(path.string() + ": bad column '" + head[j] + "'");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != head.size()) throw IoError(path.string() + ": wrong column count");
    std::vector<double> r;
    for (std::size_t j = 1; j < cells.size(); ++j) r.push_back(parse_num(cells[j]));
    rows.push_back(std::move(r));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(head.size() - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

/// report.txt (key=value provenance) and quantiles.csv.
inline void write_chain_report(const std::filesystem::path& dir, const ChainResult& chain, KeyValue extra = {}) {
  if (chain.size() == 0) throw ConfigError("refusing to report an empty chain");
  extra.set("draws", static_cast<long long>(chain.size()));
  extra.set("dimension", static_cast<long long>(chain.dim()));
  extra.set("chains", static_cast<long long>(chain.chains));
  extra.set("seed", chain.seed);
  extra.set("burn_in", static_cast<long long>(chain.burn_in));
  extra.set("thin", static_cast<long long>(chain.thin));
  extra.set("level", chain.level);
  extra.set("acceptance", chain.acceptance);
  extra.set("ess_min", chain.ess_min());
  for (std::size_t i = 0; i < chain.warnings.size(); ++i) extra.set("warning_" + std::to_string(i + 1), chain.warnings[i]);
  auto os = open_out(dir / "report.txt");
  os << extra.str();
  auto qs = open_out(dir / "quantiles.csv");
  qs << kQuantileHeader << '\n';
  for (Eigen::Index j = 0; j < chain.dim(); ++j) {
    qs << (j + 1) << ',' << num(chain.mean(j)) << ',' << num(chain.lo(j)) << ',' << num(chain.hi(j)) << ','
       << num(chain.ess(j)) << ',' << num(chain.mcse(j)) << '\n';
  }
}

// ---------------------------------------------------------------------------
// experiment tables

inline void write_study_csv(const std::filesystem::path& path, const ConvergenceStudy& study) {
  auto os = open_out(path);
  os << kStudyHeader << '\n';
  for (const auto& c : study.cells) {
    os << c.n << ',' << c.k << ',' << num(c.error) << ',' << num(c.eta1) << ',' << num(c.eta2) << ',' << num(c.eta3)
       << ',' << num(c.ess_min) << ',' << c.seed << '\n';
  }
}

inline std::vector<StudyCell> read_study_csv(const std::filesystem::path& path) {
  std::vector<StudyCell> cells;
  for (const auto& r : read_csv(path, kStudyHeader)) {
    StudyCell c;
    c.n = std::stoull(r[0]);
    c.k = std::stoull(r[1]);
    c.error = parse_num(r[2]);
    c.eta1 = parse_num(r[3]);
    c.eta2 = parse_num(r[4]);
    c.eta3 = parse_num(r[5]);
    c.ess_min = parse_num(r[6]);
    c.seed = std::stoull(r[7]);
    cells.push_back(c);
  }
  return cells;
}

/// Header block for a study: reference note, rates, flags.
inline KeyValue study_summary(const ConvergenceStudy& study) {
  KeyValue kv;
  kv.set("n_ref", static_cast<long long>(study.n_ref));
  kv.set("k_ref", static_cast<long long>(study.k_ref));
  kv.set("reference_norm", study.reference_norm);
  kv.set("rate_n", num(study.rate_n));
  kv.set("rate_k", num(study.rate_k));
  kv.set("monotone_n", study.monotone_n ? "true" : "false");
  kv.set("monotone_k", study.monotone_k ? "true" : "false");
  kv.set("noise_seed", study.seed);
  std::size_t flagged = 0;
  for (const auto& c : study.cells) flagged += c.flagged ? 1 : 0;
  kv.set("flagged_cells", static_cast<long long>(flagged));
  for (std::size_t i = 0; i < study.notes.size(); ++i) kv.set("note_" + std::to_string(i + 1), study.notes[i]);
  return kv;
}

inline void write_probe_csv(const std::filesystem::path& path, const StabilityProbe& probe) {
  auto os = open_out(path);
  os << kProbeHeader << '\n';
  for (const auto& r : probe.rows) os << num(r.norm_m) << ',' << num(r.delta) << ',' << num(r.ratio) << '\n';
}

inline std::vector<StabilityRow> read_probe_csv(const std::filesystem::path& path) {
  std::vector<StabilityRow> rows;
  for (const auto& r : read_csv(path, kProbeHeader)) rows.push_back({parse_num(r[0]), parse_num(r[1]), parse_num(r[2])});
  return rows;
}

inline void write_appendix_csv(const std::filesystem::path& path, const AppendixReport& rep) {
  auto os = open_out(path);
  os << kAppendixHeader << '\n';
  for (const auto& r : rep.rows) {
    os << r.n << ',' << num(r.variance) << ',' << num(r.mc_variance) << ',' << num(r.mc_se) << ',' << num(r.limit) << ','
       << num(r.skewness) << ',' << num(r.excess_kurtosis) << ',' << num(r.ks_pvalue) << ',' << num(r.point_variance)
       << '\n';
  }
}

inline std::vector<AppendixRow> read_appendix_csv(const std::filesystem::path& path) {
  std::vector<AppendixRow> rows;
  for (const auto& c : read_csv(path, kAppendixHeader)) {
    AppendixRow r;
    r.n = std::stoull(c[0]);
    r.variance = parse_num(c[1]);
    r.mc_variance = parse_num(c[2]);
    r.mc_se = parse_num(c[3]);
    r.limit = parse_num(c[4]);
    r.skewness = parse_num(c[5]);
    r.excess_kurtosis = parse_num(c[6]);
    r.ks_pvalue = parse_num(c[7]);
    r.point_variance = parse_num(c[8]);
    rows.push_back(r);
  }
  return rows;
}

inline void write_deblur_csv(const std::filesystem::path& path, const DeblurReport& rep) {
  auto os = open_out(path);
  os << kDeblurHeader << '\n';
  for (const auto& r : rep.rows) {
    os << r.prior << ',' << r.n << ',' << r.k << ',' << num(r.rel_l2_error) << ',' << num(r.l1_wavelet_norm) << ','
       << num(r.ess_min) << '\n';
  }
}

inline std::vector<DeblurRow> read_deblur_csv(const std::filesystem::path& path) {
  std::vector<DeblurRow> rows;
  for (const auto& c : read_csv(path, kDeblurHeader)) {
    DeblurRow r;
    r.prior = c[0];
    r.n = std::stoull(c[1]);
    r.k = std::stoull(c[2]);
    r.rel_l2_error = parse_num(c[3]);
    r.l1_wavelet_norm = parse_num(c[4]);
    r.ess_min = parse_num(c[5]);
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// rasters

inline bool png_available() {
#ifdef BESOV_INVERT_HAVE_PNG
  return true;
#else
  return false;
#endif
}

/// 8-bit grayscale, min..max mapped to 0..255; 1-D fields become one row.
/// Returns false without writing when PNG support is compiled out.
inline bool write_png(const std::filesystem::path& path, const GridField& g) {
#ifdef BESOV_INVERT_HAVE_PNG
  const std::size_t side = g.side();
  const std::size_t rows = g.d == 2 ? side : 1;
  const auto [lo_it, hi_it] = std::minmax_element(g.values.begin(), g.values.end());
  const double lo = *lo_it, span = *hi_it > *lo_it ? *hi_it - *lo_it : 1.0;
  std::vector<unsigned char> pixels(rows * side);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<unsigned char>(std::lround(255.0 * (g.values[i] - lo) / span));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw IoError("cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng failed writing " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(side), static_cast<png_uint_32>(rows), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < rows; ++r) png_write_row(png, pixels.data() + r * side);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  return true;
#else
  (void)path;
  (void)g;
  return false;
#endif
}

// ---------------------------------------------------------------------------
// gnuplot

/// error_vs_n.dat, error_vs_k.dat, error_heatmap.dat and matching .gp scripts.
/// Returns the data files written.
inline std::vector<std::filesystem::path> emit_study_plots(const std::filesystem::path& dir, const ConvergenceStudy& study) {
  if (study.cells.empty()) throw ConfigError("refusing to plot an empty study");
  std::vector<std::size_t> ns, ks;
  for (const auto& c : study.cells) {
    if (c.n == study.n_ref && c.k == study.k_ref) continue;
    ns.push_back(c.n);
    ks.push_back(c.k);
  }
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ns.empty()) throw ConfigError("study has no cells besides the reference");
  auto err = [&](std::size_t n, std::size_t k) { return num(study.cell(n, k).error); };

  const auto fn = dir / "error_vs_n.dat", fk = dir / "error_vs_k.dat", fh = dir / "error_heatmap.dat";
  {
    auto os = open_out(fn);
    os << "# n error(k=" << ks.back() << ")\n";
    for (std::size_t n : ns) os << n << ' ' << err(n, ks.back()) << '\n';
  }
  {
    auto os = open_out(fk);
    os << "# k error(n=" << ns.back() << ")\n";
    for (std::size_t k : ks) os << k << ' ' << err(ns.back(), k) << '\n';
  }
  {
    auto os = open_out(fh);
    os << "# n k error\n";
    for (std::size_t n : ns) {
      for (std::size_t k : ks) os << n << ' ' << k << ' ' << err(n, k) << '\n';
      os << '\n';
    }
  }
  auto curve_script = [&](const std::string& name, const std::string& axis) {
    auto os = open_out(dir / (name + ".gp"));
    os << "set terminal pngcairo size 800,600\nset output '" << name << ".png'\nset logscale xy\n"
       << "set xlabel '" << axis << "'\nset ylabel 'error'\nplot '" << name << ".dat' using 1:2 with linespoints notitle\n";
  };
  curve_script("error_vs_n", "n");
  curve_script("error_vs_k", "k");
  {
    auto os = open_out(dir / "error_heatmap.gp");
    os << "set terminal pngcairo size 800,600\nset output 'error_heatmap.png'\nset logscale xy\nset logscale cb\n"
       << "set xlabel 'n'\nset ylabel 'k'\nset view map\nsplot 'error_heatmap.dat' using 1:2:3 with points pt 5 ps 3 palette notitle\n";
  }
  return {fn, fk, fh};
}

/// credible_band.dat "ell lo mean hi" and its script.
inline std::filesystem::path emit_credible_band(const std::filesystem::path& dir, const ChainResult& chain) {
  if (chain.size() == 0) throw ConfigError("refusing to plot an empty chain");
  const auto path = dir / "credible_band.dat";
  auto os = open_out(path);
  os << "# ell lo mean hi (level " << num(chain.level) << ")\n";
  for (Eigen::Index j = 0; j < chain.dim(); ++j) {
    os << (j + 1) << ' ' << num(chain.lo(j)) << ' ' << num(chain.mean(j)) << ' ' << num(chain.hi(j)) << '\n';
  }
  auto gp = open_out(dir / "credible_band.gp");
  gp << "set terminal pngcairo size 800,600\nset output 'credible_band.png'\nset xlabel 'coefficient'\n"
     << "plot 'credible_band.dat' using 1:2:4 with filledcurves fs transparent solid 0.3 title 'band', "
     << "'' using 1:3 with linespoints title 'mean'\n";
  return path;
}

}  // namespace besov_invert::io
