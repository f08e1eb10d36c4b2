#pragma once

// Brute-force evaluation of R(g(U_n) | m_k) = H^g / H^1 in dimension n <= 3 by
// nested adaptive Gauss-Kronrod quadrature of the log-concave posterior.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "besov_invert/errors.hpp"
#include "besov_invert/linalg.hpp"
#include "besov_invert/posterior.hpp"

namespace besov_invert {

namespace gk {

inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kNodes[1], [3], [5], [7]
inline constexpr std::array<double, 4> kGauss = {0.129484966168869693270611432679082,
                                                 0.279705391489276667901467771423780,
                                                 0.381830050505118944950369775488975,
                                                 0.417959183673469387755102040816327};

struct Piece {
  double a = 0.0, b = 0.0;
  std::vector<double> value, error, absval;
  double badness = 0.0;
  bool operator<(const Piece& o) const { return badness < o.badness; }
};

/// One G7K15 panel of a vector-valued integrand f(t, out).
template <class F>
Piece panel(const F& f, double a, double b, std::size_t dim) {
  Piece p;
  p.a = a;
  p.b = b;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  std::array<std::vector<double>, 15> vals;
  for (int i = 0; i < 7; ++i) {
    vals[2 * i].resize(dim);
    vals[2 * i + 1].resize(dim);
    f(c - h * kNodes[i], vals[2 * i]);
    f(c + h * kNodes[i], vals[2 * i + 1]);
  }
  vals[14].resize(dim);
  f(c, vals[14]);
  p.value.assign(dim, 0.0);
  p.error.assign(dim, 0.0);
  p.absval.assign(dim, 0.0);
  for (std::size_t q = 0; q < dim; ++q) {
    double kr = kKronrod[7] * vals[14][q], ga = kGauss[3] * vals[14][q], ab = kKronrod[7] * std::abs(vals[14][q]);
    for (int i = 0; i < 7; ++i) {
      const double s = vals[2 * i][q] + vals[2 * i + 1][q];
      kr += kKronrod[i] * s;
      ab += kKronrod[i] * (std::abs(vals[2 * i][q]) + std::abs(vals[2 * i + 1][q]));
      if (i % 2 == 1) ga += kGauss[i / 2] * s;
    }
    const double mean = kr / 2.0;
    double asc = kKronrod[7] * std::abs(vals[14][q] - mean);
    for (int i = 0; i < 7; ++i) {
      asc += kKronrod[i] * (std::abs(vals[2 * i][q] - mean) + std::abs(vals[2 * i + 1][q] - mean));
    }
    asc *= h;
    double err = std::abs((kr - ga) * h);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    p.value[q] = kr * h;
    p.error[q] = err;
    p.absval[q] = ab * h;
  }
  return p;
}

struct Result {
  std::vector<double> value, error, absval;
  bool converged = true;
};

/// Globally adaptive vector integration over [a, b]; stops when each of the first
/// `checked` components reaches error <= rel_tol * (integral of its absolute value).
template <class F>
Result integrate(const F& f, double a, double b, std::size_t dim, std::size_t checked, double rel_tol,
                 int max_panels = 400) {
  std::priority_queue<Piece> heap;
  Result r;
  r.value.assign(dim, 0.0);
  r.error.assign(dim, 0.0);
  r.absval.assign(dim, 0.0);
  auto score = [&](Piece& p, const std::vector<double>& scale) {
    p.badness = 0.0;
    for (std::size_t q = 0; q < checked; ++q) {
      p.badness = std::max(p.badness, p.error[q] / std::max(scale[q], std::numeric_limits<double>::min()));
    }
  };
  Piece first = panel(f, a, b, dim);
  std::vector<double> scale = first.absval;
  score(first, scale);
  r.value = first.value;
  r.error = first.error;
  r.absval = first.absval;
  heap.push(std::move(first));
  int panels = 1;
  for (;;) {
    bool done = true;
    for (std::size_t q = 0; q < checked; ++q) {
      if (r.error[q] > rel_tol * r.absval[q]) done = false;
    }
    if (done) break;
    if (panels >= max_panels) {
      r.converged = false;
      break;
    }
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Piece left = panel(f, worst.a, mid, dim), right = panel(f, mid, worst.b, dim);
    for (std::size_t q = 0; q < dim; ++q) {
      r.value[q] += left.value[q] + right.value[q] - worst.value[q];
      r.error[q] += left.error[q] + right.error[q] - worst.error[q];
      r.absval[q] += left.absval[q] + right.absval[q] - worst.absval[q];
      r.error[q] = std::max(r.error[q], 0.0);
    }
    scale = r.absval;
    score(left, scale);
    score(right, scale);
    heap.push(std::move(left));
    heap.push(std::move(right));
    panels += 1;
  }
  return r;
}

}  // namespace gk

/// Coordinate box E = prod [lo_i, hi_i]; infinite bounds allowed.
struct Box {
  std::vector<double> lo, hi;

  static Box whole(std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    return {std::vector<double>(n, -inf), std::vector<double>(n, inf)};
  }
  bool contains(const double* x, std::size_t n) const {
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }
  void validate(std::size_t n) const {
    if (lo.size() != n || hi.size() != n) throw ShapeError("box dimension does not match the posterior");
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i]) throw ParameterError("box bounds must satisfy lo <= hi");
    }
  }
};

struct GFunction {
  enum class Kind { identity, indicator, norm_power };
  Kind kind = Kind::identity;
  Box box;         ///< for indicator
  double q = 1.0;  ///< for norm_power

  static GFunction identity() { return {}; }
  static GFunction indicator(Box b) {
    GFunction g;
    g.kind = Kind::indicator;
    g.box = std::move(b);
    return g;
  }
  static GFunction norm_power(double q) {
    GFunction g;
    g.kind = Kind::norm_power;
    g.q = q;
    return g;
  }
};

struct QuadratureResult {
  Vector value;          ///< R(g | m): the mean vector for identity, a scalar otherwise
  double denominator = 0.0;
  double relative_error = 0.0;
  double log_scale = 0.0;  ///< log density at the mode, subtracted before integration
  Vector mode;
};

namespace detail {

// argmax_x -1/2 a x^2 + beta x - lambda |x|^p
inline double coordinate_argmax(double a, double beta, double lambda, double p) {
  if (lambda == 0.0) {
    if (a <= 0.0) throw NumericalError("improper conditional: zero curvature and no penalty");
    return beta / a;
  }
  if (p == 1.0) {
    if (std::abs(beta) <= lambda) return 0.0;
    if (a <= 0.0) throw NumericalError("improper conditional: linear term exceeds the l1 weight");
    return (beta - std::copysign(lambda, beta)) / a;
  }
  // derivative -a x + beta - lambda p |x|^{p-1} sign(x), strictly decreasing
  if (beta == 0.0) return 0.0;
  const double sgn = beta > 0.0 ? 1.0 : -1.0;
  auto deriv = [&](double t) { return -a * t + std::abs(beta) - lambda * p * std::pow(t, p - 1.0); };
  double lo = 0.0, hi = 1.0;
  while (deriv(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) > 0.0 ? lo : hi) = mid;
  }
  return sgn * 0.5 * (lo + hi);
}

// Maximizes the target over coordinates first..n-1 with the others held fixed.
inline void maximize_tail(const Target& t, Vector& x, Eigen::Index first) {
  const Eigen::Index n = t.dim();
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double change = 0.0;
    for (Eigen::Index j = first; j < n; ++j) {
      const double a = t.Q(j, j);
      const double beta = t.b(j) - t.Q.row(j).dot(x) + a * x(j);
      const double lam = t.lambda.size() ? t.lambda(j) : 0.0;
      const double nx = coordinate_argmax(a, beta, lam, t.p);
      change = std::max(change, std::abs(nx - x(j)) / std::max(1.0, std::abs(nx)));
      x(j) = nx;
    }
    if (change < 1e-15) break;
  }
}

class NestedIntegrator {
 public:
  NestedIntegrator(const Target& t, const Box& box, double q, double log_scale, double rel_tol)
      : t_(t), box_(box), q_(q), shift_(log_scale), tol_(rel_tol), n_(t.dim()) {}

  // components: [1, x_1..x_n, 1_E, |x|^q]
  std::size_t components() const { return static_cast<std::size_t>(n_) + 3; }

  /// Integral over coordinates level..n-1 with x(0..level-1) fixed; returns values then errors.
  void integrate(Eigen::Index level, Vector& x, std::vector<double>& value, std::vector<double>& error) {
    const std::size_t dim = components();
    value.assign(dim, 0.0);
    error.assign(dim, 0.0);

    // conditional mode over the free coordinates gives the peak and the profile height
    Vector y = x;
    maximize_tail(t_, y, level);
    const double peak = t_.log_density(y) - shift_;
    if (peak < -60.0) return;
    const double center = y(level);
    const double cutoff = peak - 42.0;

    auto profile = [&](double s) {
      Vector z = y;
      z(level) = s;
      maximize_tail(t_, z, level + 1);
      return t_.log_density(z) - shift_;
    };
    const double a = t_.Q(level, level);
    double step = a > 0.0 ? 1.0 / std::sqrt(a) : 1.0;
    if (t_.lambda.size() && t_.lambda(level) > 0.0) step = std::min(step, 1.0 / t_.lambda(level));
    step = std::max(step, 1e-6);
    double lo = center - step, hi = center + step;
    for (double s = step; profile(lo) > cutoff; s *= 2.0) lo = center - 2.0 * s;
    for (double s = step; profile(hi) > cutoff; s *= 2.0) hi = center + 2.0 * s;

    std::vector<double> cuts{lo};
    auto add_cut = [&](double c) {
      if (std::isfinite(c) && c > lo && c < hi) cuts.push_back(c);
    };
    add_cut(0.0);
    add_cut(center);
    add_cut(box_.lo[static_cast<std::size_t>(level)]);
    add_cut(box_.hi[static_cast<std::size_t>(level)]);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const bool innermost = level == n_ - 1;
    std::vector<double> inner_v, inner_e;
    auto f = [&](double s, std::vector<double>& out) {
      x(level) = s;
      if (innermost) {
        const double w = std::exp(t_.log_density(x) - shift_);
        out.assign(2 * dim, 0.0);
        fill(x, w, out);
      } else {
        integrate(level + 1, x, inner_v, inner_e);
        out.resize(2 * dim);
        std::copy(inner_v.begin(), inner_v.end(), out.begin());
        std::copy(inner_e.begin(), inner_e.end(), out.begin() + static_cast<std::ptrdiff_t>(dim));
      }
    };
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      if (!(cuts[c + 1] > cuts[c])) continue;
      const gk::Result r = gk::integrate(f, cuts[c], cuts[c + 1], 2 * dim, dim, tol_);
      if (!r.converged) unconverged_ = true;
      for (std::size_t q = 0; q < dim; ++q) {
        value[q] += r.value[q];
        error[q] += std::min(r.error[q], r.absval[q]) + std::abs(r.value[dim + q]);
      }
    }
  }

  bool unconverged() const { return unconverged_; }

 private:
  void fill(const Vector& x, double w, std::vector<double>& out) const {
    const std::size_t n = static_cast<std::size_t>(n_);
    out[0] = w;
    for (std::size_t i = 0; i < n; ++i) out[1 + i] = w * x(static_cast<Eigen::Index>(i));
    out[n + 1] = box_.contains(x.data(), n) ? w : 0.0;
    out[n + 2] = w * std::pow(x.norm(), q_);
  }

  const Target& t_;
  const Box& box_;
  double q_;
  double shift_;
  double tol_;
  Eigen::Index n_;
  bool unconverged_ = false;
};

}  // namespace detail

inline constexpr Eigen::Index kQuadratureMaxDim = 3;

/// Ratio of posterior integrals for every g at once.
struct QuadratureAll {
  Vector mean;
  double probability = 0.0;  ///< of the box
  double norm_moment = 0.0;  ///< E |U_n|^q
  double denominator = 0.0;
  double relative_error = 0.0;
  double log_scale = 0.0;
  Vector mode;
};

inline QuadratureAll quadrature_all(const Target& target, const Box& box, double q = 1.0, double accept_tol = 1e-8) {
  target.validate();
  const Eigen::Index n = target.dim();
  if (n > kQuadratureMaxDim) {
    throw CapabilityError("tensor quadrature supports n <= " + std::to_string(kQuadratureMaxDim) + ", got n = " +
                          std::to_string(n));
  }
  if (n < 1) throw ParameterError("quadrature needs n >= 1");
  box.validate(static_cast<std::size_t>(n));
  QuadratureAll out;
  Vector mode = Vector::Zero(n);
  detail::maximize_tail(target, mode, 0);
  out.mode = mode;
  out.log_scale = target.log_density(mode);

  detail::NestedIntegrator integ(target, box, q, out.log_scale, 1e-11);
  Vector x = Vector::Zero(n);
  std::vector<double> v, e;
  integ.integrate(0, x, v, e);
  const double den = v[0];
  if (!(den > 0.0) || !std::isfinite(den)) throw NumericalError("posterior normalizer is not positive");
  double worst = 0.0;
  for (std::size_t c = 0; c < v.size(); ++c) {
    const double scale = std::max(den, std::abs(v[c]));
    worst = std::max(worst, e[c] / scale);
  }
  out.relative_error = worst;
  if (integ.unconverged() || worst > accept_tol) {
    std::ostringstream os;
    os << "quadrature did not reach tolerance " << accept_tol << " (achieved " << worst << ")";
    throw NumericalError(os.str());
  }
  out.denominator = den;
  out.mean.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.mean(i) = v[static_cast<std::size_t>(1 + i)] / den;
  out.probability = v[static_cast<std::size_t>(n) + 1] / den;
  out.norm_moment = v[static_cast<std::size_t>(n) + 2] / den;
  return out;
}

inline QuadratureResult quadrature_reconstructor(const Target& target, const GFunction& g) {
  const auto n = static_cast<std::size_t>(target.dim());
  const Box box = g.kind == GFunction::Kind::indicator ? g.box : Box::whole(n);
  const QuadratureAll all = quadrature_all(target, box, g.q);
  QuadratureResult r;
  r.denominator = all.denominator;
  r.relative_error = all.relative_error;
  r.log_scale = all.log_scale;
  r.mode = all.mode;
  switch (g.kind) {
    case GFunction::Kind::identity: r.value = all.mean; break;
    case GFunction::Kind::indicator: r.value = Vector::Constant(1, all.probability); break;
    case GFunction::Kind::norm_power: r.value = Vector::Constant(1, all.norm_moment); break;
  }
  return r;
}

inline QuadratureResult quadrature_reconstructor(const DiscretePosterior& post, const GFunction& g) {
  return quadrature_reconstructor(post.target(), g);
}

}  // namespace besov_invert
