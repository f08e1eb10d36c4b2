#pragma once

// Discrete posteriors on the n-dimensional coefficient space of U_n = T_n U.
//
// With Psi the grid samples of the first n unknown-basis functions, B = P_k A Psi
// and h = N^{-d}, every posterior here has the log-density
//   -1/2 x'Qx + b'x - sum_i lambda_i |x_i|^p + const,
// Q = G + P, G = h B'B / s^2, b = h B'm_k / s^2 (s the noise scale) and P the
// Gaussian prior precision (zero for Besov priors).

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "besov_invert/besov.hpp"
#include "besov_invert/errors.hpp"
#include "besov_invert/field.hpp"
#include "besov_invert/forward.hpp"
#include "besov_invert/linalg.hpp"
#include "besov_invert/projection.hpp"

namespace besov_invert {

/// How the data enter the likelihood. `projected` is the model M_kn with noise
/// P_k E and requires data in Ran(P_k); `full` keeps the full-grid white noise
/// and accepts any data field.
enum class NoiseModel { projected, full };

inline std::string to_string(NoiseModel m) { return m == NoiseModel::projected ? "projected" : "full"; }

/// Log-concave target -1/2 x'Qx + b'x - sum lambda_i |x_i|^p.
struct Target {
  Matrix Q;
  Vector b;
  Vector lambda;  ///< empty or zero for a Gaussian target
  double p = 1.0;

  Eigen::Index dim() const { return b.size(); }
  bool has_penalty() const { return lambda.size() > 0 && lambda.cwiseAbs().maxCoeff() > 0.0; }

  double log_density(const Vector& x) const {
    double v = -0.5 * x.dot(Q * x) + b.dot(x);
    if (lambda.size() > 0) {
      for (Eigen::Index i = 0; i < x.size(); ++i) v -= lambda(i) * std::pow(std::abs(x(i)), p);
    }
    return v;
  }

  void validate() const {
    if (Q.rows() != b.size() || Q.cols() != b.size()) throw ShapeError("target: Q and b sizes differ");
    if (lambda.size() != 0 && lambda.size() != b.size()) throw ShapeError("target: lambda size differs from b");
    if (!(p >= 1.0) || std::isinf(p)) throw ParameterError("target exponent must satisfy 1 <= p < inf");
    if (lambda.size() > 0 && lambda.minCoeff() < 0.0) throw ParameterError("penalty weights must be >= 0");
  }
};

struct PosteriorSpec {
  PriorSpec prior;
  ForwardSetup setup;
  double alpha = 1.0;
  std::size_t n = 1;
  std::size_t k = 0;  ///< 0 means the full grid
  Measurement data;
  BasisKind unknown_basis = BasisKind::fourier;
  NoiseModel noise_model = NoiseModel::projected;

  void validate() const {
    setup.validate();
    if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0, got " + std::to_string(alpha));
    if (n < 1) throw ParameterError("n must be >= 1");
    if (n > setup.grid_count()) {
      throw CapabilityError("n = " + std::to_string(n) + " exceeds the master grid dimension " +
                            std::to_string(setup.grid_count()));
    }
    if (k > setup.grid_count()) {
      throw CapabilityError("k = " + std::to_string(k) + " exceeds the master grid dimension " +
                            std::to_string(setup.grid_count()));
    }
    require_grid(data.data, setup);
    if (data.kind == Measurement::Kind::computational_mkn) {
      throw ConfigError("posterior data must be the practical measurement m_k, not a computational-model draw");
    }
    PriorSpec p = prior;
    p.alpha = alpha;
    p.d = setup.d;
    p.validate();
  }

  std::size_t measured() const { return k == 0 ? setup.grid_count() : k; }
};

class DiscretePosterior {
 public:
  explicit DiscretePosterior(const PosteriorSpec& spec)
      : spec_(spec), unknown_(spec.unknown_basis, spec.setup.d, spec.setup.grid_log2, spec.setup.wavelet_order) {
    spec.validate();
    const std::size_t n = spec.n, kk = spec.measured();
    const ProjectionFamily pk = spec.setup.projection_family();
    const GridField& m = spec.data.data;
    if (spec.noise_model == NoiseModel::projected) {
      const GridField back = pk.project(m, kk);
      double diff = 0.0, norm = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        diff += (back.values[i] - m.values[i]) * (back.values[i] - m.values[i]);
        norm += m.values[i] * m.values[i];
      }
      if (std::sqrt(diff) > 1e-12 * std::max(std::sqrt(norm), 1e-300)) {
        throw ConfigError("data are not in the range of P_k (reprojection changes them by " +
                          std::to_string(std::sqrt(diff / std::max(norm, 1e-300))) + " relative)");
      }
    }

    const std::size_t N = spec.setup.grid_count();
    const double h = 1.0 / static_cast<double>(N);
    basis_.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
    Matrix B(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
      const GridField psi = unknown_.basis_function(r);
      const GridField col = pk.project(apply_forward(psi, spec.setup), kk);
      for (std::size_t i = 0; i < N; ++i) {
        basis_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = psi.values[i];
        B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = col.values[i];
      }
    }
    noise_var_ = spec.setup.noise_scale > 0.0 ? spec.setup.noise_scale * spec.setup.noise_scale : 1.0;
    gram_ = (h / noise_var_) * (B.transpose() * B);
    gram_ = 0.5 * (gram_ + gram_.transpose());
    forward_ = std::move(B);
    rhs_ = rhs_for(m);

    target_.Q = gram_;
    target_.b = rhs_;
    if (spec.prior.kind == PriorSpec::Kind::gaussian) {
      target_.Q += spec.alpha * inverse_spd(prior_covariance());
      target_.p = 2.0;
    } else {
      target_.p = spec.prior.p;
      target_.lambda.resize(static_cast<Eigen::Index>(n));
      const double w = spec.prior.besov().weight_exponent();
      for (std::size_t r = 0; r < n; ++r) {
        target_.lambda(static_cast<Eigen::Index>(r)) = spec.alpha * std::pow(static_cast<double>(r + 1), w);
      }
    }
    target_.validate();
  }

  const PosteriorSpec& spec() const { return spec_; }
  const ProjectionFamily& unknown() const { return unknown_; }
  const Target& target() const { return target_; }
  const Matrix& gram() const { return gram_; }
  const Vector& rhs() const { return rhs_; }
  /// Grid samples of the unknown basis, one column per coefficient.
  const Matrix& basis_matrix() const { return basis_; }
  /// Grid samples of P_k A psi_r, one column per coefficient.
  const Matrix& forward_matrix() const { return forward_; }
  std::size_t n() const { return spec_.n; }

  /// h B' m / s^2 for another data field. Only the part of m in Ran(P_k) contributes.
  Vector rhs_for(const GridField& m) const {
    require_grid(m, spec_.setup);
    const Eigen::Map<const Vector> mv(m.values.data(), static_cast<Eigen::Index>(m.size()));
    return (forward_.transpose() * mv) / (static_cast<double>(m.size()) * noise_var_);
  }

  /// The same posterior with the data replaced.
  Target target_for(const GridField& m) const {
    Target t = target_;
    t.b = rhs_for(m);
    return t;
  }

  /// C_n = h Psi' (C Psi), C the L^2 covariance (I - Delta)^{-1} at alpha = 1.
  Matrix prior_covariance() const { return weighted_gram(-1.0); }

  /// L_n = h Psi' ((I - Delta) Psi).
  Matrix penalty_matrix() const { return weighted_gram(1.0); }

  GridField synthesize(const Vector& x) const {
    std::vector<double> c(x.data(), x.data() + x.size());
    return unknown_.synthesize(c);
  }

 private:
  Matrix weighted_gram(double power) const {
    const std::size_t n = spec_.n, N = spec_.setup.grid_count();
    Matrix W(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
      GridField psi(spec_.setup.d, spec_.setup.grid_log2);
      for (std::size_t i = 0; i < N; ++i) psi.values[i] = basis_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r));
      const GridField cp = apply_multiplier(psi, [power](const Frequency& xi) { return bessel_symbol(xi, power); });
      for (std::size_t i = 0; i < N; ++i) W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = cp.values[i];
    }
    Matrix M = (basis_.transpose() * W) / static_cast<double>(N);
    return 0.5 * (M + M.transpose());
  }

  PosteriorSpec spec_;
  ProjectionFamily unknown_;
  Target target_;
  Matrix gram_;
  Vector rhs_;
  Matrix basis_;
  Matrix forward_;
  double noise_var_ = 1.0;
};

struct Estimate {
  Vector coeffs;
  GridField field;
  SolveInfo solve;
};

/// Posterior mean of the Gaussian-prior posterior: (G + alpha C_n^{-1}) x = b.
inline Estimate gaussian_cm(const DiscretePosterior& post) {
  if (post.spec().prior.kind != PriorSpec::Kind::gaussian) throw ParameterError("gaussian_cm needs a gaussian prior");
  Estimate e;
  e.coeffs = solve_spd(post.target().Q, post.target().b, &e.solve);
  e.field = post.synthesize(e.coeffs);
  return e;
}

/// Minimizer of 1/2 ||P_k A u||^2 - <m_k, P_k A u> + alpha/2 <(I - Delta) u, u> over span(Psi).
inline Estimate tikhonov_solve(const DiscretePosterior& post) {
  const Matrix K = post.gram() + post.spec().alpha * post.penalty_matrix();
  Estimate e;
  e.coeffs = solve_spd(K, post.rhs(), &e.solve);
  e.field = post.synthesize(e.coeffs);
  return e;
}

}  // namespace besov_invert
