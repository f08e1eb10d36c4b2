#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "besov_invert/besov.hpp"
#include "besov_invert/stats.hpp"

namespace bi = besov_invert;

namespace {

std::vector<double> random_coeffs(std::size_t n, std::uint64_t seed) {
  bi::Rng rng = bi::make_rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = normal(rng) / std::sqrt(static_cast<double>(i + 1));
  return c;
}

// Trapezoid rule for the integral of exp(-|x|^p) over the real line.
double normalization_oracle(double p) {
  const double h = 1e-4, L = 40.0;
  double acc = 0.5;  // x = 0 counted once, then both sides
  for (double x = h; x < L; x += h) acc += std::exp(-std::pow(x, p));
  return 1.0 / (2.0 * h * acc);
}

}  // namespace

TEST(BesovNorm, L1CaseHasUnitWeights) {
  const std::vector<double> c = {0.5, -1.0, 2.0, 0.0, -0.25, 3.0};
  EXPECT_DOUBLE_EQ(bi::besov_norm(c, {1.0, 1.0, 2}), 6.75);
}

TEST(BesovNorm, SingleEntryAtFour) {
  std::vector<double> c(8, 0.0);
  c[3] = 1.0;
  EXPECT_NEAR(bi::besov_norm(c, {1.0, 2.0, 1}), 4.0, 1e-15);
}

TEST(BesovNorm, ZeroField) {
  EXPECT_EQ(bi::besov_norm(std::vector<double>(32, 0.0), {1.0, 1.5, 1}), 0.0);
  EXPECT_EQ(bi::besov_norm(std::vector<double>(32, 0.0), {1.0, bi::kInfinity, 1}), 0.0);
}

TEST(BesovNorm, SupNorm) {
  std::vector<double> c = {1.0, 0.0, 0.0, 0.5};
  // sup ell^{s/d + 1/2} |c|: 1 and 4^{1.5} / 2 = 4
  EXPECT_NEAR(bi::besov_norm(c, {1.0, bi::kInfinity, 1}), 4.0, 1e-14);
}

TEST(BesovNorm, RejectsPBelowOne) {
  EXPECT_THROW(bi::besov_norm(std::vector<double>{1.0}, {1.0, 0.5, 1}), bi::ParameterError);
}

TEST(BesovNorm, RejectsNonFinite) {
  EXPECT_THROW(bi::besov_norm(std::vector<double>{1.0, NAN}, {1.0, 2.0, 1}), bi::NumericalError);
}

TEST(BesovNorm, SingleBasisFunction) {
  for (int d = 1; d <= 2; ++d) {
    for (double s : {-0.5, 0.0, 1.0, 2.5}) {
      for (double p : {1.0, 1.5, 2.0, 3.0}) {
        for (std::size_t ell : {1u, 2u, 7u, 100u, 513u}) {
          std::vector<double> c(600, 0.0);
          c[ell - 1] = 1.0;
          const double expected = std::pow(static_cast<double>(ell), s / d + 0.5 - 1.0 / p);
          EXPECT_NEAR(bi::besov_norm(c, {s, p, d}), expected, 1e-12 * expected);
        }
      }
    }
  }
}

TEST(BesovNorm, NormAxiomsOnRandomFields) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const bi::BesovParams bp{-1.0 + 0.1 * static_cast<double>(seed % 30), 1.0 + 0.25 * static_cast<double>(seed % 9),
                             static_cast<int>(1 + seed % 2)};
    const auto a = random_coeffs(256, 2 * seed), b = random_coeffs(256, 2 * seed + 1);
    const double na = bi::besov_norm(a, bp), nb = bi::besov_norm(b, bp);
    std::vector<double> sum(a.size()), scaled(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      sum[i] = a[i] + b[i];
      scaled[i] = -3.7 * a[i];
    }
    EXPECT_LE(bi::besov_norm(sum, bp), (na + nb) * (1.0 + 1e-12));
    EXPECT_NEAR(bi::besov_norm(scaled, bp), 3.7 * na, 1e-12 * 3.7 * na);
    EXPECT_GT(na, 0.0);
  }
}

TEST(BesovNorm, MatchesDirectSum) {
  const auto c = random_coeffs(64, 3);
  const bi::BesovParams bp{1.5, 1.7, 2};
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    acc += std::pow(static_cast<double>(i + 1), bp.p * bp.s / bp.d + bp.p / 2.0 - 1.0) * std::pow(std::abs(c[i]), bp.p);
  }
  EXPECT_NEAR(bi::besov_norm(c, bp), std::pow(acc, 1.0 / bp.p), 1e-12 * std::pow(acc, 1.0 / bp.p));
}

TEST(Embedding, Examples) {
  EXPECT_TRUE(bi::embedding_check({1.0, 1.0, 2}, {-1.0, 1.0, 2}));
  EXPECT_TRUE(bi::embedding_check({0.0, 2.0, 1}, {0.0, 1.0, 1}));
  EXPECT_FALSE(bi::embedding_check({0.0, 1.0, 1}, {1.0, 1.0, 1}));
  EXPECT_THROW(bi::embedding_check({0.0, 1.0, 1}, {0.0, 1.0, 2}), bi::ParameterError);
}

TEST(Embedding, NormMonotoneWhenIntegrabilityGrows) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> us(-1.0, 3.0), up(1.0, 4.0);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int d = 1 + trial % 2;
    bi::BesovParams a{us(gen), up(gen), d}, b{us(gen), up(gen), d};
    if (b.p < a.p) std::swap(a.p, b.p);
    if (!bi::embedding_check(a, b)) continue;
    ++checked;
    const auto c = random_coeffs(200, static_cast<std::uint64_t>(trial));
    EXPECT_LE(bi::besov_norm(c, b), bi::besov_norm(c, a) * (1.0 + 1e-12)) << "trial " << trial;
  }
  EXPECT_GT(checked, 50);
}

TEST(CoeffLaw, NormalizationConstants) {
  EXPECT_DOUBLE_EQ(bi::coeff_normalization(1.0), 0.5);
  EXPECT_NEAR(bi::coeff_normalization(2.0), 1.0 / std::sqrt(std::numbers::pi), 1e-15);
  for (double p : {1.0, 1.3, 2.0, 3.5}) EXPECT_NEAR(bi::coeff_normalization(p), normalization_oracle(p), 1e-6);
}

TEST(CoeffLaw, CdfAgreesWithDensity) {
  for (double p : {1.0, 1.5, 2.0}) {
    EXPECT_DOUBLE_EQ(bi::coeff_cdf(p, 0.0), 0.5);
    // midpoint integration of the density from 0 to 1.2
    const int m = 20000;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += bi::coeff_density(p, (i + 0.5) * 1.2 / m) * 1.2 / m;
    EXPECT_NEAR(bi::coeff_cdf(p, 1.2) - 0.5, acc, 1e-8);
    EXPECT_NEAR(bi::coeff_cdf(p, -1.2), 1.0 - bi::coeff_cdf(p, 1.2), 1e-15);
  }
}

TEST(CoeffLaw, SamplesAreCentred) {
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    bi::Rng rng = bi::make_rng(5, static_cast<std::uint64_t>(p * 10));
    std::vector<double> x(1000000);
    for (double& v : x) v = bi::sample_coeff(p, rng);
    EXPECT_LE(std::abs(bi::stats::mean(x)), 4.0 * bi::stats::standard_error(x)) << "p = " << p;
    if (p == 2.0) EXPECT_NEAR(bi::stats::variance(x), 0.5, 4.0 * 0.5 * std::sqrt(2.0 / 1e6));
    if (p == 1.0) EXPECT_NEAR(bi::stats::variance(x), 2.0, 0.02);
  }
}

TEST(CoeffLaw, RejectsInvalidP) {
  bi::Rng rng = bi::make_rng(1);
  EXPECT_THROW(bi::sample_coeff(0.9, rng), bi::ParameterError);
  EXPECT_THROW(bi::sample_coeff(bi::kInfinity, rng), bi::ParameterError);
}

TEST(MomentIdentity, Examples) {
  EXPECT_DOUBLE_EQ(bi::moment_identity(1.0, 0.5), 2.0);
  EXPECT_NEAR(bi::moment_identity(2.0, 0.5), std::numbers::sqrt2, 1e-15);
  EXPECT_NEAR(bi::moment_identity(1.5, 1e-12), 1.0, 1e-11);
}

TEST(MomentIdentity, RejectsKOutsideUnitInterval) {
  for (double k : {0.0, 1.0, 1.5, -0.1}) EXPECT_THROW(bi::moment_identity(1.0, k), bi::ParameterError);
}

TEST(MomentIdentity, FiniteVarianceRegimeByMonteCarlo) {
  // exp(k|X|^p) has finite variance for k < 1/2
  for (double p : {1.0, 2.0}) {
    for (double k : {0.1, 0.3}) {
      bi::Rng rng = bi::make_rng(11, static_cast<std::uint64_t>(100 * k + p));
      std::vector<double> y(400000);
      for (double& v : y) v = std::exp(k * std::pow(std::abs(bi::sample_coeff(p, rng)), p));
      const double z = (bi::stats::mean(y) - bi::moment_identity(p, k)) / bi::stats::standard_error(y);
      EXPECT_LE(std::abs(z), 4.0) << "p = " << p << " k = " << k;
    }
  }
}

TEST(BesovPrior, CoefficientVarianceDecay) {
  // s = 2, p = 2, d = 1: weight ell^{-(2 + 1/2 - 1/2)} = ell^{-2}, so var c_ell = ell^{-4} / 2
  bi::PriorSpec spec;
  spec.s = 2.0;
  spec.p = 2.0;
  spec.J = 3;
  const auto basis = bi::build_basis(1, 2, 3);
  const std::size_t draws = 100000;
  std::vector<std::vector<double>> cols(8, std::vector<double>(draws));
  for (std::size_t r = 0; r < draws; ++r) {
    spec.seed = r;
    const auto c = bi::sample_besov_prior(spec, basis);
    for (std::size_t l = 1; l <= 8; ++l) cols[l - 1][r] = c(l);
  }
  for (std::size_t l = 1; l <= 8; ++l) {
    const double expected = 0.5 * std::pow(static_cast<double>(l), -4.0);
    EXPECT_NEAR(bi::stats::variance(cols[l - 1]), expected, 4.0 * expected * std::sqrt(2.0 / draws)) << "ell " << l;
  }
}

TEST(BesovPrior, LaplaceCaseIsUndecayedInTwoDimensions) {
  bi::PriorSpec spec;
  spec.d = 2;
  spec.s = 1.0;
  spec.p = 1.0;
  EXPECT_DOUBLE_EQ(spec.decay_exponent(), 0.0);
}

TEST(BesovPrior, MarginalPassesKolmogorovSmirnov) {
  const auto basis = bi::build_basis(1, 2, 3);
  for (double p : {1.0, 1.5, 2.0}) {
    bi::PriorSpec spec;
    spec.s = 1.0;
    spec.p = p;
    spec.J = 3;
    const std::size_t ell = 6;
    const double w = std::pow(static_cast<double>(ell), spec.decay_exponent());
    std::vector<double> x(100000);
    for (std::size_t r = 0; r < x.size(); ++r) {
      spec.seed = 1000003 * r + 7;
      x[r] = bi::sample_besov_prior(spec, basis)(ell) / w;
    }
    const double D = bi::stats::ks_statistic(x, [p](double v) { return bi::coeff_cdf(p, v); });
    EXPECT_GT(bi::stats::ks_pvalue(D, x.size()), 1e-3) << "p = " << p;
  }
}

TEST(BesovPrior, DeterministicAndTruncated) {
  bi::PriorSpec spec;
  spec.seed = 99;
  spec.J = 2;
  spec.p = 1.5;
  const auto basis = bi::build_basis(1, 2, 4);
  const auto a = bi::sample_besov_prior(spec, basis), b = bi::sample_besov_prior(spec, basis);
  EXPECT_EQ(a.coeffs, b.coeffs);
  for (std::size_t l = 5; l <= 16; ++l) EXPECT_EQ(a(l), 0.0);
  spec.J = 5;
  EXPECT_THROW(bi::sample_besov_prior(spec, basis), bi::ParameterError);
}

TEST(BesovPrior, AlphaScaling) {
  bi::PriorSpec spec;
  spec.seed = 3;
  spec.J = 4;
  spec.p = 1.5;
  const auto basis = bi::build_basis(1, 2, 4);
  const auto a = bi::sample_besov_prior(spec, basis);
  spec.alpha = 8.0;
  const auto b = bi::sample_besov_prior(spec, basis);
  for (std::size_t l = 1; l <= 16; ++l) EXPECT_NEAR(b(l), a(l) * std::pow(8.0, -1.0 / 1.5), 1e-14);
}

TEST(GaussianPrior, ZeroFrequencyVariance) {
  EXPECT_DOUBLE_EQ(bi::gaussian_prior_hminus1_variance({0, 0}, 4.0), 0.25);
  EXPECT_DOUBLE_EQ(bi::gaussian_prior_l2_variance({0, 0}, 4.0), 0.25);
}

TEST(GaussianPrior, ModeVariancesByMonteCarlo) {
  const int lg = 4;
  const double alpha = 2.0;
  const bi::FourierOrdering ord(1, lg);
  const std::vector<std::size_t> ranks = {0, 1, 2, 5};
  std::vector<bi::GridField> modes;
  for (std::size_t r : ranks) modes.push_back(ord.basis_function(r));
  const std::size_t draws = 100000;
  std::vector<std::vector<double>> a(ranks.size(), std::vector<double>(draws));
  bi::PriorSpec spec;
  spec.kind = bi::PriorSpec::Kind::gaussian;
  spec.alpha = alpha;
  for (std::size_t r = 0; r < draws; ++r) {
    spec.seed = r;
    const auto u = bi::sample_gaussian_prior(spec, lg);
    for (std::size_t i = 0; i < ranks.size(); ++i) a[i][r] = bi::l2_inner(u, modes[i]);
  }
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const auto xi = ord.frequency(ranks[i]);
    const double v = bi::stats::variance(a[i]);
    const double expected = bi::gaussian_prior_l2_variance(xi, alpha);
    EXPECT_NEAR(v, expected, 4.0 * expected * std::sqrt(2.0 / draws));
    // pairing in H^{-1} against the H^{-1}-normalized mode
    const double w = bi::bessel_symbol(xi, -0.5);
    const double vh = bi::stats::variance(a[i]) * w * w;
    const double eh = bi::gaussian_prior_hminus1_variance(xi, alpha);
    EXPECT_NEAR(vh, eh, 4.0 * eh * std::sqrt(2.0 / draws));
    EXPECT_NEAR(eh, std::pow(1.0 + 4.0 * std::numbers::pi * std::numbers::pi * bi::frequency_norm2(xi), -2.0) / alpha, 1e-15);
  }
  // distinct modes uncorrelated
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double cov = 0.0;
      for (std::size_t r = 0; r < draws; ++r) cov += a[i][r] * a[j][r];
      cov /= static_cast<double>(draws);
      const double corr = cov / std::sqrt(bi::stats::variance(a[i]) * bi::stats::variance(a[j]));
      EXPECT_LE(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(draws)));
    }
  }
}

TEST(GaussianPrior, RejectsNonPositiveAlpha) {
  bi::PriorSpec spec;
  spec.kind = bi::PriorSpec::Kind::gaussian;
  spec.alpha = 0.0;
  EXPECT_THROW(bi::sample_gaussian_prior(spec, 4), bi::ParameterError);
}

TEST(GaussianPrior, RealValuedAndDeterministic) {
  bi::PriorSpec spec;
  spec.kind = bi::PriorSpec::Kind::gaussian;
  spec.d = 2;
  spec.seed = 12;
  const auto u = bi::sample_gaussian_prior(spec, 5), v = bi::sample_gaussian_prior(spec, 5);
  EXPECT_EQ(u.values, v.values);
  EXPECT_TRUE(bi::all_finite(u.values));
}

TEST(ThresholdProbe, ThreeRegimes) {
  const double s = 1.0, p = 1.0;
  const int d = 1;
  const auto below = bi::norm_threshold_probe(s, p, d, s - d / p - d, 4096, 200);
  EXPECT_TRUE(below.convergent);
  EXPECT_NEAR(below.predicted_exponent, -2.0, 1e-15);
  const auto at = bi::norm_threshold_probe(s, p, d, s - d / p, 4096, 200);
  EXPECT_FALSE(at.convergent);
  EXPECT_TRUE(at.marginal);
  EXPECT_NEAR(at.fitted_slope, -1.0, 0.15);
  const auto above = bi::norm_threshold_probe(s, p, d, s, 4096, 200);
  EXPECT_FALSE(above.convergent);
  EXPECT_EQ(above.verdict(), "divergent");
  EXPECT_GT(above.partial_sums.back(), at.partial_sums.back());
}

TEST(ThresholdProbe, TwoDimensionsAndOtherP) {
  const auto r = bi::norm_threshold_probe(2.0, 2.0, 2, 2.0 - 1.0 - 2.0, 4096, 100);
  EXPECT_TRUE(r.convergent);
  const auto m = bi::norm_threshold_probe(2.0, 2.0, 2, 1.0, 4096, 100);
  EXPECT_TRUE(m.marginal);
}
