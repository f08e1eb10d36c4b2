#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "instances.hpp"

namespace bi = besov_invert;
using testing_support::mh_step;
using testing_support::random_gaussian_instance;
using testing_support::small_besov_spec;

namespace {

bi::Target scalar_target(double Q, double b, double lambda = 0.0, double p = 1.0) {
  bi::Target t;
  t.Q = bi::Matrix::Constant(1, 1, Q);
  t.b = bi::Vector::Constant(1, b);
  if (lambda > 0.0) t.lambda = bi::Vector::Constant(1, lambda);
  t.p = p;
  return t;
}

bi::Target random_target(Eigen::Index n, std::uint64_t seed, double lambda, double p) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  bi::Matrix R(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) R(i, j) = normal(gen);
  bi::Target t;
  t.Q = 0.5 * R * R.transpose() / static_cast<double>(n) + bi::Matrix::Identity(n, n);
  t.b.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) t.b(i) = normal(gen);
  if (lambda > 0.0) t.lambda = bi::Vector::Constant(n, lambda);
  t.p = p;
  return t;
}

bi::ChainOptions chain_opts(std::size_t iters, std::uint64_t seed) {
  bi::ChainOptions o;
  o.iters = iters;
  o.seed = seed;
  return o;
}

// Trapezoid CDF of exp(-a x^2 / 2 + beta x - lambda |x|) on a fine grid.
double numeric_conditional_cdf(double a, double beta, double lambda, double x) {
  auto f = [&](double t) { return std::exp(-0.5 * a * t * t + beta * t - lambda * std::abs(t)); };
  // composite Simpson on a piece with no kink inside
  auto simpson = [&](double l, double r) {
    if (r <= l) return 0.0;
    const int n = 200000;
    const double h = (r - l) / n;
    double acc = f(l) + f(r);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(l + i * h);
    return acc * h / 3.0;
  };
  const double lo = -60.0, hi = 60.0;
  const double total = simpson(lo, 0.0) + simpson(0.0, hi);
  const double below = x < 0.0 ? simpson(lo, x) : simpson(lo, 0.0) + simpson(0.0, x);
  return below / total;
}

}  // namespace

TEST(GaussianSolve, ScalarConjugate) {
  // a = 1, alpha = 1, m = 2: mean a m / (a^2 + alpha) = 1
  EXPECT_NEAR(bi::solve_spd(scalar_target(2.0, 2.0).Q, scalar_target(2.0, 2.0).b)(0), 1.0, 1e-15);
  EXPECT_EQ(bi::solve_spd(scalar_target(2.0, 0.0).Q, scalar_target(2.0, 0.0).b)(0), 0.0);
}

TEST(GaussianSolve, ZeroDataGivesZero) {
  auto inst = random_gaussian_instance(1, 6, 32, 3);
  for (double& v : inst.spec.data.data.values) v = 0.0;
  const bi::DiscretePosterior post(inst.spec);
  EXPECT_EQ(bi::gaussian_cm(post).coeffs.norm(), 0.0);
}

TEST(GaussianSolve, ConditionalMeanEqualsTikhonov) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int d = 1 + static_cast<int>(seed % 2);
    const auto inst = random_gaussian_instance(d, d == 1 ? 6 : 3, 40, seed);
    const bi::DiscretePosterior post(inst.spec);
    const auto cm = bi::gaussian_cm(post), tk = bi::tikhonov_solve(post);
    EXPECT_LE((cm.coeffs - tk.coeffs).norm(), 1e-10 * cm.coeffs.norm()) << "seed " << seed;
    EXPECT_LT(cm.solve.relative_residual, 1e-10);
  }
}

TEST(GaussianSolve, NormShrinksWithAlpha) {
  auto inst = random_gaussian_instance(1, 5, 24, 5);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {1.0, 10.0, 100.0}) {
    inst.spec.alpha = alpha;
    const double norm = bi::tikhonov_solve(bi::DiscretePosterior(inst.spec)).coeffs.norm();
    EXPECT_LT(norm, prev) << "alpha " << alpha;
    prev = norm;
  }
}

TEST(GaussianSolve, CleanDataRecovery) {
  bi::PosteriorSpec s;
  s.setup.d = 1;
  s.setup.grid_log2 = 5;
  s.setup.sigma = 0.02;
  s.setup.noise_scale = 0.0;
  s.prior.kind = bi::PriorSpec::Kind::gaussian;
  s.alpha = 1e-12;
  s.n = 32;
  s.k = 0;
  const bi::ProjectionFamily unknown(bi::BasisKind::fourier, 1, 5);
  const auto u = bi::smooth_bumps(1, 5);
  s.data = bi::synthesize_all(u, s.setup, 32, 32, unknown, 1).mk;
  const auto est = bi::gaussian_cm(bi::DiscretePosterior(s));
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(est.field.values[i] - u.values[i]));
  EXPECT_LT(err, 1e-4);
}

TEST(GaussianSolve, ProjectionInvarianceOfLikelihood) {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const auto inst = random_gaussian_instance(1, 6, 32, seed);
    const bi::DiscretePosterior post(inst.spec);
    const auto pk = inst.spec.setup.projection_family();
    bi::GridField r(1, 6);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    for (double& v : r.values) v = 10.0 * normal(gen);
    const auto pr = pk.project(r, inst.spec.measured());
    bi::GridField perturbed = inst.spec.data.data;
    for (std::size_t i = 0; i < r.size(); ++i) perturbed.values[i] += r.values[i] - pr.values[i];
    const bi::Vector b0 = post.rhs_for(inst.spec.data.data), b1 = post.rhs_for(perturbed);
    EXPECT_LE((b1 - b0).norm(), 1e-12 * std::max(1.0, b0.norm()));
  }
}

TEST(GaussianSolve, RejectsIncompatibleData) {
  auto inst = random_gaussian_instance(1, 6, 32, 7);
  inst.spec.data.kind = bi::Measurement::Kind::computational_mkn;
  EXPECT_THROW(bi::DiscretePosterior{inst.spec}, bi::ConfigError);
  inst.spec.data.kind = bi::Measurement::Kind::practical_mk;
  inst.spec.k = 4;
  inst.spec.setup.k = 4;
  inst.spec.data.data.values[5] += 1.0;
  EXPECT_THROW(bi::DiscretePosterior{inst.spec}, bi::ConfigError);
  inst.spec.noise_model = bi::NoiseModel::full;
  EXPECT_NO_THROW(bi::DiscretePosterior{inst.spec});
}

TEST(GaussianSolve, RejectsBadParameters) {
  auto inst = random_gaussian_instance(1, 5, 16, 8);
  inst.spec.alpha = 0.0;
  EXPECT_THROW(bi::DiscretePosterior{inst.spec}, bi::ParameterError);
  inst.spec.alpha = 1.0;
  inst.spec.n = 33;
  EXPECT_THROW(bi::DiscretePosterior{inst.spec}, bi::CapabilityError);
}

TEST(Quadrature, LaplaceWithZeroData) {
  const auto r = bi::quadrature_reconstructor(scalar_target(1.0, 0.0, 1.0, 1.0), bi::GFunction::identity());
  EXPECT_NEAR(r.value(0), 0.0, 1e-12);
}

TEST(Quadrature, GaussianMatchesClosedForm) {
  for (double b : {-3.0, 0.4, 2.0}) {
    const auto t = scalar_target(1.7, b);
    EXPECT_NEAR(bi::quadrature_reconstructor(t, bi::GFunction::identity()).value(0), b / 1.7, 1e-8);
    // second moment
    EXPECT_NEAR(bi::quadrature_reconstructor(t, bi::GFunction::norm_power(2.0)).value(0), b * b / 2.89 + 1.0 / 1.7,
                1e-8);
  }
  for (Eigen::Index n = 2; n <= 3; ++n) {
    const auto t = random_target(n, static_cast<std::uint64_t>(n), 0.0, 1.0);
    const bi::Vector exact = t.Q.ldlt().solve(t.b);
    EXPECT_LE((bi::quadrature_reconstructor(t, bi::GFunction::identity()).value - exact).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Quadrature, WholeSpaceIndicatorIsOne) {
  const auto t = random_target(2, 4, 0.8, 1.0);
  const auto r = bi::quadrature_reconstructor(t, bi::GFunction::indicator(bi::Box::whole(2)));
  EXPECT_NEAR(r.value(0), 1.0, 1e-12);
}

TEST(Quadrature, HalfLineProbabilityOfGaussian) {
  const auto t = scalar_target(4.0, 2.0);  // N(0.5, 1/4)
  bi::Box box{{0.0}, {std::numeric_limits<double>::infinity()}};
  const auto r = bi::quadrature_reconstructor(t, bi::GFunction::indicator(box));
  EXPECT_NEAR(r.value(0), bi::stats::normal_cdf(1.0), 1e-8);
}

TEST(Quadrature, TooManyDimensions) {
  EXPECT_THROW(bi::quadrature_reconstructor(random_target(4, 1, 1.0, 1.0), bi::GFunction::identity()),
               bi::CapabilityError);
}

TEST(GibbsConditional, CdfMatchesNumericIntegration) {
  const double cases[][3] = {{1.0, 0.3, 1.0}, {4.0, -2.0, 0.5}, {0.5, 3.0, 2.0}, {0.0, 0.2, 1.0}, {9.0, 0.0, 5.0}};
  for (const auto& c : cases) {
    for (double x : {-2.0, -0.3, 0.0, 0.1, 0.9, 2.5}) {
      EXPECT_NEAR(bi::l1_conditional_cdf(c[0], c[1], c[2], x), numeric_conditional_cdf(c[0], c[1], c[2], x), 1e-6)
          << c[0] << " " << c[1] << " " << c[2] << " x=" << x;
    }
  }
}

TEST(GibbsConditional, ExactSamplerKolmogorovDistance) {
  const double cases[][3] = {{1.0, 0.3, 1.0}, {4.0, -2.0, 0.5}, {0.0, 0.2, 1.0}, {25.0, 40.0, 1.0}};
  for (const auto& c : cases) {
    bi::Rng rng = bi::make_rng(31, static_cast<std::uint64_t>(c[0] * 7 + c[1] * 3));
    std::vector<double> x(1000000);
    for (double& v : x) v = bi::sample_l1_conditional(c[0], c[1], c[2], rng);
    const double D = bi::stats::ks_statistic(x, [&](double v) { return bi::l1_conditional_cdf(c[0], c[1], c[2], v); });
    EXPECT_LT(D, 0.002) << c[0] << " " << c[1] << " " << c[2];
  }
}

TEST(Gibbs, WithoutPenaltyMatchesGaussian) {
  const auto t = random_target(3, 11, 0.0, 1.0);
  const auto chain = bi::gibbs_l1(t, chain_opts(60000, 4));
  const bi::Vector exact = t.Q.ldlt().solve(t.b);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LE(std::abs(chain.mean(i) - exact(i)), 3.0 * chain.mcse(i)) << i;
}

TEST(Gibbs, AgreesWithQuadrature) {
  for (std::size_t n = 1; n <= 3; ++n) {
    const bi::DiscretePosterior post(small_besov_spec(n, 1.0, 100 + n));
    const auto q = bi::quadrature_reconstructor(post, bi::GFunction::identity());
    const auto chain = bi::gibbs_l1(post.target(), chain_opts(80000, 9 + n));
    for (Eigen::Index i = 0; i < post.target().dim(); ++i) {
      EXPECT_LE(std::abs(chain.mean(i) - q.value(i)), 3.0 * chain.mcse(i)) << "n = " << n << " coord " << i;
    }
  }
}

TEST(Gibbs, SymmetricDataGivesCentredMeans) {
  auto t = random_target(3, 12, 1.5, 1.0);
  t.b.setZero();
  const auto chain = bi::gibbs_l1(t, chain_opts(40000, 5));
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LE(std::abs(chain.mean(i)), 3.0 * chain.mcse(i));
}

TEST(Gibbs, AnnihilatedCoordinateIsLaplace) {
  bi::Target t;
  t.Q = bi::Matrix::Zero(1, 1);
  t.b = bi::Vector::Constant(1, 0.5);
  t.lambda = bi::Vector::Constant(1, 2.0);
  const auto chain = bi::gibbs_l1(t, chain_opts(200000, 6));
  // density prop. to exp(0.5 x - 2|x|): rates 1.5 right, 2.5 left
  const double w_pos = 2.5 / 4.0;
  const double mean = w_pos / 1.5 - (1.0 - w_pos) / 2.5;
  EXPECT_LE(std::abs(chain.mean(0) - mean), 3.0 * chain.mcse(0));
}

TEST(Gibbs, ReproducibleAndRejectsOtherP) {
  const auto t = random_target(2, 13, 1.0, 1.0);
  EXPECT_EQ(bi::gibbs_l1(t, chain_opts(2000, 3)).samples, bi::gibbs_l1(t, chain_opts(2000, 3)).samples);
  EXPECT_THROW(bi::gibbs_l1(random_target(2, 13, 1.0, 1.5), chain_opts(100, 1)), bi::ParameterError);
}

TEST(Metropolis, QuadraticPenaltyMatchesGaussian) {
  const auto t = random_target(2, 14, 0.7, 2.0);
  bi::Matrix Qe = t.Q;
  Qe.diagonal().array() += 2.0 * 0.7;
  const bi::Vector exact = Qe.ldlt().solve(t.b);
  auto o = chain_opts(300000, 8);
  o.proposal_scale = mh_step(t);
  const auto chain = bi::mh_fallback(t, o);
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_LE(std::abs(chain.mean(i) - exact(i)), 3.0 * chain.mcse(i)) << i;
}

TEST(Metropolis, AgreesWithGibbs) {
  const auto t = random_target(2, 15, 1.2, 1.0);
  auto o = chain_opts(300000, 10);
  o.proposal_scale = mh_step(t);
  const auto mh = bi::mh_fallback(t, o);
  const auto gb = bi::gibbs_l1(t, chain_opts(60000, 11));
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double se = std::hypot(mh.mcse(i), gb.mcse(i));
    EXPECT_LE(std::abs(mh.mean(i) - gb.mean(i)), 3.0 * se) << i;
  }
}

TEST(Metropolis, SmallStepsAreAccepted) {
  const auto t = random_target(3, 16, 1.0, 1.5);
  auto o = chain_opts(5000, 2);
  o.proposal_scale = 1e-5;
  EXPECT_GT(bi::mh_fallback(t, o).acceptance, 0.999);
  o.proposal_scale = 1e-2;
  const double mid = bi::mh_fallback(t, o).acceptance;
  o.proposal_scale = 1.0;
  EXPECT_LT(bi::mh_fallback(t, o).acceptance, mid);
}

TEST(Metropolis, WarnsWhenNothingIsAccepted) {
  auto t = random_target(3, 17, 1.0, 1.5);
  t.b *= 0.0;
  auto o = chain_opts(5000, 2);
  o.proposal_scale = 1e4;
  const auto chain = bi::mh_fallback(t, o);
  ASSERT_FALSE(chain.warnings.empty());
  EXPECT_NE(chain.warnings[0].find("no proposal accepted"), std::string::npos);
}

TEST(ChainSummary, MeanAndQuantiles) {
  const auto t = random_target(3, 18, 0.5, 1.0);
  auto o = chain_opts(7000, 12);
  o.thin = 3;
  o.burn_in = 1000;
  const auto chain = bi::gibbs_l1(t, o);
  EXPECT_EQ(chain.size(), 2000);
  EXPECT_EQ(chain.burn_in, 1000u);
  EXPECT_EQ(chain.thin, 3u);
  const bi::Vector direct = chain.samples.colwise().mean().transpose();
  EXPECT_LE((direct - chain.mean).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_LE(chain.lo(i), chain.hi(i));
    EXPECT_GT(chain.ess(i), 0.0);
  }
}

TEST(ChainSummary, EffectiveSampleSizeOfAr1) {
  const double phi = 0.8;
  const Eigen::Index m = 200000;
  bi::Vector x(m);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  x(0) = normal(gen);
  for (Eigen::Index i = 1; i < m; ++i) x(i) = phi * x(i - 1) + std::sqrt(1 - phi * phi) * normal(gen);
  const double expected = static_cast<double>(m) * (1 - phi) / (1 + phi);
  EXPECT_NEAR(bi::effective_sample_size(x), expected, 0.1 * expected);
  for (Eigen::Index i = 0; i < m; ++i) x(i) = normal(gen);
  EXPECT_NEAR(bi::effective_sample_size(x), static_cast<double>(m), 0.1 * static_cast<double>(m));
}

TEST(ChainSummary, PooledChains) {
  const auto t = random_target(2, 19, 1.0, 1.0);
  const auto one = bi::gibbs_l1(t, chain_opts(5000, 4));
  const auto pooled = bi::run_chains(t, bi::SamplerKind::gibbs, chain_opts(5000, 4), 3);
  EXPECT_EQ(pooled.size(), 3 * one.size());
  EXPECT_EQ(pooled.chains, 3u);
  EXPECT_EQ(bi::run_chains(t, bi::SamplerKind::gibbs, chain_opts(5000, 4), 3).samples, pooled.samples);
}

TEST(Probability, BoxesOnChains) {
  const auto t = scalar_target(1.0, 0.0, 1.0, 1.0);
  const auto chain = bi::gibbs_l1(t, chain_opts(50000, 21));
  EXPECT_EQ(bi::posterior_probability(chain, bi::Box::whole(1)).probability, 1.0);
  const double inf = std::numeric_limits<double>::infinity();
  const auto pos = bi::posterior_probability(chain, {{0.0}, {inf}});
  const auto neg = bi::posterior_probability(chain, {{-inf}, {std::nextafter(0.0, -1.0)}});
  EXPECT_NEAR(pos.probability + neg.probability, 1.0, 1e-15);
  EXPECT_LE(std::abs(pos.probability - 0.5), 3.0 * pos.standard_error);
  bi::ChainResult empty;
  EXPECT_THROW(bi::posterior_probability(empty, bi::Box::whole(0)), bi::NumericalError);
  EXPECT_THROW(bi::posterior_probability(chain, bi::Box::whole(2)), bi::ShapeError);
}
