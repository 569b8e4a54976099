#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "truncem/truncem.hpp"

using namespace truncem;

namespace {

Problem untruncated_1d(double mu = 1.0, double var = 1.0) {
  return Problem(MixtureParams(Vec::Constant(1, mu), Mat::Constant(1, 1, var)), TruncationSpec::none());
}

double b_simpson(double lambda, double mu) {
  return oracle::truncated_expectation_1d([&](double x) { return x * std::tanh(lambda * x); }, mu, 1.0,
                                          [](double) { return 1.0; }, {}, 8000);
}

}  // namespace

TEST(Analysis, CrossDerivativeInMeanAgainstFiniteDifference) {
  const double d = d_cross_moment_mu(Vec::Constant(1, 1.0), untruncated_1d()).value(0, 0);
  const double h = 1e-4;
  const double fd = (b_simpson(1.0, 1.0 + h) - b_simpson(1.0, 1.0 - h)) / (2.0 * h);
  EXPECT_NEAR(d, fd, 1e-7);
  EXPECT_NEAR(d, 0.7339116723954466, 1e-10);
}

TEST(Analysis, UntruncatedJacobianAtMean) {
  const auto rep = em_jacobian(Vec::Constant(1, 1.0), untruncated_1d());
  const double ref = oracle::truncated_expectation_1d(
      [](double x) { return x * x / (std::cosh(x) * std::cosh(x)); }, 1.0, 1.0, [](double) { return 1.0; }, {}, 8000);
  EXPECT_NEAR(rep.matrix(0, 0), ref, 1e-9);
  EXPECT_NEAR(rep.matrix(0, 0), 0.2660883276045566, 1e-10);
  EXPECT_EQ(rep.classification, Stability::Attracting);
}

TEST(Analysis, UntruncatedJacobianAtZero) {
  for (double mu : {0.5, 1.5}) {
    for (double var : {0.6, 2.0}) {
      const auto rep = em_jacobian(Vec::Zero(1), untruncated_1d(mu, var));
      EXPECT_NEAR(rep.spectral_radius, 1.0 + mu * mu / var, 1e-8);
      EXPECT_EQ(rep.classification, Stability::Repelling);
    }
  }
}

TEST(Analysis, FormulasMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  for (int d = 1; d <= 2; ++d) {
    for (int i = 0; i < 3; ++i) {
      const Problem ctx = gen::truncated_problem(rng, d);
      Vec lam(d);
      for (int j = 0; j < d; ++j) lam(j) = gen::uniform(rng, -2.0, 2.0);
      EXPECT_LT(derivative_fd_check(lam, ctx).worst(), 1e-4);
    }
  }
}

TEST(Analysis, JacobianSpectrumIsRealPositive) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 4; ++i) {
    const Problem ctx = gen::truncated_problem(rng, 2);
    const auto rep = em_jacobian(Vec(0.6 * ctx.mu()), ctx);
    for (Eigen::Index k = 0; k < rep.eigenvalues.size(); ++k) {
      EXPECT_GT(rep.eigenvalues(k).real(), 0.0);
      EXPECT_EQ(rep.eigenvalues(k).imag(), 0.0);
    }
    Eigen::EigenSolver<Mat> es(rep.matrix);
    const double direct = es.eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_NEAR(direct, rep.spectral_radius, 1e-9 * (1.0 + direct));
  }
}

TEST(Analysis, JacobianAtFixedPointMatchesStepDifferences) {
  const Problem ctx(MixtureParams(Vec{{1.0, 0.4}}, Mat{{1.0, 0.3}, {0.3, 0.7}}),
                    TruncationSpec::box({{-0.2, kInf}, {-1.0, 2.0}}));
  const Vec g = ctx.mu();
  const auto rep = em_jacobian(g, ctx);
  const Mat fd = finite_diff_jacobian([&](const Vec& l) { return em_step(l, ctx); }, g, 1e-4);
  EXPECT_LT((rep.matrix - fd).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Analysis, Classification) {
  EXPECT_EQ(classify(CVec::Constant(2, {0.5, 0.0}), 1e-6), Stability::Attracting);
  CVec mixed(2);
  mixed << std::complex<double>(0.5, 0.0), std::complex<double>(1.5, 0.0);
  EXPECT_EQ(classify(mixed, 1e-6), Stability::Saddle);
  EXPECT_EQ(classify(CVec::Constant(1, {1.0 + 1e-8, 0.0}), 1e-6), Stability::Marginal);
  EXPECT_EQ(classify(CVec::Constant(1, {2.0, 0.0}), 1e-6), Stability::Repelling);
}

TEST(Analysis, ProductOfDefiniteMatrices) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 10; ++i)
    EXPECT_TRUE(pd_product_spectrum_check(random_spd(3, rng, 0.1, 5.0), random_spd(3, rng, 0.1, 5.0)));
  EXPECT_THROW(pd_product_spectrum_check(Mat{{1.0, 2.0}, {2.0, 1.0}}, Mat::Identity(2, 2)), NotPositiveDefinite);
}
