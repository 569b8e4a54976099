#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "truncem/truncem.hpp"

using namespace truncem;

namespace {

Problem problem_1d(double mu, TruncationSpec s) {
  return Problem(MixtureParams(Vec::Constant(1, mu), Mat::Constant(1, 1, 1.0)), std::move(s));
}

ScalarFn square() {
  return ScalarFn{[](double x) { return x * x; }, {}, [](double x) { return 2.0 * x; }};
}

}  // namespace

TEST(Rates, ContractionProfileOnHalfLine) {
  const Problem ctx = problem_1d(1.0, TruncationSpec::interval(0.5, kInf));
  const auto traj = run_em(Vec::Constant(1, 0.2), ctx);
  ASSERT_TRUE(traj.converged);
  EXPECT_TRUE(bracket_check(traj, 1.0));
  const auto rep = contraction_profile(traj, ctx);
  EXPECT_EQ(rep.label, LimitLabel::PlusMu);
  EXPECT_TRUE(rep.all_contracting());
  EXPECT_FALSE(rep.contraction_factors.empty());
  EXPECT_NEAR(rep.spectral_radius_at_limit, em_jacobian(ctx.mu(), ctx).spectral_radius, 1e-12);
  // late factors approach the local rate
  EXPECT_NEAR(rep.contraction_factors.back(), rep.spectral_radius_at_limit, 0.05);
}

TEST(Rates, BracketFailsWhenCrossingTheMean) {
  EMTrajectory traj;
  traj.states = {EMState{Vec::Constant(1, 0.5), 0}, EMState{Vec::Constant(1, 1.2), 1}};
  EXPECT_FALSE(bracket_check(traj, 1.0));
}

TEST(Rates, DenominatorIdentity) {
  for (const auto& s : {TruncationSpec::interval(0.5, kInf), TruncationSpec::soft_ramp(-1.0, 1.0),
                        TruncationSpec::union_of({TruncationSpec::interval(-2, -1), TruncationSpec::interval(0, 3)})})
    for (double xi : {-1.5, 0.0, 0.4, 2.0}) EXPECT_LT(denominator_identity_check(xi, problem_1d(1.3, s)).discrepancy, 1e-9);
}

TEST(Rates, NumeratorIsPositive) {
  const auto rep = numerator_bound_eval(0.5, problem_1d(1.0, TruncationSpec::interval(-0.3, 2.0)), 9);
  ASSERT_EQ(rep.values.size(), 9u);
  EXPECT_TRUE(rep.positive);
  EXPECT_GT(rep.minimum, 0.0);
  EXPECT_NEAR(rep.xi.front(), 0.5, 1e-15);
  EXPECT_NEAR(rep.xi.back(), 1.0, 1e-15);
}

TEST(Rates, SweepOverShrinkingIntervals) {
  const Problem base = problem_1d(1.0, TruncationSpec::none());
  std::vector<TruncationSpec> family;
  for (double w : {4.0, 2.0, 1.0, 0.5}) family.push_back(TruncationSpec::interval(-w, w));
  const auto sweep = local_rate_sweep(base, family);
  ASSERT_EQ(sweep.rows.size(), 4u);
  EXPECT_TRUE(sweep.all_contracting);
  EXPECT_TRUE(sweep.monotone);
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) EXPECT_LT(sweep.rows[i].alpha, sweep.rows[i - 1].alpha);
  const auto& first = sweep.rows.front();
  EXPECT_NEAR(first.fitted_c, (1.0 - first.radius_plus) / std::pow(first.alpha, 6), 1e-12);
}

TEST(Rates, FkgUniformSquareInstance) {
  // x ~ U[-1, 1], f = g = x^2, c = 1/2: Cov = 1/5 - 1/9; on the tail q = 1/2,
  // E[x^2 | tail] = 7/12, E[|x| | tail] = 3/4, prefactor 2 f'(c) g'(c) q^2 = 1/2
  FkgCheckSpec spec{square(), square(), 0.5, Density1D::uniform(-1.0, 1.0)};
  const auto rep = fkg_quantitative_check(spec);
  EXPECT_NEAR(rep.q, 0.5, 1e-14);
  EXPECT_NEAR(rep.lhs, 4.0 / 45.0, 1e-11);
  EXPECT_NEAR(rep.rhs_std, 0.5 * 7.0 / 12.0, 1e-11);
  EXPECT_NEAR(rep.rhs_folded, 0.5 * (7.0 / 12.0 - 9.0 / 16.0), 1e-11);
  EXPECT_FALSE(rep.holds_std);
  EXPECT_TRUE(rep.holds_folded);
  EXPECT_TRUE(rep.f_even);
  EXPECT_TRUE(rep.g_even);
}

TEST(Rates, FkgQuantitativeRejectsEmptyTail) {
  FkgCheckSpec spec{square(), square(), 2.0, Density1D::uniform(-1.0, 1.0)};
  EXPECT_THROW(fkg_quantitative_check(spec), InvalidArgument);
  spec.c = 0.0;
  EXPECT_THROW(fkg_quantitative_check(spec), InvalidArgument);
}

TEST(Rates, FkgMonotone) {
  const ScalarFn up{[](double x) { return std::tanh(x); }, {}, {}};
  const ScalarFn step{[](double x) { return x >= 0.3 ? 1.0 : 0.0; }, {0.3}, {}};
  const ScalarFn down{[](double x) { return -x * x * x; }, {}, {}};
  const auto dist = Density1D::normal(0.2, 1.1);
  EXPECT_TRUE(fkg_monotone_check(up, step, dist));
  const auto rep = fkg_monotone_report(up, down, dist);
  EXPECT_LT(rep.e_fg, rep.e_f * rep.e_g);
  EXPECT_FALSE(rep.holds);
}

TEST(Rates, DefaultFkgConstant) {
  for (double alpha : {0.1, 0.5, 1.0}) {
    const double c = default_fkg_c(alpha, 2.0);
    EXPECT_NEAR(2.0 * oracle::phi_cdf(c / 2.0) - 1.0, alpha / 2.0, 1e-13);
  }
  EXPECT_THROW(default_fkg_c(0.0, 1.0), InvalidArgument);
}

TEST(Rates, NumeratorSpecUsesFoldedWeight) {
  const Problem ctx = problem_1d(1.0, TruncationSpec::interval(0.5, kInf));
  const auto spec = numerator_fkg_spec(ctx, 0.4, 0.7);
  const double w = spec.distribution.pdf(-1.0), v = spec.distribution.pdf(1.0);
  EXPECT_NEAR(w, 0.5 * std::exp(-0.5 * 1.7 * 1.7), 1e-15);
  EXPECT_NEAR(v, 0.5 * std::exp(-0.5 * 0.3 * 0.3), 1e-15);
  EXPECT_NEAR(spec.f(2.0), 2.0 * std::tanh(0.8), 1e-15);
}
