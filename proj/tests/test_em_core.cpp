#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "truncem/truncem.hpp"

using namespace truncem;

namespace {

Problem halfline() {
  return Problem(MixtureParams(Vec::Constant(1, 1.0), Mat::Constant(1, 1, 1.0)), TruncationSpec::interval(0.5, kInf));
}

Problem untruncated_1d() {
  return Problem(MixtureParams(Vec::Constant(1, 1.0), Mat::Constant(1, 1, 1.0)), TruncationSpec::none());
}

auto on_halfline = [](double x) { return x >= 0.5 ? 1.0 : 0.0; };
auto everywhere = [](double) { return 1.0; };

}  // namespace

TEST(EmCore, TargetMomentMatchesSimpson) {
  const double b = target_moment(Vec::Constant(1, 0.5), halfline()).value(0);
  const double ref = oracle::truncated_expectation_1d([](double x) { return x * std::tanh(0.5 * x); }, 1.0, 1.0,
                                                      on_halfline, {0.5});
  EXPECT_NEAR(b, ref, 1e-10);
  EXPECT_NEAR(b, 0.9751396853914648, 1e-12);
}

TEST(EmCore, SelfMomentMatchesSimpson) {
  const double h = self_moment(Vec::Constant(1, 0.7), halfline()).value(0);
  const double ref = oracle::truncated_expectation_1d([](double x) { return x * std::tanh(0.7 * x); }, 0.7, 1.0,
                                                      on_halfline, {0.5});
  EXPECT_NEAR(h, ref, 1e-10);
  EXPECT_NEAR(h, 0.9835205375989337, 1e-12);
}

TEST(EmCore, UntruncatedStepIsTargetMoment) {
  const double step = em_step(Vec::Constant(1, 0.5), untruncated_1d())(0);
  const double ref = oracle::truncated_expectation_1d([](double x) { return x * std::tanh(0.5 * x); }, 1.0, 1.0,
                                                      everywhere, {});
  EXPECT_NEAR(step, ref, 1e-9);
  EXPECT_NEAR(step, 0.7493561006170973, 1e-10);
}

TEST(EmCore, UntruncatedSelfMomentIsIdentity) {
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 3; ++d) {
    const Problem ctx(gen::params_nd(rng, d), TruncationSpec::none());
    Vec lam(d);
    for (int i = 0; i < d; ++i) lam(i) = gen::uniform(rng, -2.0, 2.0);
    EXPECT_LT((self_moment(lam, ctx).value - lam).norm(), 1e-9 * lam.norm()) << "d = " << d;
  }
}

TEST(EmCore, StepSolvesSelfMomentEquation) {
  const Problem ctx = halfline();
  const Vec lt = Vec::Constant(1, 0.3);
  const auto info = em_step_detail(lt, ctx, 1e-10);
  const double b = target_moment(lt, ctx).value(0);
  EXPECT_NEAR(self_moment(info.lambda, ctx).value(0), b, 1e-9);
  EXPECT_LE(info.residual, 1e-10 * std::max(1.0, std::abs(b)));
}

TEST(EmCore, CanonicalPointsAreFixed) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 6; ++i) {
    const Problem ctx = gen::truncated_problem(rng, 1 + i % 2);
    for (const Vec& p : {Vec(ctx.mu()), Vec(-ctx.mu()), Vec(Vec::Zero(ctx.dim()))}) {
      const auto r = fixed_point_residual(p, ctx);
      EXPECT_LE(r.value, 10.0 * r.error_estimate + 1e-12);
    }
  }
}

TEST(EmCore, RunFromMeanStopsImmediately) {
  const Problem ctx = halfline();
  const auto traj = run_em(ctx.mu(), ctx);
  EXPECT_TRUE(traj.converged);
  EXPECT_EQ(traj.iterations(), 0);
  EXPECT_EQ(traj.label, LimitLabel::PlusMu);
}

TEST(EmCore, RunFromZeroStaysAtZero) {
  const auto traj = run_em(Vec::Zero(1), halfline());
  EXPECT_TRUE(traj.converged);
  EXPECT_EQ(traj.label, LimitLabel::Zero);
}

TEST(EmCore, RunConvergesBySign) {
  const Problem ctx = halfline();
  const auto pos = run_em(Vec::Constant(1, 0.05), ctx);
  EXPECT_EQ(pos.label, LimitLabel::PlusMu);
  EXPECT_NEAR(pos.final_lambda()(0), 1.0, 1e-6);
  const auto neg = run_em(Vec::Constant(1, -3.0), ctx);
  EXPECT_EQ(neg.label, LimitLabel::MinusMu);
  for (std::size_t i = 1; i < pos.states.size(); ++i) EXPECT_GT(pos.states[i].step_norm, 0.0);
}

TEST(EmCore, RunIsDeterministic) {
  const Problem ctx(MixtureParams(Vec{{1.0, 0.5}}, Mat{{1.0, 0.3}, {0.3, 1.0}}),
                    TruncationSpec::half_space(Vec{{1.0, -0.5}}, 0.2));
  const auto a = run_em(Vec{{0.3, -0.2}}, ctx), b = run_em(Vec{{0.3, -0.2}}, ctx);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_EQ(a.states[i].lambda, b.states[i].lambda);
}

TEST(EmCore, LabelUsesWhitenedDistance) {
  const Problem ctx(MixtureParams(Vec{{2.0, 0.0}}, Mat{{4.0, 0.0}, {0.0, 0.01}}), TruncationSpec::none());
  EXPECT_EQ(label_point(Vec{{2.5, 0.0}}, ctx, 0.3), LimitLabel::PlusMu);
  EXPECT_EQ(label_point(Vec{{2.0, 0.05}}, ctx, 0.3), LimitLabel::Other);
}

TEST(EmCore, RejectsBadInput) {
  const Problem ctx = halfline();
  EXPECT_THROW(em_step(Vec::Zero(2), ctx), DimensionMismatch);
  EXPECT_THROW(run_em(Vec::Constant(1, NAN), ctx), InvalidArgument);
  EXPECT_THROW(run_em(Vec::Constant(1, 0.5), ctx, 0.0, 10), InvalidArgument);
  EXPECT_THROW(Problem(MixtureParams(Vec::Ones(2), Mat::Identity(2, 2)), TruncationSpec::interval(0, 1)),
               DimensionMismatch);
}
