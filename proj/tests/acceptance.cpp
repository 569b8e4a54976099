// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "truncem/truncem.hpp"

using namespace truncem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Problem problem_1d(double mu, double var, TruncationSpec s) {
  return Problem(MixtureParams(Vec::Constant(1, mu), Mat::Constant(1, 1, var)), std::move(s));
}

Outcome untruncated_identity() {
  std::mt19937_64 rng(101);
  double worst_h = 0.0, worst_step = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int d = 1 + i % 3;
    const Problem ctx(gen::params_nd(rng, d), TruncationSpec::none());
    Vec lam(d);
    for (int j = 0; j < d; ++j) lam(j) = gen::uniform(rng, -3.0, 3.0);
    const Vec h = self_moment(lam, ctx).value;
    worst_h = std::max(worst_h, (h - lam).norm() / lam.norm());
    const Vec b = target_moment(lam, ctx).value;
    worst_step = std::max(worst_step, (em_step(lam, ctx) - b).norm() / std::max(1.0, b.norm()));
  }
  return {worst_h <= 1e-8 && worst_step <= 1e-7,
          "max rel |H(l)-l| " + fmt(worst_h) + " (tol 1e-8), max |step - E[tanh x]| " + fmt(worst_step) + " (tol 1e-7)"};
}

Outcome canonical_fixed_points() {
  std::mt19937_64 rng(202);
  int bad = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Problem ctx = gen::truncated_problem(rng, 1 + i % 2);
    for (const Vec& p : {Vec(ctx.mu()), Vec(-ctx.mu()), Vec(Vec::Zero(ctx.dim()))}) {
      const auto r = fixed_point_residual(p, ctx);
      if (!(r.value <= 10.0 * r.error_estimate)) ++bad;
      if (r.error_estimate > 0) worst_ratio = std::max(worst_ratio, r.value / r.error_estimate);
    }
  }
  return {bad == 0, "60 points over 20 configs (d = 1, 2), violations " + std::to_string(bad) +
                        ", max residual / error " + fmt(worst_ratio)};
}

Outcome derivative_formulas() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int d = 1; d <= 2; ++d) {
    for (int i = 0; i < 10; ++i) {
      const Problem ctx = gen::truncated_problem(rng, d);
      Vec lam(d);
      for (int j = 0; j < d; ++j) lam(j) = gen::uniform(rng, -2.0, 2.0);
      worst = std::max(worst, derivative_fd_check(lam, ctx).worst());
    }
  }
  return {worst <= 1e-4, "20 configs, max relative deviation " + fmt(worst) + " (tol 1e-4)"};
}

Outcome stability_1d() {
  std::mt19937_64 rng(404);
  double max_pm = 0.0, min_zero = kInf;
  for (int i = 0; i < 20; ++i) {
    const Problem ctx = gen::truncated_problem(rng, 1);
    max_pm = std::max({max_pm, em_jacobian(ctx.mu(), ctx).spectral_radius,
                       em_jacobian(Vec(-ctx.mu()), ctx).spectral_radius});
    min_zero = std::min(min_zero, em_jacobian(Vec::Zero(1), ctx).spectral_radius);
  }
  double worst_one = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double mu = gen::uniform(rng, 0.3, 2.5), var = gen::uniform(rng, 0.5, 2.0);
    const Problem ctx = problem_1d(mu, var, TruncationSpec::none());
    worst_one = std::max(worst_one, std::abs(em_jacobian(Vec::Zero(1), ctx).spectral_radius - (1.0 + mu * mu / var)));
  }
  return {max_pm < 1.0 && min_zero > 1.0 && worst_one <= 1e-6,
          "max at +-mu " + fmt(max_pm) + ", min at 0 " + fmt(min_zero) + ", S=1 |J(0) - 1 - mu^2/s^2| " +
              fmt(worst_one) + " (tol 1e-6)"};
}

Outcome three_roots_1d() {
  std::mt19937_64 rng(505);
  int wrong = 0;
  std::set<std::string> kinds;
  for (int i = 0; i < 20; ++i) {
    std::string kind;
    const Problem ctx = gen::truncated_problem(rng, 1, 0.05, &kind);
    kinds.insert(kind);
    const double m = std::abs(ctx.mu()(0));
    const auto set = scan_fixed_points_1d(ctx, -4.0 * m, 4.0 * m, 4000);
    bool ok = set.size() == 3;
    if (ok) {
      const double tol = 1e-6 * (1.0 + m);
      ok = std::abs(set.points[0](0) + m) <= tol && std::abs(set.points[1](0)) <= tol &&
           std::abs(set.points[2](0) - m) <= tol;
    }
    wrong += !ok;
  }
  std::string names;
  for (const auto& k : kinds) names += (names.empty() ? "" : ",") + k;
  return {wrong == 0, "20 truncations [" + names + "], configs without exactly {-mu,0,mu}: " + std::to_string(wrong)};
}

Outcome global_convergence_1d() {
  const std::vector<std::pair<std::string, TruncationSpec>> sets{
      {"[0.5,inf)", TruncationSpec::interval(0.5, kInf)},
      {"[-0.3,2]", TruncationSpec::interval(-0.3, 2.0)},
      {"ramp", TruncationSpec::soft_ramp(-1.0, 1.0)}};
  int runs = 0, bad = 0, max_iter = 0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const Problem ctx = problem_1d(1.0, 1.0, sets[s].second);
    for (const Vec& l0 : random_inits(ctx, 100, 4.0, 600 + s)) {
      ++runs;
      const auto traj = run_em(l0, ctx, ctx.solver().outer_tol, 1000);
      const double target = l0(0) > 0 ? 1.0 : -1.0;
      bool ok = traj.converged && std::abs(traj.final_lambda()(0) - target) <= 1e-6 && bracket_check(traj, 1.0);
      if (ok) ok = contraction_profile(traj, ctx).all_contracting();
      max_iter = std::max(max_iter, traj.iterations());
      bad += !ok;
    }
  }
  return {bad == 0, std::to_string(runs) + " runs over 3 sets, failures " + std::to_string(bad) +
                        ", max iterations " + std::to_string(max_iter)};
}

Outcome rotation_invariant_2d() {
  const Problem ctx(MixtureParams(Vec{{1.5, 0.5}}, Mat::Identity(2, 2)), TruncationSpec::annuli({{1.0, 3.0}}));
  MultistartOptions opt;
  opt.rng_seed = 7;
  const auto set = multistart_fixed_points(ctx, 64, opt);
  auto near = [&](const Vec& p) {
    for (const auto& q : set.points)
      if ((q - p).norm() <= 1e-6) return true;
    return false;
  };
  const bool triple = set.size() == 3 && near(ctx.mu()) && near(-ctx.mu()) && near(Vec::Zero(2));
  const auto basin = basin_sample(ctx, 50, 2.0, 8);
  const int to_mu = basin.counts.count(LimitLabel::PlusMu) ? basin.counts.at(LimitLabel::PlusMu) : 0;
  const int to_neg = basin.counts.count(LimitLabel::MinusMu) ? basin.counts.at(LimitLabel::MinusMu) : 0;
  const double rp = em_jacobian(ctx.mu(), ctx).spectral_radius;
  const double rm = em_jacobian(Vec(-ctx.mu()), ctx).spectral_radius;
  const double r0 = em_jacobian(Vec::Zero(2), ctx).spectral_radius;
  return {triple && to_mu + to_neg == 50 && rp < 1.0 && rm < 1.0 && r0 > 1.0,
          "multistart found " + std::to_string(set.size()) + " points, basin +mu/-mu " + std::to_string(to_mu) + "/" +
              std::to_string(to_neg) + " of 50, radius +-mu " + fmt(std::max(rp, rm)) + ", at 0 " + fmt(r0)};
}

Outcome rectangle_counterexample() {
  const Vec quoted{{2.534, 6.395}};
  const Vec point{{1.0, 0.0}};
  const auto rect = TruncationSpec::box({{1.0, 2.0}, {-3.0, 1.5}});
  const Problem ctx(MixtureParams(quoted, Mat::Identity(2, 2)), rect);
  const double r_quoted = fixed_point_residual(point, ctx).value;
  const auto solved = solve_mean_for_fixed_point(ctx, point, quoted);
  const Problem star = ctx.with_mean(solved.mu);
  const double r_star = fixed_point_residual(point, star).value;
  const auto jac = em_jacobian(point, star);
  const double lo = jac.eigenvalues.cwiseAbs().minCoeff(), hi = jac.eigenvalues.cwiseAbs().maxCoeff();
  const double shift = (solved.mu - quoted).cwiseAbs().maxCoeff();
  const bool pass = r_quoted <= 1e-3 && shift <= 5e-3 && r_star <= 1e-8 && lo < 1.0 && hi > 1.0 &&
                    jac.classification == Stability::Saddle;
  std::ostringstream os;
  os.precision(10);
  os << "residual at quoted mu " << fmt(r_quoted) << ", mu* = (" << solved.mu(0) << ", " << solved.mu(1)
     << ") shift " << fmt(shift) << ", residual " << fmt(r_star) << ", eigenvalues " << fmt(lo) << " / " << fmt(hi)
     << " " << to_string(jac.classification);
  return {pass, os.str()};
}

Outcome rate_identities() {
  std::mt19937_64 rng(909);
  double worst_den = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Problem ctx = gen::truncated_problem(rng, 1);
    const double m = ctx.mu()(0);
    worst_den = std::max(worst_den, denominator_identity_check(gen::uniform(rng, -2.0 * m, 2.0 * m), ctx).discrepancy);
  }
  const std::vector<TruncationSpec> sets{
      TruncationSpec::interval(0.5, kInf), TruncationSpec::interval(-0.3, 2.0), TruncationSpec::soft_ramp(-1.0, 1.0),
      TruncationSpec::union_of({TruncationSpec::interval(-2.0, -1.0), TruncationSpec::interval(0.2, 3.0)}),
      TruncationSpec::soft_logistic(0.4, 0.3)};
  double min_num = kInf;
  int probes = 0;
  for (const auto& s : sets)
    for (const double mu : {0.7, 1.0, 2.0})
      for (const double frac : {0.2, 0.5, 0.8}) {
        min_num = std::min(min_num, numerator_bound_eval(frac * mu, problem_1d(mu, 1.0, s), 11).minimum);
        ++probes;
      }
  const Problem base = problem_1d(1.0, 1.0, TruncationSpec::none());
  std::vector<TruncationSpec> family;
  for (const double w : {3.0, 2.0, 1.5, 1.0, 0.7, 0.5, 0.3}) family.push_back(TruncationSpec::annuli({{0.0, w}}));
  const auto sweep = local_rate_sweep(base, family);
  std::string fits;
  for (const auto& r : sweep.rows) fits += (fits.empty() ? "" : ",") + fmt(r.fitted_c);
  return {worst_den <= 1e-6 && min_num > 0.0 && sweep.all_contracting && sweep.monotone,
          "denominator max discrepancy " + fmt(worst_den) + " (tol 1e-6), numerator min " + fmt(min_num) + " over " +
              std::to_string(probes) + " probes, sweep radius " + fmt(sweep.rows.front().radius_plus) + " -> " +
              fmt(sweep.rows.back().radius_plus) + (sweep.monotone ? " monotone" : " NOT monotone") +
              ", fitted c [" + fits + "]"};
}

Outcome fkg_suite() {
  std::mt19937_64 rng(1010);
  int fails = 0;
  for (int i = 0; i < 200; ++i) {
    const auto f = random_monotone_fn(rng), g = random_monotone_fn(rng);
    fails += !fkg_monotone_check(f, g, random_density(rng));
  }
  const auto q = fkg_quantitative_check(uniform_square_fkg_instance());
  const double e1 = std::abs(q.lhs - 4.0 / 45.0), e2 = std::abs(q.rhs_std - 7.0 / 24.0),
               e3 = std::abs(q.rhs_folded - 1.0 / 96.0);
  return {fails == 0 && e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 1e-6 && q.holds_folded,
          "monotone pairs " + std::to_string(200 - fails) + "/200; LHS err " + fmt(e1) + ", RHS_std err " + fmt(e2) +
              ", RHS_folded err " + fmt(e3) + "; literal bound " + (q.holds_std ? "holds" : "fails (soft)") +
              ", folded bound " + (q.holds_folded ? "holds" : "fails")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"untruncated identity", untruncated_identity},
      {"canonical fixed points", canonical_fixed_points},
      {"derivative formulas", derivative_formulas},
      {"1-D stability", stability_1d},
      {"three fixed points in 1-D", three_roots_1d},
      {"1-D global convergence", global_convergence_1d},
      {"rotation-invariant 2-D", rotation_invariant_2d},
      {"rectangle counterexample", rectangle_counterexample},
      {"rate identities", rate_identities},
      {"FKG suite", fkg_suite}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%zu] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
