#ifndef TRUNCEM_VERIFY_HPP
#define TRUNCEM_VERIFY_HPP

// The invariant suite behind `truncem verify`. Hard checks are properties the
// model guarantees; soft checks are reports (fitted constants, the literal
// quantitative FKG bound) that may fail without indicating a defect.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "truncem/analysis.hpp"
#include "truncem/em_core.hpp"
#include "truncem/rates.hpp"

namespace truncem {

struct CheckResult {
  std::string name;
  bool hard = true;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool hard_ok() const {
    for (const auto& c : checks)
      if (c.hard && !c.passed) return false;
    return true;
  }
  int failures(bool hard) const {
    int n = 0;
    for (const auto& c : checks) n += (c.hard == hard && !c.passed);
    return n;
  }
};

/// A random non-decreasing function drawn from a few families (linear-cubic,
/// tanh, step, exponential, clamped ramp).
inline ScalarFn random_monotone_fn(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int family = static_cast<int>(rng() % 5);
  const double a = 0.1 + 2.0 * u(rng), b = 2.0 * u(rng), c = -1.0 + 2.0 * u(rng);
  ScalarFn h;
  switch (family) {
    case 0:
      h.f = [=](double x) { return a * x + b * x * x * x; };
      h.derivative = [=](double x) { return a + 3.0 * b * x * x; };
      break;
    case 1:
      h.f = [=](double x) { return std::tanh(a * (x - c)); };
      break;
    case 2:
      h.f = [=](double x) { return x >= c ? a : 0.0; };
      h.breakpoints = {c};
      break;
    case 3:
      h.f = [=](double x) { return std::exp(0.5 * a * x); };
      break;
    default:
      h.f = [=](double x) { return std::clamp(x - c, 0.0, a); };
      h.breakpoints = {c, c + a};
      break;
  }
  return h;
}

/// A random density: uniform on an interval or a normal.
inline Density1D random_density(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (rng() % 2 == 0) {
    const double lo = -2.0 + 1.5 * u(rng);
    return Density1D::uniform(lo, lo + 0.5 + 2.5 * u(rng));
  }
  return Density1D::normal(-1.0 + 2.0 * u(rng), 0.3 + 1.5 * u(rng));
}

/// The uniform[-1, 1], f = g = x^2, c = 1/2 instance.
inline FkgCheckSpec uniform_square_fkg_instance() {
  FkgCheckSpec spec;
  spec.f.f = [](double x) { return x * x; };
  spec.f.derivative = [](double x) { return 2.0 * x; };
  spec.g = spec.f;
  spec.c = 0.5;
  spec.distribution = Density1D::uniform(-1.0, 1.0);
  return spec;
}

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace detail

inline VerifyReport run_verify(const Problem& ctx, std::uint64_t seed, int threads = 1) {
  VerifyReport rep;
  auto add = [&](std::string name, bool hard, bool passed, std::string detail) {
    rep.checks.push_back(CheckResult{std::move(name), hard, passed, std::move(detail)});
  };
  auto guarded = [&](const std::string& name, bool hard, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, hard, false, std::string("error: ") + e.what());
    }
  };
  const int d = ctx.dim();
  const Vec mu = ctx.mu();
  const auto& sigma = ctx.params().sigma();

  guarded("normalization", true, [&] {
    const auto one = expect([](const Vec&) { return 1.0; }, ctx.params(), ctx.trunc(), ctx.quad());
    add("normalization", true, std::abs(one.value - 1.0) <= ctx.quad().abs_tol, "E[1] = " + detail::fmt(one.value));
  });

  const std::vector<std::pair<std::string, Vec>> canon{{"+mu", mu}, {"-mu", Vec(-mu)}, {"0", Vec::Zero(d)}};
  for (const auto& [tag, p] : canon) {
    guarded("fixed_point " + tag, true, [&] {
      const auto r = fixed_point_residual(p, ctx);
      add("fixed_point " + tag, true, r.value <= 10.0 * r.error_estimate,
          "residual " + detail::fmt(r.value) + " vs 10 x error " + detail::fmt(10.0 * r.error_estimate));
    });
  }

  for (const double s : {0.6, -0.4}) {
    const Vec lam = s * mu;
    const std::string name = "derivatives at " + detail::fmt(s) + " mu";
    guarded(name, true, [&] {
      const auto c = derivative_fd_check(lam, ctx);
      add(name, true, c.worst() <= 1e-4,
          "rel err self " + detail::fmt(c.self_lambda) + ", cross-l " + detail::fmt(c.cross_lambda) + ", cross-mu " +
              detail::fmt(c.cross_mu));
    });
  }

  guarded("positive definiteness", true, [&] {
    const Vec lam = 0.6 * mu;
    const Mat m = detail::self_covariance(lam, ctx).centered;
    const Mat n = detail::cross_curvature(lam, ctx).centered;
    Eigen::LLT<Mat> lm(m), ln(n);
    const bool ok = lm.info() == Eigen::Success && ln.info() == Eigen::Success &&
                    pd_product_spectrum_check(m, ctx.params().sigma_inv());
    add("positive definiteness", true, ok, "centered moments SPD and dH spectrum real positive");
  });

  if (ctx.trunc().is_constant_one()) {
    guarded("untruncated identity", true, [&] {
      double worst = 0.0;
      for (const double s : {0.3, -1.7}) {
        const Vec lam = s * mu + Vec::Constant(d, 0.1);
        worst = std::max(worst, (self_moment(lam, ctx).value - lam).norm() / std::max(1.0, lam.norm()));
      }
      add("untruncated identity", true, worst <= 1e-8, "max rel |H(l) - l| " + detail::fmt(worst));
    });
  }

  guarded("jacobian at +-mu", true, [&] {
    const double rp = em_jacobian(mu, ctx).spectral_radius, rm = em_jacobian(Vec(-mu), ctx).spectral_radius;
    add("jacobian at +-mu", true, rp < 1.0 && rm < 1.0, "radius " + detail::fmt(rp) + ", " + detail::fmt(rm));
  });

  if (d == 1) {
    const double m = mu(0), var = sigma(0, 0);
    guarded("jacobian at 0", true, [&] {
      const double r0 = em_jacobian(Vec::Zero(1), ctx).spectral_radius;
      bool ok = r0 > 1.0;
      std::string info = "radius " + detail::fmt(r0);
      if (ctx.trunc().is_constant_one()) {
        const double expect0 = 1.0 + m * m / var;
        ok = ok && std::abs(r0 - expect0) <= 1e-6;
        info += " vs 1 + mu^2/sigma^2 = " + detail::fmt(expect0);
      }
      add("jacobian at 0", true, ok, info);
    });
    guarded("bracketing", true, [&] {
      const double am = std::abs(m);
      const double lo = em_step(Vec::Constant(1, 0.5 * am), ctx)(0);
      const double hi = em_step(Vec::Constant(1, 1.5 * am), ctx)(0);
      const double neg = em_step(Vec::Constant(1, -0.5 * am), ctx)(0);
      const bool ok = lo > 0.5 * am && lo < am && hi > am && hi < 1.5 * am && neg < 0;
      add("bracketing", true, ok, "steps " + detail::fmt(lo) + ", " + detail::fmt(hi) + ", " + detail::fmt(neg));
    });
    guarded("denominator identity", true, [&] {
      double worst = 0.0;
      for (const double s : {-1.0, 0.0, 0.5, 1.0, 2.0}) worst = std::max(worst, denominator_identity_check(s * m, ctx).discrepancy);
      add("denominator identity", true, worst <= 1e-6, "max discrepancy " + detail::fmt(worst));
    });
    if (m > 0) {
      guarded("numerator positivity", true, [&] {
        const auto n = numerator_bound_eval(0.5 * m, ctx, 11, threads);
        add("numerator positivity", true, n.positive, "min " + detail::fmt(n.minimum));
        add("numerator constant", false, true, "fitted " + detail::fmt(n.fitted_constant));
      });
    }
  }

  guarded("local rate constant", false, [&] {
    const auto l = local_rate_check(ctx);
    add("local rate constant", false, true, "alpha " + detail::fmt(l.alpha) + ", fitted c " + detail::fmt(l.fitted_c));
  });

  guarded("fkg monotone", true, [&] {
    std::mt19937_64 rng(seed);
    int fails = 0;
    const int n = 50;
    for (int i = 0; i < n; ++i) {
      const auto f = random_monotone_fn(rng), g = random_monotone_fn(rng);
      const auto dist = random_density(rng);
      fails += !fkg_monotone_check(f, g, dist);
    }
    add("fkg monotone", true, fails == 0, std::to_string(n - fails) + "/" + std::to_string(n) + " pairs");
  });

  guarded("fkg quantitative", true, [&] {
    const auto q = fkg_quantitative_check(uniform_square_fkg_instance());
    const std::string vals =
        "lhs " + detail::fmt(q.lhs) + ", rhs_std " + detail::fmt(q.rhs_std) + ", rhs_folded " + detail::fmt(q.rhs_folded);
    add("fkg quantitative (folded)", true, q.holds_folded, vals);
    add("fkg quantitative (literal)", false, q.holds_std, vals);
  });

  return rep;
}

}  // namespace truncem

#endif  // TRUNCEM_VERIFY_HPP
