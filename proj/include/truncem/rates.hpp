#ifndef TRUNCEM_RATES_HPP
#define TRUNCEM_RATES_HPP

// Empirical contraction, the one-dimensional rate identities, and FKG checks.
// Bounds with unspecified constants are reported as fitted multipliers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "truncem/analysis.hpp"
#include "truncem/em_core.hpp"
#include "truncem/parallel.hpp"
#include "truncem/quad.hpp"

namespace truncem {

struct RateReport {
  double alpha = 0.0;
  LimitLabel label = LimitLabel::NotConverged;
  Vec limit;
  std::vector<int> factor_iters;  // iteration t of each factor |l_{t+1} - l*| / |l_t - l*|
  std::vector<double> contraction_factors;
  double spectral_radius_at_limit = 0.0;
  std::map<std::string, double> fitted_constants;

  bool all_contracting() const {
    return std::all_of(contraction_factors.begin(), contraction_factors.end(), [](double f) { return f < 1.0; });
  }
};

/// Per-step contraction toward the labeled limit (whitened norm). Steps whose
/// distance is already below 1e-7 (1 + ||mu||) are skipped. Also fits the
/// largest C with factor_t <= 1 - C min(alpha^2 min(|l_t|, |mu|), 1) alpha^4.
inline RateReport contraction_profile(const EMTrajectory& traj, const Problem& ctx) {
  if (traj.label == LimitLabel::NotConverged || traj.limit.size() != ctx.dim())
    throw InvalidArgument("contraction_profile: trajectory has no labeled limit");
  if (traj.states.empty()) throw InvalidArgument("contraction_profile: empty trajectory");
  const auto& p = ctx.params();
  RateReport rep;
  rep.label = traj.label;
  rep.limit = traj.limit;
  rep.alpha = ctx.alpha().value;
  rep.spectral_radius_at_limit = em_jacobian(traj.limit, ctx).spectral_radius;
  const double floor = 1e-7 * (1.0 + p.whitened_norm(ctx.mu()));
  const double mu_norm = p.whitened_norm(ctx.mu());
  const double a = rep.alpha;
  double fitted = kInf;
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    const double d0 = p.whitened_norm(traj.states[t].lambda - traj.limit);
    const double d1 = p.whitened_norm(traj.states[t + 1].lambda - traj.limit);
    if (d0 <= floor || d1 <= floor) continue;
    const double f = d1 / d0;
    rep.factor_iters.push_back(traj.states[t].iter);
    rep.contraction_factors.push_back(f);
    const double lam = p.whitened_norm(traj.states[t].lambda);
    const double denom = std::min(a * a * std::min(lam, mu_norm), 1.0) * std::pow(a, 4);
    if (denom > 0) fitted = std::min(fitted, (1.0 - f) / denom);
  }
  if (std::isfinite(fitted)) rep.fitted_constants["rate_C"] = fitted;
  return rep;
}

/// 1-D monotone bracketing of the iterates around mu (mirrored for negatives).
inline bool bracket_check(const EMTrajectory& traj, double mu) {
  const double m = std::abs(mu);
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    if (traj.states[t].lambda.size() != 1) throw DimensionMismatch("bracket_check requires d = 1");
    double a = traj.states[t].lambda(0), b = traj.states[t + 1].lambda(0);
    if (a < 0) {
      a = -a;
      b = -b;
    }
    if (a > 0 && a < m && !(a < b && b < m)) return false;
    if (a > m && !(m < b && b < a)) return false;
  }
  return true;
}

struct DenominatorReport {
  double xi = 0.0;
  double via_derivatives = 0.0;  // d_self_moment at xi
  double via_folded = 0.0;       // Var under N(xi, s^2) weighted by (S(x) + S(-x)) / 2, over s^2
  double discrepancy = 0.0;      // relative
};

/// dH/dl at xi two ways (d = 1). The folded route integrates the single
/// Gaussian N(xi, s^2) against (S(x) + S(-x)) / 2 with its own quadrature.
inline DenominatorReport denominator_identity_check(double xi, const Problem& ctx) {
  if (ctx.dim() != 1) throw DimensionMismatch("denominator_identity_check requires d = 1");
  DenominatorReport rep;
  rep.xi = xi;
  rep.via_derivatives = d_self_moment(Vec::Constant(1, xi), ctx).value(0, 0);

  const double var = ctx.params().sigma()(0, 0), sd = std::sqrt(var);
  const auto& trunc = ctx.trunc();
  const double r = ctx.quad().window_radius;
  const double lo = xi - r * sd, hi = xi + r * sd;
  std::vector<double> cuts{xi};
  const auto breaks = trunc.axis_breakpoints(1);
  for (double b : breaks[0]) {
    cuts.push_back(b);
    cuts.push_back(-b);
  }
  Vec x(1), xm(1);
  auto f = [&](double t, std::span<double> out) {
    x(0) = t;
    xm(0) = -t;
    const double w = std::exp(-0.5 * (t - xi) * (t - xi) / var) * 0.5 * (trunc(x) + trunc(xm));
    out[0] = w;
    out[1] = w * (t - xi);
    out[2] = w * (t - xi) * (t - xi);
  };
  const auto ir = integrate_interval(f, 3, lo, hi, cuts, ctx.quad().abs_tol, ctx.quad().rel_tol, ctx.quad().max_panels, 0);
  if (!(ir.value(0) > 0)) throw DegenerateTruncation("denominator_identity_check: folded weight has no mass");
  const double m1 = ir.value(1) / ir.value(0), m2 = ir.value(2) / ir.value(0);
  rep.via_folded = (m2 - m1 * m1) / var;
  rep.discrepancy = std::abs(rep.via_derivatives - rep.via_folded) / std::max(std::abs(rep.via_folded), 1e-300);
  return rep;
}

struct NumeratorReport {
  double lambda_t = 0.0;
  std::vector<double> xi;
  std::vector<double> values;  // dG(l_t, y)/dy at y = xi
  double minimum = 0.0;
  bool positive = false;
  double alpha = 0.0;
  double reference = 0.0;  // alpha^2 tanh^2(sqrt(2 pi) l_t alpha), l_t in sigma units
  double fitted_constant = 0.0;
};

/// Sweeps xi over [l_t, mu] (d = 1) and evaluates the derivative of the
/// target moment with respect to the true mean at xi, with l = l_t fixed.
inline NumeratorReport numerator_bound_eval(double lambda_t, const Problem& ctx, int n_xi, int threads = 1) {
  if (ctx.dim() != 1) throw DimensionMismatch("numerator_bound_eval requires d = 1");
  const double mu = ctx.mu()(0);
  if (!(lambda_t > 0 && lambda_t < mu)) throw InvalidArgument("numerator_bound_eval: need 0 < lambda_t < mu");
  if (n_xi < 2) throw InvalidArgument("numerator_bound_eval: n_xi must be >= 2");
  NumeratorReport rep;
  rep.lambda_t = lambda_t;
  for (int k = 0; k < n_xi; ++k) rep.xi.push_back(lambda_t + (mu - lambda_t) * k / (n_xi - 1));
  rep.values = parallel_map(rep.xi.size(), threads, [&](std::size_t k) {
    return d_cross_moment_mu(Vec::Constant(1, lambda_t), ctx.with_mean(Vec::Constant(1, rep.xi[k]))).value(0, 0);
  });
  rep.minimum = *std::min_element(rep.values.begin(), rep.values.end());
  rep.positive = rep.minimum > 0.0;
  rep.alpha = ctx.alpha().value;
  const double sd = std::sqrt(ctx.params().sigma()(0, 0));
  const double th = std::tanh(std::sqrt(2.0 * std::numbers::pi) * (lambda_t / sd) * rep.alpha);
  rep.reference = rep.alpha * rep.alpha * th * th;
  rep.fitted_constant = rep.reference > 0 ? rep.minimum / rep.reference : kInf;
  return rep;
}

struct LocalRateReport {
  double alpha = 0.0;
  double radius_plus = 0.0;
  double radius_minus = 0.0;
  bool contracting = false;  // both radii < 1
  double fitted_c = 0.0;     // (1 - radius) / alpha^6
};

inline LocalRateReport local_rate_check(const Problem& ctx) {
  LocalRateReport rep;
  rep.alpha = ctx.alpha().value;
  rep.radius_plus = em_jacobian(ctx.mu(), ctx).spectral_radius;
  rep.radius_minus = em_jacobian(Vec(-ctx.mu()), ctx).spectral_radius;
  rep.contracting = rep.radius_plus < 1.0 && rep.radius_minus < 1.0;
  const double rho = std::max(rep.radius_plus, rep.radius_minus);
  rep.fitted_c = (1.0 - rho) / std::pow(rep.alpha, 6);
  return rep;
}

struct RateSweep {
  std::vector<LocalRateReport> rows;
  bool all_contracting = false;
  bool monotone = false;  // radius increases whenever alpha decreases
};

/// local_rate_check over a family of truncations sharing params and settings.
inline RateSweep local_rate_sweep(const Problem& base, const std::vector<TruncationSpec>& family, int threads = 1) {
  RateSweep sweep;
  sweep.rows = parallel_map(family.size(), threads, [&](std::size_t i) {
    return local_rate_check(Problem(base.params(), family[i], base.quad(), base.solver()));
  });
  sweep.all_contracting = std::all_of(sweep.rows.begin(), sweep.rows.end(), [](const auto& r) { return r.contracting; });
  std::vector<LocalRateReport> sorted = sweep.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.alpha > b.alpha; });
  sweep.monotone = true;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (!(sorted[i + 1].radius_plus > sorted[i].radius_plus)) sweep.monotone = false;
  return sweep;
}

// ---------------------------------------------------------------------------
// FKG

/// Scalar function on the line with its discontinuity locations and an
/// optional derivative.
struct ScalarFn {
  std::function<double(double)> f;
  std::vector<double> breakpoints;
  std::function<double(double)> derivative;

  double operator()(double x) const { return f(x); }
  double deriv(double x) const {
    if (derivative) return derivative(x);
    const double h = 1e-5 * (1.0 + std::abs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
  }
};

/// A probability density on [lo, hi] (need not be normalized).
struct Density1D {
  std::function<double(double)> pdf;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breakpoints;

  static Density1D uniform(double a, double b) {
    if (!(a < b)) throw InvalidArgument("uniform density needs a < b");
    return Density1D{[](double) { return 1.0; }, a, b, {}};
  }
  static Density1D normal(double mean, double sd) {
    if (!(sd > 0)) throw InvalidArgument("normal density needs sd > 0");
    return Density1D{[=](double x) { return std::exp(-0.5 * (x - mean) * (x - mean) / (sd * sd)); },
                     mean - 12.0 * sd, mean + 12.0 * sd, {mean}};
  }
  /// The truncated mixture of a one-dimensional problem.
  static Density1D truncated_mixture(const Problem& ctx) {
    if (ctx.dim() != 1) throw DimensionMismatch("truncated_mixture density requires d = 1");
    const auto params = ctx.params();
    const auto trunc = ctx.trunc();
    const double sd = std::sqrt(params.sigma()(0, 0)), nu = std::abs(params.mu()(0));
    const auto hull = trunc.support_hull(1)[0];
    Density1D out;
    out.pdf = [params, trunc](double x) {
      const Vec v = Vec::Constant(1, x);
      const double s = trunc(v);
      return s == 0.0 ? 0.0 : s * mixture_density(params, v);
    };
    out.lo = std::max(-nu - 12.0 * sd, hull.lo);
    out.hi = std::min(nu + 12.0 * sd, hull.hi);
    out.breakpoints = trunc.axis_breakpoints(1)[0];
    out.breakpoints.insert(out.breakpoints.end(), {0.0, nu, -nu});
    return out;
  }
};

namespace detail {

/// Integrates [1, h_1(x), ..., h_m(x)] against the density; returns the
/// normalized expectations E[h_k].
template <class F>
Vec density_expectations(const Density1D& dist, int m, F&& h, std::vector<double> cuts, double rel_tol = 1e-13) {
  cuts.insert(cuts.end(), dist.breakpoints.begin(), dist.breakpoints.end());
  std::vector<double> hb(static_cast<std::size_t>(m));
  auto f = [&](double x, std::span<double> out) {
    const double w = dist.pdf(x);
    out[0] = w;
    if (w == 0.0) {
      std::fill(out.begin() + 1, out.end(), 0.0);
      return;
    }
    h(x, std::span<double>(hb));
    for (int k = 0; k < m; ++k) out[k + 1] = w * hb[k];
  };
  const auto ir = integrate_interval(f, m + 1, dist.lo, dist.hi, std::move(cuts), 1e-15, rel_tol, 50000, 0);
  if (!(ir.value(0) > 0)) throw DegenerateTruncation("density has no mass on its window");
  return ir.value.tail(m) / ir.value(0);
}

}  // namespace detail

struct FkgMonotoneReport {
  double e_fg = 0.0;
  double e_f = 0.0;
  double e_g = 0.0;
  double scale = 0.0;  // sqrt(E[f^2] E[g^2])
  bool holds = false;
};

inline FkgMonotoneReport fkg_monotone_report(const ScalarFn& f, const ScalarFn& g, const Density1D& dist) {
  std::vector<double> cuts = f.breakpoints;
  cuts.insert(cuts.end(), g.breakpoints.begin(), g.breakpoints.end());
  const Vec e = detail::density_expectations(
      dist, 5,
      [&](double x, std::span<double> out) {
        const double fv = f(x), gv = g(x);
        out[0] = fv * gv;
        out[1] = fv;
        out[2] = gv;
        out[3] = fv * fv;
        out[4] = gv * gv;
      },
      cuts);
  FkgMonotoneReport rep;
  rep.e_fg = e(0);
  rep.e_f = e(1);
  rep.e_g = e(2);
  rep.scale = std::sqrt(e(3) * e(4));
  rep.holds = rep.e_fg >= rep.e_f * rep.e_g - 1e-12 * rep.scale;
  return rep;
}

/// E[fg] >= E[f] E[g] for increasing f, g, up to 1e-12 sqrt(E[f^2] E[g^2]).
inline bool fkg_monotone_check(const ScalarFn& f, const ScalarFn& g, const Density1D& dist) {
  return fkg_monotone_report(f, g, dist).holds;
}

struct FkgCheckSpec {
  ScalarFn f;
  ScalarFn g;
  double c = 0.0;
  Density1D distribution;
};

struct FkgQuantReport {
  double q = 0.0;  // P(|x| >= c)
  double lhs = 0.0;
  double rhs_std = 0.0;
  double rhs_folded = 0.0;
  bool holds_std = false;
  bool holds_folded = false;
  bool f_even = false;
  bool g_even = false;
};

inline bool probe_even(const ScalarFn& h, double scale) {
  for (int k = 1; k <= 64; ++k) {
    const double x = scale * k / 16.0;
    const double a = h(x), b = h(-x);
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) return false;
  }
  return true;
}

/// LHS = Cov(f, g); RHS_std = 2 f'(c) g'(c) q^2 Var[x | |x| >= c];
/// RHS_folded uses Var[|x| | |x| >= c].
inline FkgQuantReport fkg_quantitative_check(const FkgCheckSpec& spec) {
  if (!(spec.c > 0)) throw InvalidArgument("fkg_quantitative_check: c must be positive");
  const double c = spec.c;
  std::vector<double> cuts = spec.f.breakpoints;
  cuts.insert(cuts.end(), spec.g.breakpoints.begin(), spec.g.breakpoints.end());
  cuts.insert(cuts.end(), {-c, c, 0.0});
  const Vec e = detail::density_expectations(
      spec.distribution, 7,
      [&](double x, std::span<double> out) {
        const double fv = spec.f(x), gv = spec.g(x);
        const double tail = std::abs(x) >= c ? 1.0 : 0.0;
        out[0] = fv * gv;
        out[1] = fv;
        out[2] = gv;
        out[3] = tail;
        out[4] = tail * x;
        out[5] = tail * x * x;
        out[6] = tail * std::abs(x);
      },
      cuts);
  FkgQuantReport rep;
  rep.q = e(3);
  if (!(rep.q > 0)) throw InvalidArgument("fkg_quantitative_check: tail mass q = P(|x| >= c) is zero");
  rep.lhs = e(0) - e(1) * e(2);
  const double m1 = e(4) / rep.q, m2 = e(5) / rep.q, ma = e(6) / rep.q;
  const double var_x = m2 - m1 * m1, var_abs = m2 - ma * ma;
  const double pre = 2.0 * spec.f.deriv(c) * spec.g.deriv(c) * rep.q * rep.q;
  rep.rhs_std = pre * var_x;
  rep.rhs_folded = pre * var_abs;
  const double slack = 1e-12 * std::max(1.0, std::abs(rep.lhs));
  rep.holds_std = rep.lhs >= rep.rhs_std - slack;
  rep.holds_folded = rep.lhs >= rep.rhs_folded - slack;
  const double scale = std::max({std::abs(spec.distribution.lo), std::abs(spec.distribution.hi), c});
  rep.f_even = probe_even(spec.f, scale / 4.0);
  rep.g_even = probe_even(spec.g, scale / 4.0);
  return rep;
}

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// c with 2 Phi(c / sd) - 1 = alpha / 2, i.e. the central mass of N(0, sd^2)
/// on [-c, c] equals alpha / 2 (bisection).
inline double default_fkg_c(double alpha, double sd) {
  if (!(alpha > 0 && alpha <= 1)) throw InvalidArgument("default_fkg_c: alpha must lie in (0, 1]");
  const double target = 0.5 * (1.0 + 0.5 * alpha);
  double lo = 0.0, hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std_normal_cdf(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * sd;
}

/// The setting of the numerator bound: x ~ N(xi, s^2) weighted by
/// (S(x) + S(-x)) / 2, f = x tanh(l x / s^2), g = x tanh(xi x / s^2).
inline FkgCheckSpec numerator_fkg_spec(const Problem& ctx, double lambda_t, double xi) {
  if (ctx.dim() != 1) throw DimensionMismatch("numerator_fkg_spec requires d = 1");
  const double var = ctx.params().sigma()(0, 0), sd = std::sqrt(var);
  const auto trunc = ctx.trunc();
  FkgCheckSpec spec;
  auto make = [var](double l) {
    ScalarFn h;
    h.f = [=](double x) { return x * std::tanh(l * x / var); };
    h.derivative = [=](double x) {
      const double t = std::tanh(l * x / var);
      return t + x * (1.0 - t * t) * l / var;
    };
    return h;
  };
  spec.f = make(lambda_t);
  spec.g = make(xi);
  spec.c = default_fkg_c(ctx.alpha().value, sd);
  spec.distribution.pdf = [=](double x) {
    const double w = std::exp(-0.5 * (x - xi) * (x - xi) / var);
    return w * 0.5 * (trunc(Vec::Constant(1, x)) + trunc(Vec::Constant(1, -x)));
  };
  spec.distribution.lo = xi - 12.0 * sd;
  spec.distribution.hi = xi + 12.0 * sd;
  const auto breaks = trunc.axis_breakpoints(1);
  for (double b : breaks[0]) {
    spec.distribution.breakpoints.push_back(b);
    spec.distribution.breakpoints.push_back(-b);
  }
  spec.distribution.breakpoints.push_back(xi);
  return spec;
}

}  // namespace truncem

#endif  // TRUNCEM_RATES_HPP
