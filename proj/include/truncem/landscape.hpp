#ifndef TRUNCEM_LANDSCAPE_HPP
#define TRUNCEM_LANDSCAPE_HPP

// Fixed points of the EM map, vector fields and basin tallies.
// psi(l) = b(l) - H(l) vanishes exactly at fixed points.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "truncem/analysis.hpp"
#include "truncem/em_core.hpp"
#include "truncem/parallel.hpp"

namespace truncem {

struct FixedPointSet {
  std::vector<Vec> points;
  std::vector<double> residuals;
  std::vector<JacobianReport> reports;
  int starts = 0;
  int failed_starts = 0;  // Newton runs that did not reach the acceptance threshold

  std::size_t size() const { return points.size(); }
};

namespace detail {

/// psi(l) and its Jacobian (N - M) Sigma^{-1}.
struct PsiEval {
  Vec psi;
  Mat jac;
};

inline PsiEval psi_with_jacobian(const Vec& lambda, const Problem& ctx) {
  const int d = ctx.dim();
  const Vec v = ctx.params().sigma_inv() * lambda;
  IntegrandHints hints;
  if (v.norm() > 0) hints.tanh_directions.push_back(v);
  auto raw = integrate_moments(
      [&](const Vec& x, std::span<double> out) {
        const double t = std::tanh(x.dot(v));
        const double s = 1.0 - t * t;
        for (int i = 0; i < d; ++i) out[i] = x(i) * t;
        for (int j = 0; j < d; ++j)
          for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(d + j * d + i)] = x(i) * x(j) * s;
      },
      d + d * d, ctx.params(), ctx.trunc(), ctx.quad(), hints);
  const Vec b = raw.ratio.head(d);
  const Mat n = Eigen::Map<const Mat>(raw.ratio.data() + d, d, d);
  const auto self = tanh_moments(ctx, lambda, lambda, true);
  const Mat m = self.second - self.first * self.first.transpose();
  return PsiEval{b - self.first, (n - m) * ctx.params().sigma_inv()};
}

inline Vec psi(const Vec& lambda, const Problem& ctx) {
  return tanh_moments(ctx, ctx.mu(), lambda, false).first - tanh_moments(ctx, lambda, lambda, false).first;
}

inline double trust_radius(const Problem& ctx) {
  return ctx.mu().norm() + 3.0 * std::sqrt(ctx.params().sigma().selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff());
}

/// Damped Newton on psi from `start`; nullopt if ||psi|| does not reach `tol`.
inline std::optional<Vec> newton_psi(const Vec& start, const Problem& ctx, double tol, int max_iters = 60) {
  Vec cur = start;
  PsiEval e;
  try {
    e = psi_with_jacobian(cur, ctx);
  } catch (const Error&) {
    return std::nullopt;
  }
  double rn = e.psi.norm();
  const double trust = trust_radius(ctx);
  for (int it = 0; it < max_iters; ++it) {
    if (rn <= tol) return cur;
    Eigen::FullPivLU<Mat> lu(e.jac);
    if (!lu.isInvertible()) return std::nullopt;
    Vec step = lu.solve(-e.psi);
    if (!step.allFinite()) return std::nullopt;
    if (step.norm() > trust) step *= trust / step.norm();
    bool accepted = false;
    double t = 1.0;
    for (int k = 0; k < 30 && !accepted; ++k, t *= 0.5) {
      const Vec cand = cur + t * step;
      try {
        auto ce = psi_with_jacobian(cand, ctx);
        const double cn = ce.psi.norm();
        if (cn < rn) {
          cur = cand;
          e = std::move(ce);
          rn = cn;
          accepted = true;
        }
      } catch (const Error&) {
      }
    }
    if (!accepted) return rn <= tol ? std::optional<Vec>(cur) : std::nullopt;
  }
  return rn <= tol ? std::optional<Vec>(cur) : std::nullopt;
}

/// Adds `p` unless a point within `radius` (whitened) is already present.
inline bool insert_unique(std::vector<Vec>& pts, const Vec& p, const Problem& ctx, double radius) {
  for (const auto& q : pts)
    if (ctx.params().whitened_norm(p - q) <= radius) return false;
  pts.push_back(p);
  return true;
}

inline void finalize(FixedPointSet& set, const Problem& ctx, int threads) {
  // deterministic order: lexicographic by coordinates
  std::sort(set.points.begin(), set.points.end(), [](const Vec& a, const Vec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (a(i) != b(i)) return a(i) < b(i);
    return false;
  });
  struct Info {
    double residual = 0.0;
    JacobianReport report;
  };
  auto infos = parallel_map(set.points.size(), threads, [&](std::size_t i) {
    Info info;
    info.residual = fixed_point_residual(set.points[i], ctx).value;
    info.report = em_jacobian(set.points[i], ctx);
    return info;
  });
  set.residuals.clear();
  set.reports.clear();
  for (auto& info : infos) {
    set.residuals.push_back(info.residual);
    set.reports.push_back(std::move(info.report));
  }
}

}  // namespace detail

/// Scans psi on lo + (hi - lo) k / n, k = 0..n, bisects every sign change to
/// |psi| <= 1e-9, runs Newton from local minima of |psi| (tangential roots),
/// dedupes within 1e-6 and classifies each root.
inline FixedPointSet scan_fixed_points_1d(const Problem& ctx, double lo, double hi, int n, int threads = 1) {
  if (ctx.dim() != 1) throw DimensionMismatch("scan_fixed_points_1d requires d = 1");
  if (!(lo < hi)) throw InvalidArgument("scan_fixed_points_1d: need lo < hi");
  if (n < 100) throw InvalidArgument("scan_fixed_points_1d: need n >= 100");
  constexpr double kRootTol = 1e-9, kDedupe = 1e-6;
  auto grid = [&](int k) { return lo + (hi - lo) * k / n; };
  auto psi1 = [&](double l) { return detail::psi(Vec::Constant(1, l), ctx)(0); };
  const auto values = parallel_map(static_cast<std::size_t>(n + 1), threads,
                                   [&](std::size_t k) { return psi1(grid(static_cast<int>(k))); });

  std::vector<double> roots;
  auto add = [&](double r) {
    for (double q : roots)
      if (std::abs(q - r) <= kDedupe) return;
    roots.push_back(r);
  };
  std::vector<std::pair<double, double>> brackets;
  for (int k = 0; k <= n; ++k) {
    if (values[k] == 0.0) add(grid(k));
    if (k < n && values[k] * values[k + 1] < 0.0) brackets.emplace_back(grid(k), grid(k + 1));
  }
  auto bisected = parallel_map(brackets.size(), threads, [&](std::size_t i) {
    double a = brackets[i].first, b = brackets[i].second;
    double fa = psi1(a);
    double m = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
      m = 0.5 * (a + b);
      const double fm = psi1(m);
      if (std::abs(fm) <= kRootTol || fm == 0.0 || !(m > a && m < b)) break;
      if ((fm < 0) == (fa < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return m;
  });
  for (double r : bisected) add(r);

  // tangential roots: Newton from interior local minima of |psi|
  std::vector<double> minima;
  for (int k = 1; k < n; ++k) {
    const double v = std::abs(values[k]);
    if (v < std::abs(values[k - 1]) && v < std::abs(values[k + 1]) && values[k - 1] * values[k + 1] > 0 &&
        values[k] != 0.0)
      minima.push_back(grid(k));
  }
  auto polished = parallel_map(minima.size(), threads, [&](std::size_t i) {
    return detail::newton_psi(Vec::Constant(1, minima[i]), ctx, kRootTol, 30);
  });
  for (const auto& p : polished)
    if (p) add((*p)(0));

  std::sort(roots.begin(), roots.end());
  FixedPointSet set;
  set.starts = static_cast<int>(minima.size());
  for (double r : roots) set.points.push_back(Vec::Constant(1, r));
  detail::finalize(set, ctx, threads);
  return set;
}

struct MultistartOptions {
  double box_scale = 3.0;
  double accept_tol = 1e-8;
  std::uint64_t rng_seed = 1;
  int threads = 1;
  std::vector<Vec> extra_starts;  // probed in addition to the canonical triple
};

/// Newton on psi from {mu, -mu, 0}, the extra starts, and `n_starts` points
/// uniform in the whitened box [-box_scale, box_scale]^d scaled by ||mu||.
inline FixedPointSet multistart_fixed_points(const Problem& ctx, int n_starts, const MultistartOptions& opt = {}) {
  if (n_starts < 1) throw InvalidArgument("multistart_fixed_points: n_starts must be >= 1");
  const int d = ctx.dim();
  const auto& p = ctx.params();
  std::vector<Vec> starts{ctx.mu(), Vec(-ctx.mu()), Vec::Zero(d)};
  for (const auto& s : opt.extra_starts) {
    if (s.size() != d) throw DimensionMismatch("multistart: extra start has wrong dimension");
    starts.push_back(s);
  }
  const double scale = opt.box_scale * std::max(p.whitened_norm(ctx.mu()), 1e-3);
  std::mt19937_64 rng(opt.rng_seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < n_starts; ++i) {
    Vec y(d);
    for (int j = 0; j < d; ++j) y(j) = scale * u(rng);
    starts.push_back(p.whitener().unapply(y));
  }
  const auto limits = parallel_map(starts.size(), opt.threads, [&](std::size_t i) {
    return detail::newton_psi(starts[i], ctx, opt.accept_tol);
  });
  FixedPointSet set;
  set.starts = static_cast<int>(starts.size());
  const double radius = 1e-5 * (1.0 + p.whitened_norm(ctx.mu()));
  for (const auto& l : limits) {
    if (!l) {
      ++set.failed_starts;
      continue;
    }
    detail::insert_unique(set.points, *l, ctx, radius);
  }
  detail::finalize(set, ctx, opt.threads);
  return set;
}

struct MeanSolve {
  Vec mu;
  double residual = 0.0;  // ||psi(point)|| at the solved mean
  int iterations = 0;
};

/// Newton over the true mean: finds mu* near `mu0` making `point` an exact
/// fixed point, using db/dmu from d_cross_moment_mu.
inline MeanSolve solve_mean_for_fixed_point(const Problem& ctx, const Vec& point, const Vec& mu0, double tol = 1e-12,
                                            int max_iters = 50) {
  detail::check_lambda(ctx, point, "solve_mean_for_fixed_point");
  detail::check_lambda(ctx, mu0, "solve_mean_for_fixed_point");
  const Vec h = self_moment(point, ctx).value;
  MeanSolve out;
  out.mu = mu0;
  auto resid = [&](const Vec& mu) { return Vec(target_moment(point, ctx.with_mean(mu)).value - h); };
  Vec r = resid(out.mu);
  double rn = r.norm();
  for (int it = 0; it < max_iters && rn > tol; ++it) {
    const Mat jac = d_cross_moment_mu(point, ctx.with_mean(out.mu)).value;
    Vec step = jac.fullPivLu().solve(-r);
    if (!step.allFinite()) throw SolverFailure("solve_mean_for_fixed_point: singular Jacobian");
    bool accepted = false;
    double t = 1.0;
    for (int k = 0; k < 30 && !accepted; ++k, t *= 0.5) {
      const Vec cand = out.mu + t * step;
      try {
        const Vec rc = resid(cand);
        if (rc.norm() < rn) {
          out.mu = cand;
          r = rc;
          rn = rc.norm();
          accepted = true;
        }
      } catch (const Error&) {
      }
    }
    out.iterations = it + 1;
    if (!accepted) break;
  }
  out.residual = rn;
  return out;
}

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 2;

  double at(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }
};

struct VectorFieldCell {
  Vec lambda;
  Vec displacement;  // em_step(lambda) - lambda; NaN when the solve failed
  bool ok = true;
  std::string error;
};

struct VectorFieldGrid {
  GridAxis x, y;
  std::vector<VectorFieldCell> cells;  // row-major: y index outer, x index inner
};

/// Displacement em_step(l) - l on the node grid of two axes (d = 2).
inline VectorFieldGrid vector_field_2d(const Problem& ctx, GridAxis ax, GridAxis ay, int threads = 1) {
  if (ctx.dim() != 2) throw DimensionMismatch("vector_field_2d requires d = 2");
  if (ax.count < 1 || ay.count < 1) throw InvalidArgument("vector_field_2d: counts must be >= 1");
  VectorFieldGrid grid{ax, ay, {}};
  const std::size_t n = static_cast<std::size_t>(ax.count) * static_cast<std::size_t>(ay.count);
  grid.cells = parallel_map(n, threads, [&](std::size_t k) {
    VectorFieldCell cell;
    const int i = static_cast<int>(k % static_cast<std::size_t>(ax.count));
    const int j = static_cast<int>(k / static_cast<std::size_t>(ax.count));
    cell.lambda = Vec{{ax.at(i), ay.at(j)}};
    try {
      cell.displacement = em_step(cell.lambda, ctx) - cell.lambda;
    } catch (const Error& e) {
      cell.ok = false;
      cell.error = e.what();
      cell.displacement = Vec::Constant(2, std::numeric_limits<double>::quiet_NaN());
    }
    return cell;
  });
  return grid;
}

struct BasinReport {
  std::vector<Vec> inits;
  std::vector<EMTrajectory> runs;
  std::map<LimitLabel, int> counts;

  double fraction(LimitLabel l) const {
    const auto it = counts.find(l);
    return inits.empty() || it == counts.end() ? 0.0 : static_cast<double>(it->second) / inits.size();
  }
};

/// `n` points uniform in the whitened box [-init_scale, init_scale]^d scaled
/// by ||mu||, excluding ||l0|| < 1e-3.
inline std::vector<Vec> random_inits(const Problem& ctx, int n, double init_scale, std::uint64_t rng_seed) {
  if (n < 1) throw InvalidArgument("random_inits: n must be >= 1");
  if (!(init_scale > 0)) throw InvalidArgument("random_inits: init_scale must be positive");
  const int d = ctx.dim();
  const auto& p = ctx.params();
  const double scale = init_scale * std::max(p.whitened_norm(ctx.mu()), 1e-3);
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> out;
  while (static_cast<int>(out.size()) < n) {
    Vec y(d);
    for (int j = 0; j < d; ++j) y(j) = scale * u(rng);
    const Vec l0 = p.whitener().unapply(y);
    if (l0.norm() < 1e-3) continue;
    out.push_back(l0);
  }
  return out;
}

/// Runs EM from random_inits(ctx, n_inits, init_scale, rng_seed).
inline BasinReport basin_sample(const Problem& ctx, int n_inits, double init_scale, std::uint64_t rng_seed,
                                int threads = 1) {
  BasinReport rep;
  rep.inits = random_inits(ctx, n_inits, init_scale, rng_seed);
  rep.runs = parallel_map(rep.inits.size(), threads, [&](std::size_t i) { return run_em(rep.inits[i], ctx); });
  for (const auto& r : rep.runs) ++rep.counts[r.label];
  return rep;
}

}  // namespace truncem

#endif  // TRUNCEM_LANDSCAPE_HPP
