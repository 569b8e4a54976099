#ifndef TRUNCEM_QUAD_HPP
#define TRUNCEM_QUAD_HPP

// Expectations under the truncated two-component mixture.
//
// Every integral is computed as a pair (Z, N) with Z = ∫ f S and
// N = ∫ g f S on one shared node set, so ratios N/Z of vector and matrix
// integrands stay mutually consistent. Paths:
//   d = 1            adaptive Gauss-Kronrod (7/15) split at truncation
//                    breakpoints, at ±mean and at 0
//   d = 2, 3         tensor Gauss-Kronrod cells aligned with truncation
//                    breakpoints; polar/spherical shells when S is a union of
//                    Mahalanobis annuli; line-by-line integration split at
//                    the exact crossings when other boundaries are oblique
//   d > 3            importance sampling with the untruncated mixture as
//                    proposal (deterministic seed)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "truncem/errors.hpp"
#include "truncem/linalg.hpp"
#include "truncem/model.hpp"

namespace truncem {

enum class Method { Adaptive1D, Tensor, MonteCarlo };
enum class MethodChoice { Auto, Adaptive1D, Tensor, MonteCarlo };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Adaptive1D: return "adaptive1d";
    case Method::Tensor: return "tensor";
    case Method::MonteCarlo: return "montecarlo";
  }
  return "?";
}

struct QuadConfig {
  double abs_tol = 1e-13;       // on expectation values
  double rel_tol = 1e-12;
  double window_radius = 12.0;  // whitened standard deviations around ±mean
  int max_panels = 20000;       // adaptive 1-D subdivision budget
  int nodes_per_axis = 15;      // Kronrod nodes per whitened unit length
  long mc_samples = 200000;
  std::uint64_t rng_seed = 20190517;
  MethodChoice method = MethodChoice::Auto;

  void validate() const {
    if (!(abs_tol > 0) || !(rel_tol > 0)) throw InvalidArgument("QuadConfig: tolerances must be positive");
    if (!(window_radius >= 6)) throw InvalidArgument("QuadConfig: window_radius must be >= 6");
    if (nodes_per_axis < 8) throw InvalidArgument("QuadConfig: nodes_per_axis must be >= 8");
    if (max_panels < 1) throw InvalidArgument("QuadConfig: max_panels must be >= 1");
    if (mc_samples < 2) throw InvalidArgument("QuadConfig: mc_samples must be >= 2");
  }
};

template <class T>
struct Estimate {
  T value{};
  double error_estimate = 0.0;
  Method method = Method::Adaptive1D;
  std::vector<std::string> warnings;
};

/// Structure of the integrand the caller knows about. Each direction v marks
/// a factor tanh(v . x); panels are narrowed so the transition across the
/// hyperplane v . x = 0 is resolved.
struct IntegrandHints {
  std::vector<Vec> tanh_directions;
};

inline constexpr double kLowMassWarning = 1e-6;

namespace detail {

// QUADPACK qk15 abscissae/weights; Gauss 7-point nodes are the odd indices.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline constexpr int kRuleSize = 15;

/// GK15 nodes mapped to [a, b]: Kronrod weights and embedded Gauss weights
/// (zero at Kronrod-only nodes).
struct PanelRule {
  std::array<double, kRuleSize> x{}, wk{}, wg{};
};

inline PanelRule panel_rule(double a, double b) {
  PanelRule r;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  int k = 0;
  for (int j = 0; j < 7; ++j) {
    const double gw = (j % 2 == 1) ? kWg[j / 2] : 0.0;
    r.x[k] = c - h * kXgk[j];
    r.wk[k] = h * kWgk[j];
    r.wg[k] = h * gw;
    ++k;
    r.x[k] = c + h * kXgk[j];
    r.wk[k] = h * kWgk[j];
    r.wg[k] = h * gw;
    ++k;
  }
  r.x[k] = c;
  r.wk[k] = h * kWgk[7];
  r.wg[k] = h * kWg[3];
  return r;
}

/// QUADPACK error heuristic from |K - G|, the L1 mass and the deviation mass.
inline double quadpack_error(double diff, double resabs, double resasc) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double err = std::abs(diff);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return err;
}

/// Integrated pair (Z, N) and its ratio.
struct RawIntegral {
  Vec value;        // [Z, N_1, ..., N_m]
  Vec error;        // absolute error estimates, same layout
  Vec ratio;        // N_k / Z
  Vec ratio_error;  // error of N_k / Z
  Method method = Method::Adaptive1D;
  long evaluations = 0;
};

inline void finish_ratio(RawIntegral& r) {
  const double z = r.value(0);
  if (!(z > 1e-280) || !(z > r.error(0)))
    throw DegenerateTruncation("survival mass is not resolvable (alpha = " + std::to_string(z) + ")");
  const auto m = r.value.size() - 1;
  r.ratio.resize(m);
  if (r.ratio_error.size() != m) {
    r.ratio_error.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const double q = r.value(k + 1) / z;
      r.ratio_error(k) = (r.error(k + 1) + std::abs(q) * r.error(0)) / z;
    }
  }
  for (Eigen::Index k = 0; k < m; ++k) r.ratio(k) = r.value(k + 1) / z;
}

/// Evaluates w(x) S(x) [1, g(x)] into `out`. `log_w` is the log density at x.
template <class G>
inline void eval_weighted(G& g, const Vec& x, double log_w, const TruncationSpec& trunc, std::span<double> out) {
  const double s = trunc(x);
  if (!(s >= 0.0 && s <= 1.0)) throw QuadratureFailure("truncation evaluator left [0,1]");
  const double w = s == 0.0 ? 0.0 : s * std::exp(log_w);
  if (w == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  out[0] = 1.0;
  g(x, out.subspan(1));
  for (double& v : out) {
    v *= w;
    if (!std::isfinite(v)) throw QuadratureFailure("non-finite integrand value");
  }
}

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Splits [lo, hi] at `points`, then subdivides each piece so that panels
/// near a center in `centers` are at most `h_core` wide and panels further
/// out widen geometrically.
inline std::vector<std::pair<double, double>> make_panels(double lo, double hi, std::vector<double> points,
                                                          const std::vector<double>& centers, double h_core,
                                                          double mid_cap = 2.0, double far_cap = 4.0) {
  std::vector<std::pair<double, double>> out;
  if (!(lo < hi)) return out;
  points.push_back(lo);
  points.push_back(hi);
  points = sorted_unique(std::move(points));
  auto allowed = [&](double a, double b) {
    double dist = kInf;
    for (double c : centers) {
      const double d = c < a ? a - c : (c > b ? c - b : 0.0);
      dist = std::min(dist, d);
    }
    if (dist <= 5.0) return h_core;
    if (dist <= 8.0) return std::max(h_core, std::min(mid_cap, 2.0 * h_core));
    return std::max(h_core, std::min(far_cap, 4.0 * h_core));
  };
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = std::max(points[i], lo), b = std::min(points[i + 1], hi);
    if (!(a < b)) continue;
    // walk left to right; width decided by the piece's distance to centers
    double x = a;
    while (x < b) {
      double w = allowed(x, std::min(b, x + h_core));
      const int n_left = static_cast<int>(std::ceil((b - x) / w - 1e-12));
      double next = n_left <= 1 ? b : x + w;
      if (b - next < 1e-9 * std::max(1.0, std::abs(b))) next = b;
      out.emplace_back(x, next);
      x = next;
    }
  }
  return out;
}

inline double sharpness(const std::vector<Vec>& dirs, const Mat& a, int axis) {
  double s = 0.0;
  for (const auto& v : dirs) {
    const Vec av = a.transpose() * v;
    s = std::max(s, std::abs(av(axis)));
  }
  return s;
}

// ---------------------------------------------------------------------------
// d = 1

/// Adaptive GK15 integration of an m-vector integrand over [lo, hi], split at
/// `cuts`. Component k converges when its error is at most
/// max(abs_tol * |I_ref|, rel_tol * |I_k|), where I_ref is component
/// `abs_ref` (or 1 when abs_ref < 0).
struct IntervalResult {
  Vec value;
  Vec error;
  long evaluations = 0;
  bool converged = false;
};

template <class F>
IntervalResult integrate_interval(F&& f, int m, double lo, double hi, std::vector<double> cuts, double abs_tol,
                                  double rel_tol, int max_panels, int abs_ref = -1) {
  if (!(std::isfinite(lo) && std::isfinite(hi))) throw InvalidArgument("integrate_interval: bounds must be finite");
  IntervalResult res;
  res.value = Vec::Zero(m);
  res.error = Vec::Zero(m);
  if (!(lo < hi)) {
    res.converged = true;
    return res;
  }
  std::vector<double> pts{lo, hi};
  for (double c : cuts)
    if (c > lo && c < hi) pts.push_back(c);
  pts = sorted_unique(std::move(pts));

  struct Segment {
    double a, b;
    Vec val, err;
    double priority;
  };
  std::vector<double> buf(static_cast<std::size_t>(m));
  std::vector<double> fvals(static_cast<std::size_t>(m * kRuleSize));
  auto integrate_segment = [&](double a, double b) {
    const PanelRule rule = panel_rule(a, b);
    Vec k = Vec::Zero(m), gs = Vec::Zero(m), abs_sum = Vec::Zero(m);
    for (int i = 0; i < kRuleSize; ++i) {
      f(rule.x[i], std::span<double>(buf));
      for (int c = 0; c < m; ++c) {
        const double v = buf[c];
        if (!std::isfinite(v)) throw QuadratureFailure("non-finite integrand value");
        fvals[static_cast<std::size_t>(i * m + c)] = v;
        k(c) += rule.wk[i] * v;
        gs(c) += rule.wg[i] * v;
        abs_sum(c) += rule.wk[i] * std::abs(v);
      }
    }
    res.evaluations += kRuleSize;
    Vec err(m);
    const double width = b - a;
    for (int c = 0; c < m; ++c) {
      const double mean = k(c) / width;
      double asc = 0.0;
      for (int i = 0; i < kRuleSize; ++i) asc += rule.wk[i] * std::abs(fvals[static_cast<std::size_t>(i * m + c)] - mean);
      err(c) = quadpack_error(k(c) - gs(c), abs_sum(c), asc);
    }
    return std::make_pair(std::move(k), std::move(err));
  };

  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto [v, e] = integrate_segment(pts[i], pts[i + 1]);
    res.value += v;
    res.error += e;
    segs.push_back(Segment{pts[i], pts[i + 1], std::move(v), std::move(e), 0.0});
  }
  auto tolerance = [&](int c) {
    const double ref = abs_ref >= 0 ? std::abs(res.value(abs_ref)) : 1.0;
    return std::max(abs_tol * ref, rel_tol * std::abs(res.value(c)));
  };
  Vec scale(m);
  for (int c = 0; c < m; ++c) scale(c) = std::max(tolerance(c), std::numeric_limits<double>::min());
  auto priority = [&](const Vec& err) {
    double p = 0.0;
    for (int c = 0; c < m; ++c) p = std::max(p, err(c) / scale(c));
    return p;
  };
  auto cmp = [&](std::size_t l, std::size_t r) { return segs[l].priority < segs[r].priority; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    segs[i].priority = priority(segs[i].err);
    heap.push(i);
  }
  auto converged = [&]() {
    for (int c = 0; c < m; ++c)
      if (res.error(c) > tolerance(c)) return false;
    return true;
  };
  while (!(res.converged = converged()) && static_cast<int>(segs.size()) < max_panels && !heap.empty()) {
    const std::size_t i = heap.top();
    heap.pop();
    const double a = segs[i].a, b = segs[i].b, mid = 0.5 * (a + b);
    if (!(mid > a && mid < b)) continue;
    auto [v1, e1] = integrate_segment(a, mid);
    auto [v2, e2] = integrate_segment(mid, b);
    res.value += v1 + v2 - segs[i].val;
    res.error += e1 + e2 - segs[i].err;
    segs[i] = Segment{a, mid, std::move(v1), std::move(e1), 0.0};
    segs[i].priority = priority(segs[i].err);
    segs.push_back(Segment{mid, b, std::move(v2), std::move(e2), 0.0});
    segs.back().priority = priority(segs.back().err);
    heap.push(i);
    heap.push(segs.size() - 1);
  }
  // re-sum to remove drift from incremental updates
  res.value.setZero();
  res.error.setZero();
  for (const auto& s : segs) {
    res.value += s.val;
    res.error += s.err;
  }
  return res;
}

template <class G>
RawIntegral integrate_adaptive_1d(G& g, int m, const MixtureParams& p, const TruncationSpec& trunc,
                                  const QuadConfig& cfg) {
  const double sd = std::sqrt(p.sigma()(0, 0));
  const double nu = std::abs(p.mu()(0));
  const double inv_var = p.sigma_inv()(0, 0);
  const double log_norm = p.log_norm() - 0.5 * nu * nu * inv_var;
  double lo = -nu - cfg.window_radius * sd, hi = nu + cfg.window_radius * sd;
  const auto hull = trunc.support_hull(1);
  lo = std::max(lo, hull[0].lo);
  hi = std::min(hi, hull[0].hi);

  RawIntegral res;
  res.method = Method::Adaptive1D;
  if (!(lo < hi)) {
    res.value = Vec::Zero(m + 1);
    res.error = Vec::Zero(m + 1);
    finish_ratio(res);  // throws: no mass
    return res;
  }

  std::vector<double> pts = trunc.axis_breakpoints(1)[0];
  pts.push_back(0.0);
  pts.push_back(nu);
  pts.push_back(-nu);
  pts.push_back(lo);
  pts.push_back(hi);
  pts = sorted_unique(std::move(pts));
  // pre-split long pieces to about two standard deviations
  std::vector<double> cuts;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = std::max(pts[i], lo), b = std::min(pts[i + 1], hi);
    if (!(a < b)) continue;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / (2.0 * sd))));
    for (int j = 0; j <= n; ++j) cuts.push_back(a + (b - a) * j / n);
  }

  Vec x(1);
  auto weighted = [&](double t, std::span<double> out) {
    x(0) = t;
    const double lw = log_norm - 0.5 * t * t * inv_var + log_cosh(t * nu * inv_var);
    eval_weighted(g, x, lw, trunc, out);
  };
  auto ir = integrate_interval(weighted, m + 1, lo, hi, std::move(cuts), cfg.abs_tol, cfg.rel_tol, cfg.max_panels, 0);
  res.value = std::move(ir.value);
  res.error = std::move(ir.error);
  res.evaluations = ir.evaluations;
  finish_ratio(res);
  return res;
}

/// 15-node Gauss-Hermite rule for the weight exp(-t^2/2) (Golub-Welsch),
/// stored with that weight divided back out so it multiplies the full
/// integrand like a panel rule.
inline const PanelRule& hermite_rule() {
  static const PanelRule rule = [] {
    Mat jac = Mat::Zero(kRuleSize, kRuleSize);
    for (int i = 1; i < kRuleSize; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Mat> es(jac);
    PanelRule r;
    for (int i = 0; i < kRuleSize; ++i) {
      const double t = es.eigenvalues()(i);
      const double v0 = es.eigenvectors()(0, i);
      r.x[i] = t;
      r.wk[i] = std::sqrt(2.0 * std::numbers::pi) * v0 * v0 * std::exp(0.5 * t * t);
      r.wg[i] = r.wk[i];
    }
    return r;
  }();
  return rule;
}

inline double hermite_rule_mass() {
  static const double mass = [] {
    double s = 0.0;
    for (double w : hermite_rule().wk) s += w;
    return s;
  }();
  return mass;
}

// ---------------------------------------------------------------------------
// d = 2, 3 Cartesian cells, refined adaptively

template <class G>
RawIntegral integrate_tensor(G& g, int m, const MixtureParams& p, const TruncationSpec& trunc,
                             const QuadConfig& cfg, const IntegrandHints& hints) {
  const int d = p.dim();
  const bool axis_aligned = trunc.has_axis_breakpoints(d);
  // x = A z; axes k..d-1 (only for S = 1) carry a Gauss-Hermite rule
  Mat a;
  int k_gk = d;
  if (axis_aligned) {
    a = p.sigma().diagonal().cwiseSqrt().asDiagonal();
  } else if (trunc.is_constant_one()) {
    // rotate whitened coordinates so the centers and every tanh direction lie
    // in the leading axes; the integrand is Gaussian times a low-degree
    // polynomial along the rest
    Mat span(d, 1 + static_cast<int>(hints.tanh_directions.size()));
    span.col(0) = p.whitener().w * p.mu();
    for (std::size_t j = 0; j < hints.tanh_directions.size(); ++j)
      span.col(static_cast<int>(j) + 1) = p.whitener().w_inv * hints.tanh_directions[j];
    Eigen::ColPivHouseholderQR<Mat> qr(span);
    qr.setThreshold(1e-12);
    k_gk = static_cast<int>(qr.rank());
    const Mat q = qr.householderQ() * Mat::Identity(d, d);
    a = p.whitener().w_inv * q;
  } else {
    a = p.whitener().w_inv;
  }
  std::vector<bool> hermite(d, false);
  for (int i = k_gk; i < d; ++i) hermite[i] = true;
  const bool a_diag = (a - Mat(a.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  const Mat pz = a.transpose() * p.sigma_inv() * a;
  Vec a_nu = a.transpose() * p.sigma_inv() * p.mu();
  const double log_c = p.log_norm() + std::log(std::abs(a.determinant())) - 0.5 * p.mu().dot(p.sigma_inv() * p.mu());
  Vec c = a.inverse() * p.mu();
  for (int i = k_gk; i < d; ++i) c(i) = a_nu(i) = 0.0;
  // smallest singular value of W A bounds whitened distance from below
  const double smin = Eigen::JacobiSVD<Mat>(p.whitener().w * a).singularValues().minCoeff();

  const auto hull = trunc.support_hull(d);
  const auto breaks = trunc.axis_breakpoints(d);
  std::vector<std::vector<std::pair<double, double>>> panels(d);
  for (int i = 0; i < d; ++i) {
    if (hermite[i]) {
      panels[i] = {{0.0, 0.0}};
      continue;
    }
    double lo = -std::abs(c(i)) - cfg.window_radius, hi = std::abs(c(i)) + cfg.window_radius;
    std::vector<double> pts{0.0, c(i), -c(i)};
    if (a_diag) {
      lo = std::max(lo, hull[i].lo / a(i, i));
      hi = std::min(hi, hull[i].hi / a(i, i));
      for (double b : breaks[i]) pts.push_back(b / a(i, i));
    }
    const double s = sharpness(hints.tanh_directions, a, i);
    // start coarse; refinement below splits wherever the error demands it
    double h_core = 2.0 * kRuleSize / cfg.nodes_per_axis;
    if (s > 0) h_core = std::min(h_core, 1.5 / s);
    panels[i] = make_panels(lo, hi, pts, {c(i), -c(i)}, h_core, 4.0, 8.0);
  }

  RawIntegral res;
  res.method = Method::Tensor;
  res.value = Vec::Zero(m + 1);
  res.error = Vec::Zero(m + 1);
  for (int i = 0; i < d; ++i)
    if (panels[i].empty()) {
      finish_ratio(res);
      return res;
    }

  int nodes_per_cell = 1;
  for (int i = 0; i < d; ++i) nodes_per_cell *= kRuleSize;
  std::vector<double> fvals(static_cast<std::size_t>(nodes_per_cell * (m + 1)));
  std::vector<double> wk(static_cast<std::size_t>(nodes_per_cell));
  std::vector<double> buf(static_cast<std::size_t>(m + 1));
  std::vector<PanelRule> rules(d);
  Vec z(d), x(d);

  struct Cell {
    Vec lo, hi, val, err;
    double priority = 0.0;
  };
  auto eval_cell = [&](Cell& cell) {
    double vol = 1.0;
    for (int i = 0; i < d; ++i) {
      if (hermite[i]) {
        rules[i] = hermite_rule();
        vol *= hermite_rule_mass();
      } else {
        rules[i] = panel_rule(cell.lo(i), cell.hi(i));
        vol *= cell.hi(i) - cell.lo(i);
      }
    }
    Vec k = Vec::Zero(m + 1), gsum = Vec::Zero(m + 1), abs_sum = Vec::Zero(m + 1);
    std::array<int, 3> j{0, 0, 0};
    for (int n = 0; n < nodes_per_cell; ++n) {
      double w_k = 1.0, w_g = 1.0;
      for (int i = 0; i < d; ++i) {
        z(i) = rules[i].x[j[i]];
        w_k *= rules[i].wk[j[i]];
        w_g *= rules[i].wg[j[i]];
      }
      double quad_form = 0.0, proj = 0.0;
      for (int r = 0; r < d; ++r) {
        double xr = 0.0, pr = 0.0;
        for (int q = 0; q < d; ++q) {
          xr += a(r, q) * z(q);
          pr += pz(r, q) * z(q);
        }
        x(r) = xr;
        quad_form += z(r) * pr;
        proj += z(r) * a_nu(r);
      }
      const double lw = log_c - 0.5 * quad_form + log_cosh(proj);
      eval_weighted(g, x, lw, trunc, buf);
      for (int cc = 0; cc <= m; ++cc) {
        const double f = buf[cc];
        fvals[static_cast<std::size_t>(n * (m + 1) + cc)] = f;
        k(cc) += w_k * f;
        gsum(cc) += w_g * f;
        abs_sum(cc) += w_k * std::abs(f);
      }
      wk[n] = w_k;
      for (int i = d - 1; i >= 0; --i) {
        if (++j[i] < kRuleSize) break;
        j[i] = 0;
      }
    }
    res.evaluations += nodes_per_cell;
    cell.err.resize(m + 1);
    for (int cc = 0; cc <= m; ++cc) {
      const double mean = k(cc) / vol;
      double asc = 0.0;
      for (int n = 0; n < nodes_per_cell; ++n)
        asc += wk[n] * std::abs(fvals[static_cast<std::size_t>(n * (m + 1) + cc)] - mean);
      cell.err(cc) = quadpack_error(k(cc) - gsum(cc), abs_sum(cc), asc);
    }
    cell.val = std::move(k);
  };

  std::vector<Cell> cells;
  const double prune = cfg.window_radius + 1.0;
  std::vector<int> idx(d, 0);
  while (true) {
    Cell cell{Vec(d), Vec(d), Vec(), Vec(), 0.0};
    for (int i = 0; i < d; ++i) {
      cell.lo(i) = panels[i][idx[i]].first;
      cell.hi(i) = panels[i][idx[i]].second;
    }
    auto box_dist = [&](const Vec& ctr) {
      const Vec gap = (cell.lo - ctr).cwiseMax(ctr - cell.hi).cwiseMax(0.0);
      return gap.norm();
    };
    if (smin * box_dist(c) <= prune || smin * box_dist(Vec(-c)) <= prune) {
      eval_cell(cell);
      res.value += cell.val;
      res.error += cell.err;
      cells.push_back(std::move(cell));
    }
    int i = d - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < static_cast<int>(panels[i].size())) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }

  auto tolerance = [&](int cc) {
    return std::max(cfg.abs_tol * std::abs(res.value(0)), cfg.rel_tol * std::abs(res.value(cc)));
  };
  Vec scale(m + 1);
  for (int cc = 0; cc <= m; ++cc) scale(cc) = std::max(tolerance(cc), std::numeric_limits<double>::min());
  auto priority = [&](const Vec& err) {
    double pr = 0.0;
    for (int cc = 0; cc <= m; ++cc) pr = std::max(pr, err(cc) / scale(cc));
    return pr;
  };
  auto cmp = [&](std::size_t l, std::size_t r) { return cells[l].priority < cells[r].priority; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].priority = priority(cells[i].err);
    heap.push(i);
  }
  auto converged = [&]() {
    for (int cc = 0; cc <= m; ++cc)
      if (res.error(cc) > tolerance(cc)) return false;
    return true;
  };
  const std::size_t budget = static_cast<std::size_t>(cfg.max_panels) + cells.size();
  while (!converged() && cells.size() < budget && !heap.empty()) {
    const std::size_t i = heap.top();
    heap.pop();
    if (k_gk == 0) break;
    Eigen::Index axis = 0;
    (cells[i].hi - cells[i].lo).head(k_gk).maxCoeff(&axis);
    const double mid = 0.5 * (cells[i].lo(axis) + cells[i].hi(axis));
    if (!(mid > cells[i].lo(axis) && mid < cells[i].hi(axis))) continue;
    Cell left{cells[i].lo, cells[i].hi, Vec(), Vec(), 0.0};
    Cell right = left;
    left.hi(axis) = mid;
    right.lo(axis) = mid;
    eval_cell(left);
    eval_cell(right);
    res.value += left.val + right.val - cells[i].val;
    res.error += left.err + right.err - cells[i].err;
    left.priority = priority(left.err);
    right.priority = priority(right.err);
    cells[i] = std::move(left);
    cells.push_back(std::move(right));
    heap.push(i);
    heap.push(cells.size() - 1);
  }
  res.value.setZero();
  res.error.setZero();
  for (const auto& cell : cells) {
    res.value += cell.val;
    res.error += cell.err;
  }
  finish_ratio(res);
  return res;
}

// ---------------------------------------------------------------------------
// d = 2, 3 with oblique or curved boundaries: iterated integration in scaled
// coordinates z = x / sqrt(Sigma_ii). The outer axes use adaptive cells; the
// last axis is integrated line by line, split where the line crosses S.

template <class G>
RawIntegral integrate_iterated(G& g, int m, const MixtureParams& p, const TruncationSpec& trunc,
                               const QuadConfig& cfg, const IntegrandHints& hints) {
  const int d = p.dim();
  const int k = d - 1;  // outer axes
  const int l = d - 1;  // inner axis
  const Vec scale = p.sigma().diagonal().cwiseSqrt();
  const Mat a = scale.asDiagonal();
  const Mat pz = a.transpose() * p.sigma_inv() * a;
  const Vec a_nu = a.transpose() * p.sigma_inv() * p.mu();
  const double log_c = p.log_norm() + std::log(scale.prod()) - 0.5 * p.mu().dot(p.sigma_inv() * p.mu());
  const Vec c = p.mu().cwiseQuotient(scale);
  const double smin = Eigen::JacobiSVD<Mat>(p.whitener().w * a).singularValues().minCoeff();
  const double csd = 1.0 / std::sqrt(pz(l, l));
  const double radius = cfg.window_radius;

  const auto hull = trunc.support_hull(d);
  const auto breaks = trunc.axis_breakpoints(d);
  std::vector<std::vector<std::pair<double, double>>> panels(k);
  for (int i = 0; i < k; ++i) {
    const double lo = std::max(-std::abs(c(i)) - radius, hull[i].lo / scale(i));
    const double hi = std::min(std::abs(c(i)) + radius, hull[i].hi / scale(i));
    std::vector<double> pts{0.0, c(i), -c(i)};
    for (double b : breaks[i]) pts.push_back(b / scale(i));
    const double s = sharpness(hints.tanh_directions, a, i);
    double h_core = 2.0 * kRuleSize / cfg.nodes_per_axis;
    if (s > 0) h_core = std::min(h_core, 1.5 / s);
    panels[i] = make_panels(lo, hi, pts, {c(i), -c(i)}, h_core, 4.0, 8.0);
  }

  RawIntegral res;
  res.method = Method::Tensor;
  res.value = Vec::Zero(m + 1);
  res.error = Vec::Zero(m + 1);
  for (int i = 0; i < k; ++i)
    if (panels[i].empty()) {
      finish_ratio(res);
      return res;
    }

  const double t_lo = hull[l].lo / scale(l), t_hi = hull[l].hi / scale(l);
  const Vec dir = a.col(l);
  const double s_inner = sharpness(hints.tanh_directions, a, l);
  Vec z(d), x(d), x0(d);
  std::vector<double> buf(static_cast<std::size_t>(m + 1));

  // integral along the line through z_outer, with its error
  auto line = [&](const Vec& zo, Vec& val, Vec& err) {
    double shift = 0.0, shift_neg = 0.0;
    for (int i = 0; i < k; ++i) {
      shift += pz(l, i) * (zo(i) - c(i));
      shift_neg += pz(l, i) * (zo(i) + c(i));
    }
    const double m_plus = c(l) - shift / pz(l, l), m_minus = -c(l) - shift_neg / pz(l, l);
    const double lo = std::max(std::min(m_plus, m_minus) - radius * csd, t_lo);
    const double hi = std::min(std::max(m_plus, m_minus) + radius * csd, t_hi);
    val.setZero();
    err.setZero();
    if (!(lo < hi)) return;
    x0.setZero();
    for (int i = 0; i < k; ++i) x0 += a.col(i) * zo(i);
    std::vector<double> cuts = trunc.line_crossings(x0, dir);
    for (double mc : {m_plus, m_minus})
      for (double f : {0.0, 1.0, -1.0, 2.5, -2.5, 5.0, -5.0}) cuts.push_back(mc + f * csd);
    for (const auto& v : hints.tanh_directions) {
      const double vd = v.dot(dir);
      if (vd == 0.0) continue;
      const double t0 = -v.dot(x0) / vd;
      cuts.push_back(t0);
      if (s_inner > 0)
        for (double f : {-1.0, 1.0}) cuts.push_back(t0 + f * 1.5 / s_inner);
    }
    z.head(k) = zo;
    auto f = [&](double t, std::span<double> out) {
      z(l) = t;
      x = a * z;
      const double lw = log_c - 0.5 * z.dot(pz * z) + log_cosh(z.dot(a_nu));
      eval_weighted(g, x, lw, trunc, out);
    };
    auto r = integrate_interval(f, m + 1, lo, hi, std::move(cuts), 0.1 * cfg.abs_tol, cfg.rel_tol, cfg.max_panels, 0);
    res.evaluations += r.evaluations;
    val = std::move(r.value);
    err = std::move(r.error);
  };

  int nodes_per_cell = 1;
  for (int i = 0; i < k; ++i) nodes_per_cell *= kRuleSize;
  std::vector<PanelRule> rules(k);
  Vec zo(k), lv(m + 1), le(m + 1);
  std::vector<Vec> fvals(static_cast<std::size_t>(nodes_per_cell));
  std::vector<double> wk(static_cast<std::size_t>(nodes_per_cell));

  struct Cell {
    Vec lo, hi, val, err;
    double priority = 0.0;
  };
  auto eval_cell = [&](Cell& cell) {
    double vol = 1.0;
    for (int i = 0; i < k; ++i) {
      rules[i] = panel_rule(cell.lo(i), cell.hi(i));
      vol *= cell.hi(i) - cell.lo(i);
    }
    Vec kv = Vec::Zero(m + 1), gsum = Vec::Zero(m + 1), abs_sum = Vec::Zero(m + 1), inner = Vec::Zero(m + 1);
    std::array<int, 2> j{0, 0};
    for (int n = 0; n < nodes_per_cell; ++n) {
      double w_k = 1.0, w_g = 1.0;
      for (int i = 0; i < k; ++i) {
        zo(i) = rules[i].x[j[i]];
        w_k *= rules[i].wk[j[i]];
        w_g *= rules[i].wg[j[i]];
      }
      line(zo, lv, le);
      kv += w_k * lv;
      gsum += w_g * lv;
      abs_sum += w_k * lv.cwiseAbs();
      inner += w_k * le;
      fvals[n] = lv;
      wk[n] = w_k;
      for (int i = k - 1; i >= 0; --i) {
        if (++j[i] < kRuleSize) break;
        j[i] = 0;
      }
    }
    cell.err.resize(m + 1);
    for (int cc = 0; cc <= m; ++cc) {
      const double mean = kv(cc) / vol;
      double asc = 0.0;
      for (int n = 0; n < nodes_per_cell; ++n) asc += wk[n] * std::abs(fvals[n](cc) - mean);
      cell.err(cc) = quadpack_error(kv(cc) - gsum(cc), abs_sum(cc), asc) + inner(cc);
    }
    cell.val = std::move(kv);
  };

  std::vector<Cell> cells;
  const double prune = radius + 1.0;
  const Vec co = c.head(k);
  std::vector<int> idx(k, 0);
  while (true) {
    Cell cell{Vec(k), Vec(k), Vec(), Vec(), 0.0};
    for (int i = 0; i < k; ++i) {
      cell.lo(i) = panels[i][idx[i]].first;
      cell.hi(i) = panels[i][idx[i]].second;
    }
    auto box_dist = [&](const Vec& ctr) { return (cell.lo - ctr).cwiseMax(ctr - cell.hi).cwiseMax(0.0).norm(); };
    if (smin * box_dist(co) <= prune || smin * box_dist(Vec(-co)) <= prune) {
      eval_cell(cell);
      res.value += cell.val;
      res.error += cell.err;
      cells.push_back(std::move(cell));
    }
    int i = k - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < static_cast<int>(panels[i].size())) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }

  auto tolerance = [&](int cc) {
    return std::max(cfg.abs_tol * std::abs(res.value(0)), cfg.rel_tol * std::abs(res.value(cc)));
  };
  Vec tol_scale(m + 1);
  for (int cc = 0; cc <= m; ++cc) tol_scale(cc) = std::max(tolerance(cc), std::numeric_limits<double>::min());
  auto priority = [&](const Vec& err) {
    double pr = 0.0;
    for (int cc = 0; cc <= m; ++cc) pr = std::max(pr, err(cc) / tol_scale(cc));
    return pr;
  };
  auto cmp = [&](std::size_t lhs, std::size_t rhs) { return cells[lhs].priority < cells[rhs].priority; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].priority = priority(cells[i].err);
    heap.push(i);
  }
  auto converged = [&]() {
    for (int cc = 0; cc <= m; ++cc)
      if (res.error(cc) > tolerance(cc)) return false;
    return true;
  };
  const std::size_t budget = static_cast<std::size_t>(cfg.max_panels / (k == 1 ? 10 : 40)) + cells.size();
  while (!converged() && cells.size() < budget && !heap.empty()) {
    const std::size_t i = heap.top();
    heap.pop();
    Eigen::Index axis = 0;
    (cells[i].hi - cells[i].lo).maxCoeff(&axis);
    const double mid = 0.5 * (cells[i].lo(axis) + cells[i].hi(axis));
    if (!(mid > cells[i].lo(axis) && mid < cells[i].hi(axis))) continue;
    Cell left{cells[i].lo, cells[i].hi, Vec(), Vec(), 0.0};
    Cell right = left;
    left.hi(axis) = mid;
    right.lo(axis) = mid;
    eval_cell(left);
    eval_cell(right);
    res.value += left.val + right.val - cells[i].val;
    res.error += left.err + right.err - cells[i].err;
    left.priority = priority(left.err);
    right.priority = priority(right.err);
    cells[i] = std::move(left);
    cells.push_back(std::move(right));
    heap.push(i);
    heap.push(cells.size() - 1);
  }
  res.value.setZero();
  res.error.setZero();
  for (const auto& cell : cells) {
    res.value += cell.val;
    res.error += cell.err;
  }
  finish_ratio(res);
  return res;
}

// ---------------------------------------------------------------------------
// d = 2, 3 radial shells: whitened polar / spherical coordinates with a
// periodic trapezoid rule in the azimuth.

inline int azimuth_points(double r_eff, double s, double kappa) {
  double n = 64.0;
  if (s > 0 && r_eff > 0) n = std::max(n, 40.0 / std::asinh(std::numbers::pi / (2.0 * r_eff * s)));
  n = std::max(n, 2.0 * (kappa + 10.0 * std::sqrt(kappa) + 20.0));
  int out = 64;
  while (out < n && out < 8192) out *= 2;
  return out;
}

template <class G>
RawIntegral integrate_radial(G& g, int m, const MixtureParams& p, const TruncationSpec& trunc,
                             const QuadConfig& cfg, const IntegrandHints& hints,
                             const std::vector<Interval>& shells) {
  const int d = p.dim();
  const Mat& root = p.whitener().w_inv;  // x = Sigma^{1/2} y
  const Vec c = p.whitener().w * p.mu();
  const double cn = c.norm();
  const double log_c = -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * cn * cn;
  double s = 0.0;
  for (const auto& v : hints.tanh_directions) s = std::max(s, (root * v).norm());
  double h_core = static_cast<double>(kRuleSize) / cfg.nodes_per_axis;
  if (s > 0) h_core = std::min(h_core, 1.5 / s);

  const double rmax = cn + cfg.window_radius;
  std::vector<std::pair<double, double>> rpanels;
  for (const auto& sh : shells) {
    const double lo = std::max(0.0, sh.lo), hi = std::min(rmax, sh.hi);
    if (!(lo < hi)) continue;
    auto ps = make_panels(lo, hi, {cn}, {cn}, h_core);
    rpanels.insert(rpanels.end(), ps.begin(), ps.end());
  }
  std::sort(rpanels.begin(), rpanels.end());

  const double r_eff = std::min(rmax, cn + 6.0);
  const int n_az = azimuth_points(r_eff, s, r_eff * cn);

  // polar angle panels in u = cos(theta) for d = 3
  std::vector<PanelRule> urules;
  if (d == 3) {
    const double hu = std::min(0.25, s > 0 ? 1.0 / (s * r_eff) : 0.25);
    const int nu = std::max(8, static_cast<int>(std::ceil(2.0 / hu)));
    for (int i = 0; i < nu; ++i) urules.push_back(panel_rule(-1.0 + 2.0 * i / nu, -1.0 + 2.0 * (i + 1) / nu));
  } else {
    urules.push_back(PanelRule{});  // unused single slot
  }

  RawIntegral res;
  res.method = Method::Tensor;
  res.value = Vec::Zero(m + 1);
  res.error = Vec::Zero(m + 1);
  Vec az_err = Vec::Zero(m + 1);
  std::vector<double> buf(static_cast<std::size_t>(m + 1));
  Vec y(d), x(d);
  std::vector<double> cos_t(n_az), sin_t(n_az);
  for (int t = 0; t < n_az; ++t) {
    const double th = 2.0 * std::numbers::pi * t / n_az;
    cos_t[t] = std::cos(th);
    sin_t[t] = std::sin(th);
  }
  const double dth = 2.0 * std::numbers::pi / n_az;
  const int n_u = d == 3 ? kRuleSize : 1;
  const int nodes_per_cell = kRuleSize * n_u;
  std::vector<double> fvals(static_cast<std::size_t>(nodes_per_cell * (m + 1)));
  std::vector<double> wk(static_cast<std::size_t>(nodes_per_cell));

  for (const auto& [ra, rb] : rpanels) {
    const PanelRule rr = panel_rule(ra, rb);
    for (const auto& ur : urules) {
      Vec k = Vec::Zero(m + 1), gsum = Vec::Zero(m + 1), abs_sum = Vec::Zero(m + 1);
      double vol = rb - ra;
      if (d == 3) vol *= 2.0 / static_cast<double>(urules.size());
      int n = 0;
      for (int ir = 0; ir < kRuleSize; ++ir) {
        for (int iu = 0; iu < n_u; ++iu, ++n) {
          const double r = rr.x[ir];
          double jac = r, rho = r, zc = 0.0, w_k = rr.wk[ir], w_g = rr.wg[ir];
          if (d == 3) {
            const double u = ur.x[iu];
            rho = r * std::sqrt(std::max(0.0, 1.0 - u * u));
            zc = r * u;
            jac = r * r;
            w_k *= ur.wk[iu];
            w_g *= ur.wg[iu];
          }
          // azimuthal trapezoid, full and even-index half rule
          Vec full = Vec::Zero(m + 1), half = Vec::Zero(m + 1);
          for (int t = 0; t < n_az; ++t) {
            y(0) = rho * cos_t[t];
            y(1) = rho * sin_t[t];
            if (d == 3) y(2) = zc;
            x.noalias() = root * y;
            const double lw = log_c - 0.5 * y.squaredNorm() + log_cosh(y.dot(c));
            eval_weighted(g, x, lw, trunc, buf);
            for (int cc = 0; cc <= m; ++cc) {
              full(cc) += buf[cc];
              if (t % 2 == 0) half(cc) += buf[cc];
            }
          }
          res.evaluations += n_az;
          full *= jac * dth;
          half *= jac * 2.0 * dth;
          az_err += w_k * (full - half).cwiseAbs();
          for (int cc = 0; cc <= m; ++cc) {
            fvals[static_cast<std::size_t>(n * (m + 1) + cc)] = full(cc);
            k(cc) += w_k * full(cc);
            gsum(cc) += w_g * full(cc);
            abs_sum(cc) += w_k * std::abs(full(cc));
          }
          wk[n] = w_k;
        }
      }
      for (int cc = 0; cc <= m; ++cc) {
        const double mean = k(cc) / vol;
        double asc = 0.0;
        for (int i = 0; i < nodes_per_cell; ++i)
          asc += wk[i] * std::abs(fvals[static_cast<std::size_t>(i * (m + 1) + cc)] - mean);
        res.error(cc) += quadpack_error(k(cc) - gsum(cc), abs_sum(cc), asc);
      }
      res.value += k;
    }
  }
  res.error += az_err;
  finish_ratio(res);
  return res;
}

// ---------------------------------------------------------------------------
// Monte Carlo: importance sampling from the untruncated mixture.

template <class G>
RawIntegral integrate_monte_carlo(G& g, int m, const MixtureParams& p, const TruncationSpec& trunc,
                                  const QuadConfig& cfg) {
  const int d = p.dim();
  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  const Mat& root = p.whitener().w_inv;
  Vec s1 = Vec::Zero(m + 1), s2 = Vec::Zero(m + 1), s2g = Vec::Zero(m + 1), s2gg = Vec::Zero(m + 1);
  std::vector<double> gv(static_cast<std::size_t>(m));
  Vec y(d), x(d);
  const long n = cfg.mc_samples;
  for (long i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) y(k) = normal(rng);
    const double sign = coin(rng) ? 1.0 : -1.0;
    x.noalias() = sign * p.mu() + root * y;
    const double s = trunc(x);
    if (!(s >= 0.0 && s <= 1.0)) throw QuadratureFailure("truncation evaluator left [0,1]");
    s1(0) += s;
    s2(0) += s * s;
    if (s == 0.0) continue;
    g(x, std::span<double>(gv));
    for (int k = 0; k < m; ++k) {
      if (!std::isfinite(gv[k])) throw QuadratureFailure("non-finite integrand value");
      s1(k + 1) += s * gv[k];
      s2g(k + 1) += s * s * gv[k];
      s2gg(k + 1) += s * s * gv[k] * gv[k];
    }
  }
  const double nn = static_cast<double>(n);
  RawIntegral res;
  res.method = Method::MonteCarlo;
  res.evaluations = n;
  res.value = s1 / nn;
  res.error = Vec::Zero(m + 1);
  const double z = res.value(0);
  res.error(0) = std::sqrt(std::max(0.0, s2(0) / nn - z * z) / nn);
  for (int k = 1; k <= m; ++k) {
    const double mean = res.value(k);
    res.error(k) = std::sqrt(std::max(0.0, s2gg(k) / nn - mean * mean) / nn);
  }
  if (z > 0) {
    // delta method: Var(N/Z) ~ E[s^2 (g - R)^2] / (n Z^2)
    res.ratio_error.resize(m);
    const double es2 = s2(0) / nn;
    for (int k = 1; k <= m; ++k) {
      const double r = res.value(k) / z;
      const double v = s2gg(k) / nn - 2.0 * r * s2g(k) / nn + r * r * es2;
      res.ratio_error(k - 1) = std::sqrt(std::max(0.0, v) / nn) / z;
    }
  }
  finish_ratio(res);
  return res;
}

inline bool radial_metric_matches(const MixtureParams& p, const Mat& metric) {
  const Mat target = p.sigma_inv();
  const Mat mm = metric.size() == 0 ? Mat::Identity(p.dim(), p.dim()) : metric;
  return (mm - target).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, target.cwiseAbs().maxCoeff());
}

}  // namespace detail

/// Raw (Z, N) integration of w(x) S(x) [1, g(x)], where w is the untruncated
/// mixture density for `params` and g writes `m` values into its span.
template <class G>
detail::RawIntegral integrate_moments(G&& g, int m, const MixtureParams& params, const TruncationSpec& trunc,
                                      const QuadConfig& cfg, const IntegrandHints& hints = {}) {
  cfg.validate();
  const int d = params.dim();
  trunc.check_dimension(d);
  MethodChoice method = cfg.method;
  if (method == MethodChoice::Auto)
    method = d == 1 ? MethodChoice::Adaptive1D : (d <= 3 ? MethodChoice::Tensor : MethodChoice::MonteCarlo);
  switch (method) {
    case MethodChoice::Adaptive1D:
      if (d != 1) throw InvalidArgument("adaptive 1-D quadrature requires d = 1");
      return detail::integrate_adaptive_1d(g, m, params, trunc, cfg);
    case MethodChoice::Tensor: {
      if (d == 1) return detail::integrate_adaptive_1d(g, m, params, trunc, cfg);
      if (d > 3) throw InvalidArgument("tensor quadrature supports d <= 3");
      if (auto shells = trunc.radial_shells(); shells && detail::radial_metric_matches(params, shells->second))
        return detail::integrate_radial(g, m, params, trunc, cfg, hints, shells->first);
      if (trunc.has_oblique_boundaries()) return detail::integrate_iterated(g, m, params, trunc, cfg, hints);
      return detail::integrate_tensor(g, m, params, trunc, cfg, hints);
    }
    case MethodChoice::MonteCarlo:
    case MethodChoice::Auto:
      break;
  }
  return detail::integrate_monte_carlo(g, m, params, trunc, cfg);
}

namespace detail {
template <class T>
Estimate<T> make_estimate(T value, const RawIntegral& raw) {
  Estimate<T> e;
  e.value = std::move(value);
  e.error_estimate = raw.ratio_error.size() ? raw.ratio_error.cwiseAbs().maxCoeff() : 0.0;
  e.method = raw.method;
  if (raw.value(0) < kLowMassWarning)
    e.warnings.push_back("survival mass " + std::to_string(raw.value(0)) +
                         " is below 1e-6; integration noise may dominate");
  return e;
}
}  // namespace detail

using detail::integrate_interval;
using detail::IntervalResult;

/// alpha = ∫ f_mu S for the mixture `params`.
inline Estimate<double> survival_mass(const MixtureParams& params, const TruncationSpec& trunc,
                                      const QuadConfig& cfg = {}) {
  auto raw = integrate_moments([](const Vec&, std::span<double>) {}, 0, params, trunc, cfg);
  Estimate<double> e;
  e.value = raw.value(0);
  e.error_estimate = raw.error(0);
  e.method = raw.method;
  if (e.value < kLowMassWarning)
    e.warnings.push_back("survival mass " + std::to_string(e.value) + " is below 1e-6; integration noise may dominate");
  return e;
}

/// E_{params,S}[g(x)] for g returning double, Vec or Mat. All entries of a
/// vector or matrix integrand share one node set.
template <class G>
auto expect(G&& g, const MixtureParams& params, const TruncationSpec& trunc, const QuadConfig& cfg = {},
            const IntegrandHints& hints = {}) {
  using R = std::decay_t<std::invoke_result_t<G&, const Vec&>>;
  if constexpr (std::is_arithmetic_v<R>) {
    auto raw = integrate_moments([&](const Vec& x, std::span<double> out) { out[0] = g(x); }, 1, params, trunc,
                                 cfg, hints);
    return detail::make_estimate<double>(raw.ratio(0), raw);
  } else {
    const R probe = g(params.mu());
    const auto rows = probe.rows(), cols = probe.cols();
    const int m = static_cast<int>(rows * cols);
    auto raw = integrate_moments(
        [&](const Vec& x, std::span<double> out) {
          const R v = g(x);
          if (v.rows() != rows || v.cols() != cols) throw DimensionMismatch("integrand changed shape");
          for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) out[static_cast<std::size_t>(j * rows + i)] = v(i, j);
        },
        m, params, trunc, cfg, hints);
    if constexpr (R::ColsAtCompileTime == 1) {
      return detail::make_estimate<Vec>(raw.ratio, raw);
    } else {
      Mat out = Eigen::Map<const Mat>(raw.ratio.data(), rows, cols);
      return detail::make_estimate<Mat>(std::move(out), raw);
    }
  }
}

}  // namespace truncem

#endif  // TRUNCEM_QUAD_HPP
