#ifndef TRUNCEM_MODEL_HPP
#define TRUNCEM_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "truncem/errors.hpp"
#include "truncem/linalg.hpp"

namespace truncem {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(cosh(u)) without overflow.
inline double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

/// Σ^{-1/2} and its inverse Σ^{1/2}, the unique SPD roots.
struct Whitener {
  Mat w;
  Mat w_inv;

  Vec apply(const Vec& x) const { return w * x; }
  Vec unapply(const Vec& y) const { return w_inv * y; }
};

inline Whitener whiten(const Mat& sigma) {
  auto roots = symmetric_roots(sigma);
  return Whitener{std::move(roots.inv_root), std::move(roots.root)};
}

/// Means ±mu and shared known covariance sigma of the balanced two-component
/// mixture. Immutable after construction.
class MixtureParams {
 public:
  MixtureParams(Vec mu, Mat sigma) : mu_(std::move(mu)), sigma_(std::move(sigma)) {
    if (mu_.size() < 1) throw DimensionMismatch("MixtureParams: dimension must be at least 1");
    if (sigma_.rows() != mu_.size() || sigma_.cols() != mu_.size())
      throw DimensionMismatch("MixtureParams: sigma must be d x d with d = dim(mu)");
    if (!mu_.allFinite()) throw InvalidArgument("MixtureParams: mu has non-finite entries");
    require_spd(sigma_, "MixtureParams sigma");
    sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();
    derive();
  }

  static MixtureParams isotropic(Vec mu, double variance = 1.0) {
    const auto d = mu.size();
    return MixtureParams(std::move(mu), variance * Mat::Identity(d, d));
  }

  int dim() const { return static_cast<int>(mu_.size()); }
  const Vec& mu() const { return mu_; }
  const Mat& sigma() const { return sigma_; }
  const Mat& sigma_inv() const { return sigma_inv_; }
  const Whitener& whitener() const { return whitener_; }
  /// log of the Gaussian normalizing constant, -0.5 log det(2 pi Sigma).
  double log_norm() const { return log_norm_; }

  /// Same covariance (and cached factorizations) with a different mean.
  MixtureParams with_mean(Vec mu) const {
    if (mu.size() != mu_.size()) throw DimensionMismatch("with_mean: dimension mismatch");
    MixtureParams out = *this;
    out.mu_ = std::move(mu);
    return out;
  }

  /// Mahalanobis norm sqrt(v^T Sigma^{-1} v).
  double whitened_norm(const Vec& v) const { return std::sqrt(v.dot(sigma_inv_ * v)); }

 private:
  void derive() {
    whitener_ = whiten(sigma_);
    sigma_inv_ = whitener_.w * whitener_.w;
    sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();
    Eigen::LLT<Mat> llt(sigma_);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    log_norm_ = -0.5 * (dim() * std::log(2.0 * std::numbers::pi) + log_det);
  }

  Vec mu_;
  Mat sigma_;
  Mat sigma_inv_;
  Whitener whitener_;
  double log_norm_ = 0.0;
};

/// 0.5 N(x; -mu, Sigma) + 0.5 N(x; mu, Sigma).
inline double mixture_density(const MixtureParams& params, const Vec& x) {
  if (x.size() != params.dim()) throw DimensionMismatch("mixture_density: dim(x) != d");
  const Vec sx = params.sigma_inv() * x;
  const double q = x.dot(sx) + params.mu().dot(params.sigma_inv() * params.mu());
  return std::exp(params.log_norm() - 0.5 * q + log_cosh(sx.dot(params.mu())));
}

// ---------------------------------------------------------------------------
// Truncation specifications

/// Closed interval; either end may be infinite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

class TruncationSpec;

namespace trunc {

struct ConstantOne {};

/// Product of per-axis closed intervals.
struct Box {
  std::vector<Interval> axes;
};

/// Union of shells l_i <= sqrt(x^T M x) <= r_i. An empty metric is replaced
/// by Sigma^{-1} when the truncation is bound to a model (Euclidean until then).
struct AnnulusUnion {
  std::vector<Interval> radii;
  Mat metric;
};

/// { x : normal . x >= offset }.
struct HalfSpace {
  Vec normal;
  double offset = 0.0;
};

/// Pointwise maximum of the parts (set union for indicators).
struct Union {
  std::vector<TruncationSpec> parts;
};

/// Arbitrary [0,1]-valued evaluator. `family`/`params`/`axis` describe the
/// built-in families so the truncation can be written back to a config file;
/// evaluators built from a raw callable use family "custom".
struct Soft {
  std::string family;
  std::vector<double> params;
  int axis = 0;
  std::shared_ptr<const std::function<double(const Vec&)>> fn;
  std::vector<std::vector<double>> breakpoints;
};

}  // namespace trunc

class TruncationSpec {
 public:
  using Kind = std::variant<trunc::ConstantOne, trunc::Box, trunc::AnnulusUnion, trunc::HalfSpace,
                            trunc::Union, trunc::Soft>;

  TruncationSpec() : kind_(trunc::ConstantOne{}), declared_even_(true), declared_rotation_invariant_(true) {}

  static TruncationSpec none() { return TruncationSpec(); }

  static TruncationSpec box(std::vector<Interval> axes) {
    if (axes.empty()) throw InvalidArgument("box truncation needs at least one axis");
    bool even = true;
    for (const auto& a : axes) {
      if (!(a.lo <= a.hi) || std::isnan(a.lo) || std::isnan(a.hi))
        throw InvalidArgument("box truncation: interval with lo > hi");
      even = even && (a.lo == -a.hi);
    }
    return TruncationSpec(trunc::Box{std::move(axes)}, even, false);
  }

  /// One-dimensional [lo, hi].
  static TruncationSpec interval(double lo, double hi) { return box({Interval{lo, hi}}); }

  static TruncationSpec annuli(std::vector<Interval> radii, Mat metric = Mat()) {
    if (radii.empty()) throw InvalidArgument("annulus truncation needs at least one shell");
    for (const auto& r : radii)
      if (!(r.lo >= 0.0 && r.lo < r.hi))
        throw InvalidArgument("annulus truncation: shells need 0 <= l < r <= inf");
    return TruncationSpec(trunc::AnnulusUnion{std::move(radii), std::move(metric)}, true, true);
  }

  static TruncationSpec half_space(Vec normal, double offset) {
    if (normal.size() == 0 || normal.norm() == 0.0)
      throw InvalidArgument("half-space truncation needs a non-zero normal");
    return TruncationSpec(trunc::HalfSpace{std::move(normal), offset}, false, false);
  }

  static TruncationSpec union_of(std::vector<TruncationSpec> parts) {
    if (parts.empty()) throw InvalidArgument("union truncation needs at least one part");
    bool even = true, rot = true;
    for (const auto& p : parts) {
      even = even && p.declared_even();
      rot = rot && p.declared_rotation_invariant();
    }
    return TruncationSpec(trunc::Union{std::move(parts)}, even, rot);
  }

  /// S(x) = lo + (hi - lo) * 1{x[axis] > threshold}.
  static TruncationSpec soft_step(double lo, double hi, double threshold, int axis = 0) {
    check_levels(lo, hi);
    auto fn = [=](const Vec& x) { return x(axis) > threshold ? hi : lo; };
    return soft_family("step", {lo, hi, threshold}, axis, fn, {threshold});
  }

  /// Linear ramp from level `lo` at x[axis] <= a up to `hi` at x[axis] >= b.
  static TruncationSpec soft_ramp(double a, double b, double lo = 0.0, double hi = 1.0, int axis = 0) {
    check_levels(lo, hi);
    if (!(a < b)) throw InvalidArgument("soft ramp needs a < b");
    auto fn = [=](const Vec& x) {
      const double t = std::clamp((x(axis) - a) / (b - a), 0.0, 1.0);
      return lo + (hi - lo) * t;
    };
    return soft_family("ramp", {a, b, lo, hi}, axis, fn, {a, b});
  }

  /// Smooth logistic lo + (hi - lo) / (1 + exp(-(x[axis] - center) / scale)).
  static TruncationSpec soft_logistic(double center, double scale, double lo = 0.0, double hi = 1.0,
                                      int axis = 0) {
    check_levels(lo, hi);
    if (!(scale > 0)) throw InvalidArgument("soft logistic needs scale > 0");
    auto fn = [=](const Vec& x) { return lo + (hi - lo) / (1.0 + std::exp(-(x(axis) - center) / scale)); };
    return soft_family("logistic", {center, scale, lo, hi}, axis, fn, {center});
  }

  /// Arbitrary piecewise-continuous evaluator with its per-axis discontinuity
  /// locations.
  static TruncationSpec soft(std::function<double(const Vec&)> fn,
                             std::vector<std::vector<double>> breakpoints = {}, bool even = false,
                             bool rotation_invariant = false) {
    trunc::Soft s{"custom", {}, 0, std::make_shared<const std::function<double(const Vec&)>>(std::move(fn)),
                  std::move(breakpoints)};
    return TruncationSpec(std::move(s), even, rotation_invariant);
  }

  const Kind& kind() const { return kind_; }
  bool declared_even() const { return declared_even_; }
  bool declared_rotation_invariant() const { return declared_rotation_invariant_; }

  TruncationSpec with_flags(bool even, bool rotation_invariant) const {
    TruncationSpec out = *this;
    out.declared_even_ = even;
    out.declared_rotation_invariant_ = rotation_invariant;
    return out;
  }

  std::string kind_name() const {
    static const char* names[] = {"none", "box", "annulus", "halfspace", "union", "soft"};
    return names[kind_.index()];
  }

  bool is_constant_one() const { return std::holds_alternative<trunc::ConstantOne>(kind_); }

  double operator()(const Vec& x) const {
    return std::visit([&](const auto& k) { return eval(k, x); }, kind_);
  }

  /// Binds Mahalanobis annuli without an explicit metric to Sigma^{-1}.
  TruncationSpec bound_to(const MixtureParams& params) const {
    TruncationSpec out = *this;
    out.bind(params.sigma_inv());
    return out;
  }

  /// Throws DimensionMismatch if the truncation cannot be evaluated in dimension d.
  void check_dimension(int d) const {
    std::visit([&](const auto& k) { check_dim(k, d); }, kind_);
  }

  /// Sorted discontinuity locations along each coordinate axis.
  std::vector<std::vector<double>> axis_breakpoints(int d) const {
    std::vector<std::vector<double>> out(d);
    collect_breakpoints(out);
    for (auto& v : out) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return out;
  }

  bool has_axis_breakpoints(int d) const {
    for (const auto& v : axis_breakpoints(d))
      if (!v.empty()) return true;
    return false;
  }

  /// True when some hard boundary is not a coordinate hyperplane.
  bool has_oblique_boundaries() const {
    if (std::holds_alternative<trunc::AnnulusUnion>(kind_)) return true;
    if (const auto* h = std::get_if<trunc::HalfSpace>(&kind_)) return (h->normal.array() != 0.0).count() > 1;
    if (const auto* u = std::get_if<trunc::Union>(&kind_))
      return std::any_of(u->parts.begin(), u->parts.end(), [](const auto& p) { return p.has_oblique_boundaries(); });
    return false;
  }

  /// Values of t at which x0 + t dir crosses a discontinuity of S.
  std::vector<double> line_crossings(const Vec& x0, const Vec& dir) const {
    std::vector<double> out;
    collect_crossings(x0, dir, out);
    return out;
  }

  /// Axis-aligned hull of the support (infinite where unknown).
  std::vector<Interval> support_hull(int d) const {
    return std::visit([&](const auto& k) { return hull(k, d); }, kind_);
  }

  /// Shell radii when S is a (union of) Mahalanobis annuli, with the metric.
  std::optional<std::pair<std::vector<Interval>, Mat>> radial_shells() const {
    if (const auto* a = std::get_if<trunc::AnnulusUnion>(&kind_)) return std::make_pair(a->radii, a->metric);
    if (const auto* u = std::get_if<trunc::Union>(&kind_)) {
      std::vector<Interval> radii;
      Mat metric;
      for (const auto& p : u->parts) {
        auto sub = p.radial_shells();
        if (!sub) return std::nullopt;
        if (metric.size() == 0) {
          metric = sub->second;
        } else if (sub->second.size() != metric.size() || (sub->second - metric).norm() != 0.0) {
          return std::nullopt;
        }
        radii.insert(radii.end(), sub->first.begin(), sub->first.end());
      }
      return std::make_pair(std::move(radii), std::move(metric));
    }
    return std::nullopt;
  }

 private:
  TruncationSpec(Kind k, bool even, bool rot)
      : kind_(std::move(k)), declared_even_(even), declared_rotation_invariant_(rot) {}

  static void check_levels(double lo, double hi) {
    if (!(lo >= 0.0 && lo <= 1.0 && hi >= 0.0 && hi <= 1.0))
      throw InvalidArgument("soft truncation levels must lie in [0,1]");
  }

  template <class F>
  static TruncationSpec soft_family(std::string family, std::vector<double> params, int axis, F fn,
                                    std::vector<double> breaks) {
    if (axis < 0) throw InvalidArgument("soft truncation axis must be non-negative");
    std::vector<std::vector<double>> bp(static_cast<std::size_t>(axis) + 1);
    bp[axis] = std::move(breaks);
    trunc::Soft s{std::move(family), std::move(params), axis,
                  std::make_shared<const std::function<double(const Vec&)>>(std::move(fn)), std::move(bp)};
    return TruncationSpec(std::move(s), false, false);
  }

  static double eval(const trunc::ConstantOne&, const Vec&) { return 1.0; }
  static double eval(const trunc::Box& b, const Vec& x) {
    for (std::size_t i = 0; i < b.axes.size(); ++i)
      if (!b.axes[i].contains(x(static_cast<Eigen::Index>(i)))) return 0.0;
    return 1.0;
  }
  static double eval(const trunc::AnnulusUnion& a, const Vec& x) {
    const double r = a.metric.size() == 0 ? x.norm() : std::sqrt(x.dot(a.metric * x));
    for (const auto& s : a.radii)
      if (s.contains(r)) return 1.0;
    return 0.0;
  }
  static double eval(const trunc::HalfSpace& h, const Vec& x) { return h.normal.dot(x) >= h.offset ? 1.0 : 0.0; }
  static double eval(const trunc::Union& u, const Vec& x) {
    double v = 0.0;
    for (const auto& p : u.parts) v = std::max(v, p(x));
    return v;
  }
  static double eval(const trunc::Soft& s, const Vec& x) { return (*s.fn)(x); }

  static void check_dim(const trunc::ConstantOne&, int) {}
  static void check_dim(const trunc::Box& b, int d) {
    if (static_cast<int>(b.axes.size()) != d) throw DimensionMismatch("box truncation has wrong number of axes");
  }
  static void check_dim(const trunc::AnnulusUnion& a, int d) {
    if (a.metric.size() != 0 && (a.metric.rows() != d || a.metric.cols() != d))
      throw DimensionMismatch("annulus metric has wrong dimension");
  }
  static void check_dim(const trunc::HalfSpace& h, int d) {
    if (h.normal.size() != d) throw DimensionMismatch("half-space normal has wrong dimension");
  }
  static void check_dim(const trunc::Union& u, int d) {
    for (const auto& p : u.parts) p.check_dimension(d);
  }
  static void check_dim(const trunc::Soft& s, int d) {
    if (s.axis >= d) throw DimensionMismatch("soft truncation axis out of range");
    if (static_cast<int>(s.breakpoints.size()) > d) throw DimensionMismatch("soft breakpoints exceed dimension");
  }

  void collect_breakpoints(std::vector<std::vector<double>>& out) const {
    const int d = static_cast<int>(out.size());
    if (const auto* b = std::get_if<trunc::Box>(&kind_)) {
      for (int i = 0; i < d && i < static_cast<int>(b->axes.size()); ++i) {
        if (std::isfinite(b->axes[i].lo)) out[i].push_back(b->axes[i].lo);
        if (std::isfinite(b->axes[i].hi)) out[i].push_back(b->axes[i].hi);
      }
    } else if (const auto* a = std::get_if<trunc::AnnulusUnion>(&kind_)) {
      if (d == 1) {
        const double scale = a->metric.size() == 0 ? 1.0 : 1.0 / std::sqrt(a->metric(0, 0));
        for (const auto& s : a->radii) {
          for (double r : {s.lo, s.hi}) {
            if (std::isfinite(r) && r > 0) {
              out[0].push_back(r * scale);
              out[0].push_back(-r * scale);
            }
          }
        }
      }
    } else if (const auto* h = std::get_if<trunc::HalfSpace>(&kind_)) {
      int nonzero = 0, axis = 0;
      for (int i = 0; i < h->normal.size(); ++i)
        if (h->normal(i) != 0.0) ++nonzero, axis = i;
      if (nonzero == 1 && axis < d) out[axis].push_back(h->offset / h->normal(axis));
    } else if (const auto* u = std::get_if<trunc::Union>(&kind_)) {
      for (const auto& p : u->parts) p.collect_breakpoints(out);
    } else if (const auto* s = std::get_if<trunc::Soft>(&kind_)) {
      for (int i = 0; i < d && i < static_cast<int>(s->breakpoints.size()); ++i)
        out[i].insert(out[i].end(), s->breakpoints[i].begin(), s->breakpoints[i].end());
    }
  }

  void collect_crossings(const Vec& x0, const Vec& dir, std::vector<double>& out) const {
    const int d = static_cast<int>(x0.size());
    if (const auto* a = std::get_if<trunc::AnnulusUnion>(&kind_)) {
      const Vec md = a->metric.size() == 0 ? dir : Vec(a->metric * dir);
      const Vec mx = a->metric.size() == 0 ? x0 : Vec(a->metric * x0);
      const double qa = dir.dot(md), qb = 2.0 * x0.dot(md), qc = x0.dot(mx);
      if (!(qa > 0.0)) return;
      for (const auto& s : a->radii) {
        for (double r : {s.lo, s.hi}) {
          if (!std::isfinite(r) || r <= 0.0) continue;
          const double disc = qb * qb - 4.0 * qa * (qc - r * r);
          if (disc < 0.0) continue;
          const double root = std::sqrt(disc);
          // stable pair of roots
          const double q = -0.5 * (qb + std::copysign(root, qb));
          if (q != 0.0) out.push_back((qc - r * r) / q);
          out.push_back(q / qa);
        }
      }
    } else if (const auto* h = std::get_if<trunc::HalfSpace>(&kind_)) {
      const double nd = h->normal.dot(dir);
      if (nd != 0.0) out.push_back((h->offset - h->normal.dot(x0)) / nd);
    } else if (const auto* u = std::get_if<trunc::Union>(&kind_)) {
      for (const auto& p : u->parts) p.collect_crossings(x0, dir, out);
    } else if (!is_constant_one()) {
      const auto breaks = axis_breakpoints(d);
      for (int i = 0; i < d; ++i) {
        if (dir(i) == 0.0) continue;
        for (double b : breaks[i]) out.push_back((b - x0(i)) / dir(i));
      }
    }
  }

  static std::vector<Interval> hull(const trunc::ConstantOne&, int d) { return std::vector<Interval>(d); }
  static std::vector<Interval> hull(const trunc::Box& b, int d) {
    std::vector<Interval> out(d);
    for (int i = 0; i < d && i < static_cast<int>(b.axes.size()); ++i) out[i] = b.axes[i];
    return out;
  }
  static std::vector<Interval> hull(const trunc::AnnulusUnion& a, int d) {
    std::vector<Interval> out(d);
    double rmax = 0.0;
    for (const auto& s : a.radii) rmax = std::max(rmax, s.hi);
    if (std::isfinite(rmax)) {
      // |x_i| <= r sqrt((M^{-1})_ii) on {x^T M x <= r^2}
      const Mat minv = a.metric.size() == 0 ? Mat::Identity(d, d) : Mat(a.metric.inverse());
      for (int i = 0; i < d; ++i) {
        const double e = rmax * std::sqrt(minv(i, i));
        out[i] = Interval{-e, e};
      }
    }
    return out;
  }
  static std::vector<Interval> hull(const trunc::HalfSpace& h, int d) {
    std::vector<Interval> out(d);
    int nonzero = 0, axis = 0;
    for (int i = 0; i < h.normal.size(); ++i)
      if (h.normal(i) != 0.0) ++nonzero, axis = i;
    if (nonzero == 1 && axis < d) {
      const double t = h.offset / h.normal(axis);
      out[axis] = h.normal(axis) > 0 ? Interval{t, kInf} : Interval{-kInf, t};
    }
    return out;
  }
  static std::vector<Interval> hull(const trunc::Union& u, int d) {
    std::vector<Interval> out(d, Interval{kInf, -kInf});
    for (const auto& p : u.parts) {
      const auto h = p.support_hull(d);
      for (int i = 0; i < d; ++i) {
        out[i].lo = std::min(out[i].lo, h[i].lo);
        out[i].hi = std::max(out[i].hi, h[i].hi);
      }
    }
    return out;
  }
  static std::vector<Interval> hull(const trunc::Soft&, int d) { return std::vector<Interval>(d); }

  void bind(const Mat& sigma_inv) {
    if (auto* a = std::get_if<trunc::AnnulusUnion>(&kind_)) {
      if (a->metric.size() == 0) a->metric = sigma_inv;
    } else if (auto* u = std::get_if<trunc::Union>(&kind_)) {
      for (auto& p : u->parts) p.bind(sigma_inv);
    }
  }

  Kind kind_;
  bool declared_even_;
  bool declared_rotation_invariant_;
};

/// mixture_density(x) S(x) / alpha, where alpha is the survival mass.
inline double truncated_density(const MixtureParams& params, const TruncationSpec& trunc, const Vec& x,
                                double alpha) {
  if (!(alpha > 0.0)) throw DegenerateTruncation("truncated_density: survival mass must be positive");
  const double s = trunc(x);
  if (s == 0.0) return 0.0;
  return mixture_density(params, x) * s / alpha;
}

// ---------------------------------------------------------------------------
// Symmetry probing

struct SymmetryReport {
  double max_rotation_deviation = 0.0;    // max |S(Qx) - S(x)|
  double max_reflection_deviation = 0.0;  // max |S(-x) - S(x)|
  double max_out_of_range = 0.0;          // distance of S(x) outside [0,1]
  bool observed_even = true;
  bool observed_rotation_invariant = true;
  bool contradicts_even = false;
  bool contradicts_rotation = false;
};

/// Samples points and random orthogonal matrices and compares S at mirrored
/// and rotated points. Rotations act in whitened coordinates when
/// `sigma_root` (Sigma^{1/2}) is given: S(Sigma^{1/2} Q y) vs S(Sigma^{1/2} y).
inline SymmetryReport validate_symmetry(const TruncationSpec& trunc, int d, int n_probes, std::uint64_t rng_seed,
                                        const Mat& sigma_root = Mat(), double probe_scale = 3.0,
                                        double tol = 1e-12) {
  if (n_probes < 1) throw InvalidArgument("validate_symmetry: n_probes must be >= 1");
  trunc.check_dimension(d);
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal;
  const Mat root = sigma_root.size() == 0 ? Mat::Identity(d, d) : sigma_root;
  SymmetryReport rep;
  for (int k = 0; k < n_probes; ++k) {
    Vec y(d);
    for (int i = 0; i < d; ++i) y(i) = probe_scale * normal(rng);
    const Mat q = random_orthogonal(d, rng);
    const Vec x = root * y;
    const double s = trunc(x);
    const double s_rot = trunc(Vec(root * (q * y)));
    const double s_ref = trunc(Vec(-x));
    rep.max_out_of_range = std::max({rep.max_out_of_range, -s, s - 1.0, 0.0});
    rep.max_rotation_deviation = std::max(rep.max_rotation_deviation, std::abs(s_rot - s));
    rep.max_reflection_deviation = std::max(rep.max_reflection_deviation, std::abs(s_ref - s));
  }
  rep.observed_even = rep.max_reflection_deviation <= tol;
  rep.observed_rotation_invariant = rep.max_rotation_deviation <= tol;
  rep.contradicts_even = trunc.declared_even() && !rep.observed_even;
  rep.contradicts_rotation = trunc.declared_rotation_invariant() && !rep.observed_rotation_invariant;
  return rep;
}

}  // namespace truncem

#endif  // TRUNCEM_MODEL_HPP
