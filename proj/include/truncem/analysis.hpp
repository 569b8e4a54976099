#ifndef TRUNCEM_ANALYSIS_HPP
#define TRUNCEM_ANALYSIS_HPP

// Derivatives of the moment maps and the Jacobian of the implicit EM map.
// All Jacobians use the layout J(i, j) = d f_i / d lambda_j, so they compare
// entry-wise with central finite differences.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "truncem/em_core.hpp"
#include "truncem/errors.hpp"
#include "truncem/linalg.hpp"
#include "truncem/quad.hpp"

namespace truncem {

enum class Stability { Attracting, Repelling, Saddle, Marginal };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Attracting: return "Attracting";
    case Stability::Repelling: return "Repelling";
    case Stability::Saddle: return "Saddle";
    case Stability::Marginal: return "Marginal";
  }
  return "?";
}

struct JacobianReport {
  Vec point;
  Mat matrix;
  CVec eigenvalues;  // ascending by real part
  Mat eigenvectors;  // real, unit columns, matching `eigenvalues`
  double spectral_radius = 0.0;
  double min_modulus = 0.0;
  double margin = 0.0;  // classification margin actually used
  Stability classification = Stability::Marginal;
};

namespace detail {

struct CenteredMoments {
  Mat centered;  // symmetric
  double error = 0.0;
  Method method = Method::Adaptive1D;
};

/// M = E_{l,S}[x x^T] - H H^T at mean = lambda = l.
inline CenteredMoments self_covariance(const Vec& lambda, const Problem& ctx) {
  const auto t = tanh_moments(ctx, lambda, lambda, true);
  CenteredMoments out;
  out.centered = t.second - t.first * t.first.transpose();
  out.centered = 0.5 * (out.centered + out.centered.transpose()).eval();
  out.error = t.second_error + 2.0 * t.first.cwiseAbs().maxCoeff() * t.first_error;
  out.method = t.method;
  return out;
}

/// N = E_{mu,S}[x x^T (1 - tanh^2(x^T Sigma^{-1} lambda))].
inline CenteredMoments cross_curvature(const Vec& lambda, const Problem& ctx) {
  const int d = ctx.dim();
  const Vec v = ctx.params().sigma_inv() * lambda;
  IntegrandHints hints;
  if (v.norm() > 0) hints.tanh_directions.push_back(v);
  auto raw = integrate_moments(
      [&](const Vec& x, std::span<double> out) {
        const double t = std::tanh(x.dot(v));
        const double s = 1.0 - t * t;
        for (int j = 0; j < d; ++j)
          for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(j * d + i)] = x(i) * x(j) * s;
      },
      d * d, ctx.params(), ctx.trunc(), ctx.quad(), hints);
  CenteredMoments out;
  out.centered = Eigen::Map<const Mat>(raw.ratio.data(), d, d);
  out.centered = 0.5 * (out.centered + out.centered.transpose()).eval();
  out.error = raw.ratio_error.cwiseAbs().maxCoeff();
  out.method = raw.method;
  return out;
}

inline Estimate<Mat> times_sigma_inv(const CenteredMoments& m, const Problem& ctx) {
  Estimate<Mat> e;
  e.value = m.centered * ctx.params().sigma_inv();
  e.error_estimate = m.error * ctx.params().sigma_inv().cwiseAbs().rowwise().sum().maxCoeff();
  e.method = m.method;
  return e;
}

}  // namespace detail

/// dH/dlambda = (E_{l,S}[x x^T] - H H^T) Sigma^{-1}. The left factor is SPD.
inline Estimate<Mat> d_self_moment(const Vec& lambda, const Problem& ctx) {
  detail::check_lambda(ctx, lambda, "d_self_moment");
  return detail::times_sigma_inv(detail::self_covariance(lambda, ctx), ctx);
}

/// db/dlambda = E_{mu,S}[x x^T (1 - tanh^2(x^T Sigma^{-1} lambda))] Sigma^{-1}.
inline Estimate<Mat> d_cross_moment_lambda(const Vec& lambda, const Problem& ctx) {
  detail::check_lambda(ctx, lambda, "d_cross_moment_lambda");
  return detail::times_sigma_inv(detail::cross_curvature(lambda, ctx), ctx);
}

/// db/dmu at fixed lambda:
/// (E_{mu,S}[x x^T t_l t_mu] - E_{mu,S}[x t_l] E_{mu,S}[x t_mu]^T) Sigma^{-1},
/// with t_v = tanh(x^T Sigma^{-1} v).
inline Estimate<Mat> d_cross_moment_mu(const Vec& lambda, const Problem& ctx) {
  detail::check_lambda(ctx, lambda, "d_cross_moment_mu");
  const int d = ctx.dim();
  const Vec vl = ctx.params().sigma_inv() * lambda;
  const Vec vm = ctx.params().sigma_inv() * ctx.mu();
  IntegrandHints hints;
  if (vl.norm() > 0) hints.tanh_directions.push_back(vl);
  if (vm.norm() > 0) hints.tanh_directions.push_back(vm);
  auto raw = integrate_moments(
      [&](const Vec& x, std::span<double> out) {
        const double tl = std::tanh(x.dot(vl));
        const double tm = std::tanh(x.dot(vm));
        for (int i = 0; i < d; ++i) {
          out[i] = x(i) * tl;
          out[d + i] = x(i) * tm;
        }
        for (int j = 0; j < d; ++j)
          for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(2 * d + j * d + i)] = x(i) * x(j) * tl * tm;
      },
      2 * d + d * d, ctx.params(), ctx.trunc(), ctx.quad(), hints);
  const Vec el = raw.ratio.head(d), em = raw.ratio.segment(d, d);
  Mat second = Eigen::Map<const Mat>(raw.ratio.data() + 2 * d, d, d);
  second = 0.5 * (second + second.transpose()).eval();
  detail::CenteredMoments cm;
  cm.centered = second - el * em.transpose();
  cm.error = raw.ratio_error.tail(d * d).cwiseAbs().maxCoeff() +
             (el.cwiseAbs().maxCoeff() + em.cwiseAbs().maxCoeff()) * raw.ratio_error.head(2 * d).cwiseAbs().maxCoeff();
  cm.method = raw.method;
  return detail::times_sigma_inv(cm, ctx);
}

/// Attracting / Repelling / Saddle / Marginal from eigenvalue moduli.
inline Stability classify(const CVec& eigenvalues, double margin) {
  bool any_in = false, any_out = false, any_marginal = false;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double r = std::abs(eigenvalues(i));
    if (r < 1.0 - margin) {
      any_in = true;
    } else if (r > 1.0 + margin) {
      any_out = true;
    } else {
      any_marginal = true;
    }
  }
  if (any_marginal) return Stability::Marginal;
  if (any_in && any_out) return Stability::Saddle;
  return any_out ? Stability::Repelling : Stability::Attracting;
}

/// Jacobian of the EM map at gamma, D = (dH)^{-1} db = Sigma M^{-1} N Sigma^{-1}.
/// D is similar to M^{-1} N, whose spectrum comes from the symmetric-definite
/// pencil N v = l M v; this is real and positive whenever M, N are SPD.
inline JacobianReport em_jacobian(const Vec& gamma, const Problem& ctx, double base_margin = 1e-6) {
  detail::check_lambda(ctx, gamma, "em_jacobian");
  const auto mcov = detail::self_covariance(gamma, ctx);
  const auto ncov = detail::cross_curvature(gamma, ctx);
  const Mat& sigma = ctx.params().sigma();
  Eigen::LLT<Mat> llt(mcov.centered);
  if (llt.info() != Eigen::Success)
    throw InvariantViolation("d_self_moment is singular or indefinite at the evaluation point");
  JacobianReport rep;
  rep.point = gamma;
  rep.matrix = sigma * llt.solve(ncov.centered) * ctx.params().sigma_inv();

  const int d = ctx.dim();
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(ncov.centered, mcov.centered);
  if (ges.info() == Eigen::Success) {
    rep.eigenvalues = ges.eigenvalues().cast<std::complex<double>>();
    rep.eigenvectors = sigma * ges.eigenvectors();
  } else {
    Eigen::EigenSolver<Mat> es(rep.matrix);
    rep.eigenvalues = es.eigenvalues();
    rep.eigenvectors = es.eigenvectors().real();
  }
  for (int j = 0; j < d; ++j) {
    const double nrm = rep.eigenvectors.col(j).norm();
    if (nrm > 0) rep.eigenvectors.col(j) /= nrm;
  }
  rep.spectral_radius = rep.eigenvalues.cwiseAbs().maxCoeff();
  rep.min_modulus = rep.eigenvalues.cwiseAbs().minCoeff();
  // first-order eigenvalue uncertainty: ||M^{-1}|| (||dN|| + |l| ||dM||)
  const double minv =
      1.0 / mcov.centered.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff();
  const double dn = d * ncov.error, dm = d * mcov.error;
  rep.margin = base_margin + minv * (dn + rep.spectral_radius * dm);
  rep.classification = classify(rep.eigenvalues, rep.margin);
  return rep;
}

/// True iff every eigenvalue of a b has positive real part and imaginary part
/// at most 1e-10 relative to the largest modulus.
inline bool pd_product_spectrum_check(const Mat& a, const Mat& b) {
  require_spd(a, "pd_product_spectrum_check a");
  require_spd(b, "pd_product_spectrum_check b");
  if (a.rows() != b.rows()) throw DimensionMismatch("pd_product_spectrum_check: size mismatch");
  Eigen::EigenSolver<Mat> es(a * b, false);
  if (es.info() != Eigen::Success) return false;
  const CVec ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev(i).real() > 0.0)) return false;
    if (std::abs(ev(i).imag()) > 1e-10 * scale) return false;
  }
  return true;
}

/// Relative step 1e-5 (1 + ||point||).
inline double default_fd_step(const Vec& point) { return 1e-5 * (1.0 + point.norm()); }

/// Central-difference Jacobian J(i, j) = (f(p + h e_j) - f(p - h e_j))_i / 2h.
inline Mat finite_diff_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& point, double step) {
  if (!(step > 0)) throw InvalidArgument("finite_diff_jacobian: step must be positive");
  const Vec f0 = f(point);
  Mat jac(f0.size(), point.size());
  for (Eigen::Index j = 0; j < point.size(); ++j) {
    Vec plus = point, minus = point;
    plus(j) += step;
    minus(j) -= step;
    jac.col(j) = (f(plus) - f(minus)) / (2.0 * step);
  }
  return jac;
}

struct DerivativeCheck {
  double self_lambda = 0.0;   // relative max-entry error of d_self_moment
  double cross_lambda = 0.0;  // d_cross_moment_lambda
  double cross_mu = 0.0;      // d_cross_moment_mu
  double worst() const { return std::max({self_lambda, cross_lambda, cross_mu}); }
};

/// Compares the three closed-form derivatives at lambda with central
/// differences of self_moment / target_moment (step default_fd_step).
inline DerivativeCheck derivative_fd_check(const Vec& lambda, const Problem& ctx) {
  auto rel = [](const Mat& a, const Mat& fd) {
    return (a - fd).cwiseAbs().maxCoeff() / std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
  };
  const double h = default_fd_step(lambda);
  const double hm = default_fd_step(ctx.mu());
  DerivativeCheck out;
  out.self_lambda = rel(d_self_moment(lambda, ctx).value,
                        finite_diff_jacobian([&](const Vec& l) { return self_moment(l, ctx).value; }, lambda, h));
  out.cross_lambda = rel(d_cross_moment_lambda(lambda, ctx).value,
                         finite_diff_jacobian([&](const Vec& l) { return target_moment(l, ctx).value; }, lambda, h));
  out.cross_mu = rel(d_cross_moment_mu(lambda, ctx).value,
                     finite_diff_jacobian([&](const Vec& m) { return target_moment(lambda, ctx.with_mean(m)).value; },
                                          ctx.mu(), hm));
  return out;
}

}  // namespace truncem

#endif  // TRUNCEM_ANALYSIS_HPP
