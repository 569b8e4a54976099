#ifndef TRUNCEM_EM_CORE_HPP
#define TRUNCEM_EM_CORE_HPP

// Population EM for the truncated symmetric mixture. With
//   b(l) = E_{mu,S}[x tanh(x^T Sigma^{-1} l)]   (target moment)
//   H(l) = E_{l,S}[x tanh(x^T Sigma^{-1} l)]    (self moment)
// one EM step maps l_t to the unique l' with H(l') = b(l_t).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "truncem/errors.hpp"
#include "truncem/linalg.hpp"
#include "truncem/model.hpp"
#include "truncem/quad.hpp"

namespace truncem {

struct SolverConfig {
  double inner_tol = 1e-10;  // relative: ||H(l') - b|| <= inner_tol * max(1, ||b||)
  double outer_tol = 1e-8;
  int max_newton = 50;
  int max_iters = 1000;

  void validate() const {
    if (!(inner_tol > 0) || !(outer_tol > 0)) throw InvalidArgument("SolverConfig: tolerances must be positive");
    if (max_newton < 1 || max_iters < 1) throw InvalidArgument("SolverConfig: iteration budgets must be >= 1");
  }
};

/// Everything an EM computation needs: true parameters, truncation and
/// numerical settings. Annuli without an explicit metric are bound to
/// Sigma^{-1} on construction.
class Problem {
 public:
  Problem(MixtureParams params, TruncationSpec trunc, QuadConfig quad = {}, SolverConfig solver = {})
      : params_(std::move(params)), trunc_(trunc.bound_to(params_)), quad_(quad), solver_(solver) {
    trunc_.check_dimension(params_.dim());
    quad_.validate();
    solver_.validate();
  }

  const MixtureParams& params() const { return params_; }
  const TruncationSpec& trunc() const { return trunc_; }
  const QuadConfig& quad() const { return quad_; }
  const SolverConfig& solver() const { return solver_; }
  int dim() const { return params_.dim(); }
  const Vec& mu() const { return params_.mu(); }

  /// Same truncation and settings, different true mean.
  Problem with_mean(Vec mu) const {
    Problem out = *this;
    out.params_ = params_.with_mean(std::move(mu));
    return out;
  }
  Problem with_quad(QuadConfig q) const { return Problem(params_, trunc_, q, solver_); }
  Problem with_solver(SolverConfig s) const { return Problem(params_, trunc_, quad_, s); }

  Estimate<double> alpha() const { return survival_mass(params_, trunc_, quad_); }

 private:
  MixtureParams params_;
  TruncationSpec trunc_;
  QuadConfig quad_;
  SolverConfig solver_;
};

namespace detail {

inline void check_lambda(const Problem& ctx, const Vec& v, const char* what) {
  if (v.size() != ctx.dim()) throw DimensionMismatch(std::string(what) + ": vector has wrong dimension");
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + ": vector has non-finite entries");
}

/// E_{mean,S}[x tanh(x^T Sigma^{-1} lambda)] and, optionally, E_{mean,S}[x x^T].
struct TanhMoments {
  Vec first;
  Mat second;
  double first_error = 0.0;
  double second_error = 0.0;
  Method method = Method::Adaptive1D;
  double mass = 0.0;
};

inline TanhMoments tanh_moments(const Problem& ctx, const Vec& mean, const Vec& lambda, bool with_second) {
  const int d = ctx.dim();
  const Vec v = ctx.params().sigma_inv() * lambda;
  const int m = with_second ? d + d * d : d;
  IntegrandHints hints;
  if (v.norm() > 0) hints.tanh_directions.push_back(v);
  auto raw = integrate_moments(
      [&](const Vec& x, std::span<double> out) {
        const double t = std::tanh(x.dot(v));
        for (int i = 0; i < d; ++i) out[i] = x(i) * t;
        if (with_second)
          for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(d + j * d + i)] = x(i) * x(j);
      },
      m, ctx.params().with_mean(mean), ctx.trunc(), ctx.quad(), hints);
  TanhMoments out;
  out.first = raw.ratio.head(d);
  out.first_error = raw.ratio_error.head(d).cwiseAbs().maxCoeff();
  if (with_second) {
    out.second = Eigen::Map<const Mat>(raw.ratio.data() + d, d, d);
    out.second = 0.5 * (out.second + out.second.transpose()).eval();
    out.second_error = raw.ratio_error.tail(d * d).cwiseAbs().maxCoeff();
  }
  out.method = raw.method;
  out.mass = raw.value(0);
  return out;
}

inline Estimate<Vec> to_estimate(const TanhMoments& t) {
  Estimate<Vec> e;
  e.value = t.first;
  e.error_estimate = t.first_error;
  e.method = t.method;
  if (t.mass < kLowMassWarning)
    e.warnings.push_back("survival mass " + std::to_string(t.mass) + " is below 1e-6; integration noise may dominate");
  return e;
}

}  // namespace detail

/// b(lambda_t) = E_{mu,S}[tanh(x^T Sigma^{-1} lambda_t) x].
inline Estimate<Vec> target_moment(const Vec& lambda_t, const Problem& ctx) {
  detail::check_lambda(ctx, lambda_t, "target_moment");
  return detail::to_estimate(detail::tanh_moments(ctx, ctx.mu(), lambda_t, false));
}

/// H(lambda) = E_{lambda,S}[x tanh(x^T Sigma^{-1} lambda)].
inline Estimate<Vec> self_moment(const Vec& lambda, const Problem& ctx) {
  detail::check_lambda(ctx, lambda, "self_moment");
  return detail::to_estimate(detail::tanh_moments(ctx, lambda, lambda, false));
}

struct InnerSolve {
  Vec lambda;
  double residual = 0.0;  // ||H(lambda) - b||
  int newton_iters = 0;
};

/// Solves H(l) = b by damped Newton from `start`. The Newton system uses
/// J_H = M Sigma^{-1} with M = E[x x^T] - H H^T, which is SPD, so each step
/// is one Cholesky solve followed by a multiplication with Sigma.
inline InnerSolve solve_self_moment(const Vec& b, const Vec& start, const Problem& ctx, double inner_tol) {
  detail::check_lambda(ctx, b, "solve_self_moment");
  detail::check_lambda(ctx, start, "solve_self_moment");
  if (!(inner_tol > 0)) throw InvalidArgument("inner_tol must be positive");
  if (ctx.quad().rel_tol * 100.0 > inner_tol)
    throw InvalidArgument("accuracy conflict: quadrature rel_tol must be at least 100x tighter than inner_tol");
  const double target = inner_tol * std::max(1.0, b.norm());
  const double trust =
      ctx.mu().norm() + 3.0 * std::sqrt(ctx.params().sigma().selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff());

  InnerSolve out;
  out.lambda = start;
  auto cur = detail::tanh_moments(ctx, out.lambda, out.lambda, true);
  if (cur.method == Method::MonteCarlo && 100.0 * cur.first_error > target)
    throw InvalidArgument("accuracy conflict: Monte Carlo error exceeds inner_tol / 100");
  Vec r = cur.first - b;
  double rn = r.norm();
  for (int it = 0; it < ctx.solver().max_newton; ++it) {
    if (rn <= target) {
      out.residual = rn;
      out.newton_iters = it;
      return out;
    }
    const Mat mc = cur.second - cur.first * cur.first.transpose();
    Eigen::LLT<Mat> llt(mc);
    if (llt.info() != Eigen::Success)
      throw InvariantViolation("self-moment Jacobian is not positive definite at the Newton iterate");
    Vec step = ctx.params().sigma() * llt.solve(-r);
    if (step.norm() > trust) step *= trust / step.norm();
    bool accepted = false;
    double t = 1.0;
    for (int k = 0; k < 40 && !accepted; ++k, t *= 0.5) {
      const Vec cand = out.lambda + t * step;
      try {
        auto cm = detail::tanh_moments(ctx, cand, cand, true);
        const Vec rc = cm.first - b;
        if (rc.norm() < rn) {
          out.lambda = cand;
          cur = std::move(cm);
          r = rc;
          rn = rc.norm();
          accepted = true;
        }
      } catch (const DegenerateTruncation&) {
      } catch (const QuadratureFailure&) {
      }
    }
    if (!accepted)
      throw SolverFailure("inner Newton solve stagnated at residual " + std::to_string(rn) + " (target " +
                          std::to_string(target) + ")");
  }
  if (rn <= target) {
    out.residual = rn;
    out.newton_iters = ctx.solver().max_newton;
    return out;
  }
  throw SolverFailure("inner Newton solve did not converge within " + std::to_string(ctx.solver().max_newton) +
                      " iterations");
}

/// One implicit EM step, with solver diagnostics.
inline InnerSolve em_step_detail(const Vec& lambda_t, const Problem& ctx, double inner_tol) {
  const Vec b = target_moment(lambda_t, ctx).value;
  return solve_self_moment(b, lambda_t, ctx, inner_tol);
}

inline Vec em_step(const Vec& lambda_t, const Problem& ctx, double inner_tol) {
  return em_step_detail(lambda_t, ctx, inner_tol).lambda;
}

inline Vec em_step(const Vec& lambda_t, const Problem& ctx) { return em_step(lambda_t, ctx, ctx.solver().inner_tol); }

/// ||b(lambda) - H(lambda)||, with the summed quadrature error of both terms.
inline Estimate<double> fixed_point_residual(const Vec& lambda, const Problem& ctx) {
  const auto b = target_moment(lambda, ctx);
  const auto h = self_moment(lambda, ctx);
  Estimate<double> e;
  e.value = (b.value - h.value).norm();
  e.error_estimate = std::sqrt(static_cast<double>(ctx.dim())) * (b.error_estimate + h.error_estimate);
  e.method = b.method;
  e.warnings = b.warnings;
  return e;
}

// ---------------------------------------------------------------------------
// EM runs

enum class LimitLabel { PlusMu, MinusMu, Zero, Other, NotConverged };

inline const char* to_string(LimitLabel l) {
  switch (l) {
    case LimitLabel::PlusMu: return "PlusMu";
    case LimitLabel::MinusMu: return "MinusMu";
    case LimitLabel::Zero: return "Zero";
    case LimitLabel::Other: return "Other";
    case LimitLabel::NotConverged: return "NotConverged";
  }
  return "?";
}

struct EMState {
  Vec lambda;
  int iter = 0;
  double inner_residual = 0.0;
  double step_norm = 0.0;  // ||lambda_iter - lambda_{iter-1}||
  int newton_iters = 0;
};

struct EMTrajectory {
  std::vector<EMState> states;
  bool converged = false;
  LimitLabel label = LimitLabel::NotConverged;
  Vec limit;               // labeled canonical point, or the final iterate for Other
  double cluster_tol = 0;  // whitened labeling radius actually used
  std::string error;       // solver error that ended the run, if any

  const Vec& final_lambda() const { return states.back().lambda; }
  int iterations() const { return states.empty() ? 0 : states.back().iter; }
};

/// Labels `point` against {-mu, 0, mu} by whitened distance.
inline LimitLabel label_point(const Vec& point, const Problem& ctx, double tol, Vec* canonical = nullptr) {
  const auto& p = ctx.params();
  const Vec mu = ctx.mu();
  const Vec zero = Vec::Zero(ctx.dim());
  const std::array<std::pair<LimitLabel, Vec>, 3> cands{
      std::make_pair(LimitLabel::PlusMu, mu), std::make_pair(LimitLabel::MinusMu, Vec(-mu)),
      std::make_pair(LimitLabel::Zero, zero)};
  double best = kInf;
  LimitLabel label = LimitLabel::Other;
  for (const auto& [l, c] : cands) {
    const double dist = p.whitened_norm(point - c);
    if (dist < best) {
      best = dist;
      if (dist <= tol) {
        label = l;
        if (canonical) *canonical = c;
      }
    }
  }
  if (label == LimitLabel::Other && canonical) *canonical = point;
  return label;
}

/// Iterates em_step from lambda_0 until the step falls to outer_tol. Solver
/// errors end the run and are recorded on the trajectory.
inline EMTrajectory run_em(const Vec& lambda_0, const Problem& ctx, double outer_tol, int max_iters) {
  detail::check_lambda(ctx, lambda_0, "run_em");
  if (max_iters < 1) throw InvalidArgument("run_em: max_iters must be >= 1");
  if (!(outer_tol > 0)) throw InvalidArgument("run_em: outer_tol must be positive");
  EMTrajectory traj;
  traj.states.push_back(EMState{lambda_0, 0, 0.0, 0.0, 0});
  Vec cur = lambda_0;
  for (int it = 1; it <= max_iters; ++it) {
    InnerSolve next;
    try {
      next = em_step_detail(cur, ctx, ctx.solver().inner_tol);
    } catch (const Error& e) {
      traj.error = e.what();
      break;
    }
    const double step = (next.lambda - cur).norm();
    if (step == 0.0) {
      traj.converged = true;
      break;
    }
    traj.states.push_back(EMState{next.lambda, it, next.residual, step, next.newton_iters});
    cur = next.lambda;
    if (step <= outer_tol) {
      traj.converged = true;
      break;
    }
  }
  if (!traj.converged) {
    traj.label = LimitLabel::NotConverged;
    traj.limit = cur;
    return traj;
  }
  // stopping at step <= tol leaves a distance of about step * rho / (1 - rho)
  double rho = 0.0;
  const auto n = traj.states.size();
  if (n >= 3 && traj.states[n - 2].step_norm > 0)
    rho = std::clamp(traj.states[n - 1].step_norm / traj.states[n - 2].step_norm, 0.0, 1.0 - 1e-6);
  const double w_norm =
      std::sqrt(ctx.params().sigma_inv().selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff());
  traj.cluster_tol = 10.0 * outer_tol * std::max(1.0, 1.0 / (1.0 - rho)) * std::max(1.0, w_norm);
  traj.label = label_point(cur, ctx, traj.cluster_tol, &traj.limit);
  return traj;
}

inline EMTrajectory run_em(const Vec& lambda_0, const Problem& ctx) {
  return run_em(lambda_0, ctx, ctx.solver().outer_tol, ctx.solver().max_iters);
}

}  // namespace truncem

#endif  // TRUNCEM_EM_CORE_HPP
