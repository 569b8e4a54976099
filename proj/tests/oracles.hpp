#ifndef TRUNCEM_TESTS_ORACLES_HPP
#define TRUNCEM_TESTS_ORACLES_HPP

// Reference computations that share no code with the library: closed forms
// through erfc, composite Simpson on explicit pieces, and midpoint grids.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// 0.5 N(x; -mu, var) + 0.5 N(x; mu, var).
inline double mixture_pdf_1d(double x, double mu, double var) {
  return 0.5 * normal_pdf(x, -mu, var) + 0.5 * normal_pdf(x, mu, var);
}

/// Mass of the mixture (identity covariance) on a product of intervals.
inline double box_mass(const std::vector<double>& mu, const std::vector<std::pair<double, double>>& box) {
  double plus = 0.5, minus = 0.5;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    plus *= phi_cdf(box[i].second - mu[i]) - phi_cdf(box[i].first - mu[i]);
    minus *= phi_cdf(box[i].second + mu[i]) - phi_cdf(box[i].first + mu[i]);
  }
  return plus + minus;
}

/// Composite Simpson with `n` (even) panels per piece; `cuts` split [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, std::vector<double> cuts = {},
                      int n = 4000) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = std::max(a, cuts[k]), hi = std::min(b, cuts[k + 1]);
    if (!(hi > lo)) continue;
    const double h = (hi - lo) / n;
    // one-sided limits at the piece ends
    double s = f(std::nextafter(lo, hi)) + f(std::nextafter(hi, lo));
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    total += s * h / 3.0;
  }
  return total;
}

/// E[g(x)] under the 1-D mixture weighted by s(x) on [lo, hi] with the given
/// discontinuities, by Simpson.
inline double truncated_expectation_1d(const std::function<double(double)>& g, double mu, double var,
                                       const std::function<double(double)>& s, std::vector<double> cuts,
                                       int n = 4000) {
  const double sd = std::sqrt(var), r = std::abs(mu) + 14.0 * sd;
  cuts.push_back(0.0);
  auto w = [&](double x) { return mixture_pdf_1d(x, mu, var) * s(x); };
  const double z = simpson(w, -r, r, cuts, n);
  return simpson([&](double x) { return w(x) * g(x); }, -r, r, cuts, n) / z;
}

/// Midpoint rule on an n x n grid over [ax, bx] x [ay, by].
inline double midpoint_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay, double by,
                          int n) {
  const double hx = (bx - ax) / n, hy = (by - ay) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += f(ax + (i + 0.5) * hx, ay + (j + 0.5) * hy);
  return s * hx * hy;
}

/// P(l <= |x| <= r) for x ~ N(m, I_2), |m| = nu, from the Rice density.
inline double rice_mass(double nu, double l, double r) {
  auto pdf = [&](double t) { return t * std::exp(-0.5 * (t * t + nu * nu)) * std::cyl_bessel_i(0.0, t * nu); };
  return simpson(pdf, l, r, {}, 20000);
}

}  // namespace oracle

#endif  // TRUNCEM_TESTS_ORACLES_HPP
