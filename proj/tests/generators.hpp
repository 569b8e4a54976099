#ifndef TRUNCEM_TESTS_GENERATORS_HPP
#define TRUNCEM_TESTS_GENERATORS_HPP

// Seeded random problems for property tests and the acceptance run.

#include <random>
#include <string>

#include "truncem/truncem.hpp"

namespace gen {

using namespace truncem;

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

/// One-dimensional truncation drawn from half-lines, intervals, asymmetric
/// unions, half-spaces and the soft families.
inline TruncationSpec truncation_1d(std::mt19937_64& rng, double mu, double sd, std::string* kind = nullptr) {
  const int k = static_cast<int>(rng() % 7);
  const double s = std::abs(mu) + sd;
  auto name = [&](const char* n) {
    if (kind) *kind = n;
  };
  switch (k) {
    case 0: {
      name("halfline");
      return TruncationSpec::interval(uniform(rng, -s, s), kInf);
    }
    case 1: {
      name("interval");
      const double a = uniform(rng, -1.5 * s, s);
      return TruncationSpec::interval(a, a + uniform(rng, 0.5 * sd, 3.0 * s));
    }
    case 2: {
      name("union");
      const double a = uniform(rng, -2.0 * s, -0.2 * s), b = uniform(rng, 0.0, s);
      return TruncationSpec::union_of({TruncationSpec::interval(a, a + uniform(rng, 0.3, 1.5) * sd),
                                       TruncationSpec::interval(b, b + uniform(rng, 0.5, 3.0) * sd)});
    }
    case 3: {
      name("halfspace");
      return TruncationSpec::half_space(Vec::Constant(1, rng() % 2 ? 1.0 : -1.0), uniform(rng, -s, 0.5 * s));
    }
    case 4: {
      name("ramp");
      const double a = uniform(rng, -s, s);
      return TruncationSpec::soft_ramp(a, a + uniform(rng, 0.2, 2.0) * sd, uniform(rng, 0.0, 0.3), uniform(rng, 0.7, 1.0));
    }
    case 5: {
      name("logistic");
      return TruncationSpec::soft_logistic(uniform(rng, -s, s), uniform(rng, 0.1, 1.0) * sd, 0.0, 1.0);
    }
    default: {
      name("step");
      return TruncationSpec::soft_step(uniform(rng, 0.05, 0.5), 1.0, uniform(rng, -s, s));
    }
  }
}

/// Two-dimensional truncation: boxes, half-spaces, annuli, unions, soft.
inline TruncationSpec truncation_2d(std::mt19937_64& rng, const Vec& mu, std::string* kind = nullptr) {
  const int k = static_cast<int>(rng() % 5);
  const double s = mu.norm() + 1.0;
  auto name = [&](const char* n) {
    if (kind) *kind = n;
  };
  auto box = [&] {
    std::vector<Interval> axes;
    for (int i = 0; i < 2; ++i) {
      const double a = uniform(rng, -1.5 * s, 0.5 * s);
      axes.push_back({a, a + uniform(rng, 1.0, 3.0 * s)});
    }
    return TruncationSpec::box(axes);
  };
  switch (k) {
    case 0:
      name("box");
      return box();
    case 1: {
      name("halfspace");
      return TruncationSpec::half_space(Vec{{uniform(rng, -1, 1), uniform(rng, -1, 1)}}, uniform(rng, -s, 0.3 * s));
    }
    case 2: {
      name("annulus");
      const double l = uniform(rng, 0.0, 1.0);
      return TruncationSpec::annuli({{l, l + uniform(rng, 0.8, 3.0)}});
    }
    case 3: {
      name("union");
      return TruncationSpec::union_of({box(), TruncationSpec::annuli({{0.0, uniform(rng, 0.5, 1.5)}})});
    }
    default: {
      name("logistic");
      return TruncationSpec::soft_logistic(uniform(rng, -s, s), uniform(rng, 0.2, 1.0), 0.0, 1.0,
                                           static_cast<int>(rng() % 2));
    }
  }
}

inline MixtureParams params_1d(std::mt19937_64& rng) {
  return MixtureParams(Vec::Constant(1, uniform(rng, 0.5, 2.5)), Mat::Constant(1, 1, uniform(rng, 0.5, 2.0)));
}

inline MixtureParams params_nd(std::mt19937_64& rng, int d) {
  Vec mu(d);
  for (int i = 0; i < d; ++i) mu(i) = uniform(rng, -2.0, 2.0);
  if (mu.norm() < 0.5) mu *= 0.5 / mu.norm();
  return MixtureParams(mu, random_spd(d, rng, 0.5, 2.0));
}

/// A truncated problem with alpha >= min_alpha (rejection sampling).
inline Problem truncated_problem(std::mt19937_64& rng, int d, double min_alpha = 0.05, std::string* kind = nullptr) {
  if (d != 1 && d != 2) throw InvalidArgument("truncated_problem: d must be 1 or 2");
  for (;;) {
    const MixtureParams p = d == 1 ? params_1d(rng) : params_nd(rng, d);
    const TruncationSpec t = d == 1 ? truncation_1d(rng, p.mu()(0), std::sqrt(p.sigma()(0, 0)), kind)
                                    : truncation_2d(rng, p.mu(), kind);
    Problem ctx(p, t);
    try {
      if (ctx.alpha().value >= min_alpha) return ctx;
    } catch (const DegenerateTruncation&) {
    }
  }
}

}  // namespace gen

#endif  // TRUNCEM_TESTS_GENERATORS_HPP
