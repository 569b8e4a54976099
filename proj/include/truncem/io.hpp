#ifndef TRUNCEM_IO_HPP
#define TRUNCEM_IO_HPP

// CSV and JSON output. Every artifact carries the tool version and the hash of
// the canonical config text; JSON documents also carry a schema version.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "truncem/analysis.hpp"
#include "truncem/config.hpp"
#include "truncem/em_core.hpp"
#include "truncem/landscape.hpp"
#include "truncem/rates.hpp"

#ifndef TRUNCEM_VERSION
#define TRUNCEM_VERSION "0.1.0"
#endif

namespace truncem {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = TRUNCEM_VERSION;

/// %.17g, with inf/nan spelled out.
inline std::string csv_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string provenance_line(const std::string& hash) {
  return std::string("# truncem ") + kToolVersion + " config=" + hash;
}

namespace detail {

inline Json json_number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? Json("nan") : Json(x > 0 ? "inf" : "-inf");
}

}  // namespace detail

inline Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(detail::json_number(v(i)));
  return a;
}

/// Row-major nested arrays.
inline Json to_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
  return a;
}

inline Json to_json(const JacobianReport& r) {
  Json eig = Json::array();
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
    eig.push_back(Json::array({r.eigenvalues(i).real(), r.eigenvalues(i).imag()}));
  return Json{{"point", to_json(r.point)},
              {"matrix", to_json(r.matrix)},
              {"eigenvalues", eig},
              {"eigenvectors", to_json(r.eigenvectors)},
              {"spectral_radius", r.spectral_radius},
              {"min_modulus", r.min_modulus},
              {"margin", r.margin},
              {"classification", to_string(r.classification)}};
}

inline Json to_json(const EMTrajectory& t) {
  Json j{{"label", to_string(t.label)},
         {"converged", t.converged},
         {"iterations", t.iterations()},
         {"initial", to_json(t.states.front().lambda)},
         {"final", to_json(t.final_lambda())},
         {"limit", to_json(t.limit)},
         {"cluster_tol", t.cluster_tol},
         {"final_inner_residual", t.states.back().inner_residual},
         {"final_step_norm", t.states.back().step_norm}};
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

inline Json to_json(const FixedPointSet& s) {
  Json pts = Json::array();
  for (std::size_t i = 0; i < s.size(); ++i)
    pts.push_back(Json{{"point", to_json(s.points[i])}, {"residual", s.residuals[i]}, {"jacobian", to_json(s.reports[i])}});
  return Json{{"count", s.size()}, {"starts", s.starts}, {"failed_starts", s.failed_starts}, {"points", pts}};
}

inline Json to_json(const RateReport& r) {
  Json f = Json::object();
  for (const auto& [k, v] : r.fitted_constants) f[k] = v;
  return Json{{"label", to_string(r.label)},
              {"limit", to_json(r.limit)},
              {"alpha", r.alpha},
              {"spectral_radius_at_limit", r.spectral_radius_at_limit},
              {"factor_iters", r.factor_iters},
              {"contraction_factors", r.contraction_factors},
              {"all_contracting", r.all_contracting()},
              {"fitted_constants", f}};
}

inline Json to_json(const DenominatorReport& r) {
  return Json{{"xi", r.xi},
              {"via_derivatives", r.via_derivatives},
              {"via_folded", r.via_folded},
              {"discrepancy", r.discrepancy}};
}

inline Json to_json(const NumeratorReport& r) {
  return Json{{"lambda_t", r.lambda_t}, {"xi", r.xi},         {"values", r.values},
              {"minimum", r.minimum},   {"positive", r.positive}, {"alpha", r.alpha},
              {"reference", r.reference}, {"fitted_constant", detail::json_number(r.fitted_constant)}};
}

inline Json to_json(const LocalRateReport& r) {
  return Json{{"alpha", r.alpha},
              {"radius_plus", r.radius_plus},
              {"radius_minus", r.radius_minus},
              {"contracting", r.contracting},
              {"fitted_c", r.fitted_c}};
}

inline Json to_json(const RateSweep& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) rows.push_back(to_json(r));
  return Json{{"rows", rows}, {"all_contracting", s.all_contracting}, {"monotone", s.monotone}};
}

inline Json to_json(const FkgMonotoneReport& r) {
  return Json{{"e_fg", r.e_fg}, {"e_f", r.e_f}, {"e_g", r.e_g}, {"scale", r.scale}, {"holds", r.holds}};
}

inline Json to_json(const FkgQuantReport& r) {
  return Json{{"q", r.q},
              {"lhs", r.lhs},
              {"rhs_std", r.rhs_std},
              {"rhs_folded", r.rhs_folded},
              {"holds_std", r.holds_std},
              {"holds_folded", r.holds_folded},
              {"f_even", r.f_even},
              {"g_even", r.g_even}};
}

inline Json to_json(const BasinReport& b) {
  Json counts = Json::object();
  for (const auto& [label, n] : b.counts) counts[to_string(label)] = n;
  Json runs = Json::array();
  for (std::size_t i = 0; i < b.runs.size(); ++i)
    runs.push_back(Json{{"init", to_json(b.inits[i])},
                        {"label", to_string(b.runs[i].label)},
                        {"iterations", b.runs[i].iterations()}});
  return Json{{"inits", b.inits.size()}, {"counts", counts}, {"runs", runs}};
}

/// Wraps a payload with schema, version and config provenance.
inline Json document(const std::string& kind, const std::string& hash, Json payload) {
  return Json{{"schema_version", kSchemaVersion},
              {"tool", "truncem"},
              {"version", kToolVersion},
              {"config_hash", hash},
              {"kind", kind},
              {"data", std::move(payload)}};
}

inline void write_json(std::ostream& os, const Json& doc) { os << doc.dump(2) << "\n"; }

/// iter, lambda_1..lambda_d, step_norm, inner_residual
inline void write_trajectory_csv(std::ostream& os, const EMTrajectory& t, const std::string& hash) {
  os << provenance_line(hash) << "\niter";
  const auto d = t.states.front().lambda.size();
  for (Eigen::Index i = 0; i < d; ++i) os << ",lambda_" << i + 1;
  os << ",step_norm,inner_residual\n";
  for (const auto& s : t.states) {
    os << s.iter;
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << csv_double(s.lambda(i));
    os << ',' << csv_double(s.step_norm) << ',' << csv_double(s.inner_residual) << '\n';
  }
}

/// lambda_1, lambda_2, d_1, d_2, flag (1 = ok, 0 = solve failed)
inline void write_field_csv(std::ostream& os, const VectorFieldGrid& g, const std::string& hash) {
  os << provenance_line(hash) << "\nlambda_1,lambda_2,d_1,d_2,flag\n";
  for (const auto& c : g.cells)
    os << csv_double(c.lambda(0)) << ',' << csv_double(c.lambda(1)) << ',' << csv_double(c.displacement(0)) << ','
       << csv_double(c.displacement(1)) << ',' << (c.ok ? 1 : 0) << '\n';
}

/// alpha, radius, fitted_c
inline void write_sweep_csv(std::ostream& os, const RateSweep& s, const std::string& hash) {
  os << provenance_line(hash) << "\nalpha,radius,fitted_c\n";
  for (const auto& r : s.rows)
    os << csv_double(r.alpha) << ',' << csv_double(std::max(r.radius_plus, r.radius_minus)) << ','
       << csv_double(r.fitted_c) << '\n';
}

}  // namespace truncem

#endif  // TRUNCEM_IO_HPP
