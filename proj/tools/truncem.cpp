#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "truncem/truncem.hpp"

namespace fs = std::filesystem;
using namespace truncem;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  double tol_inner = 0.0;
  double tol_outer = 0.0;
};

struct Overrides {
  std::string init;
  double perturb = 0.0;
  double lo = 0.0, hi = 0.0;
  int panels = 0, starts = 0, inits = 0;
  std::string x, y;
  std::vector<double> lambda_t;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "experiment config file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory");
  sub->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& s) { c.seed = s, c.seed_set = true; }, "overrides the config seed");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::Range(1, 1024));
  sub->add_option("--tol-inner", c.tol_inner, "inner Newton tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--tol-outer", c.tol_outer, "outer EM tolerance")->check(CLI::PositiveNumber);
}

GridAxis parse_axis(const std::string& s, const char* flag) {
  const auto v = detail::parse_list(s, 0, flag);
  if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2]) || !(v[0] <= v[1]))
    throw ConfigError("expected 'lo, hi, count'", 0, flag);
  return GridAxis{v[0], v[1], static_cast<int>(v[2])};
}

bool given(const CLI::App& sub, const std::string& flag) {
  const auto* opt = sub.get_option_no_throw(flag);
  return opt != nullptr && opt->count() > 0;
}

ExperimentConfig load(const Common& c, const Overrides& o, const CLI::App& sub) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed_set) cfg.seed = c.seed;
  if (c.tol_inner > 0) cfg.solver.inner_tol = c.tol_inner;
  if (c.tol_outer > 0) cfg.solver.outer_tol = c.tol_outer;
  cfg.solver.validate();
  const int d = cfg.params.dim();
  if (given(sub, "--init")) {
    if (o.init == "random") {
      cfg.run.init.reset();
    } else {
      const auto v = detail::parse_list(o.init, 0, "--init");
      if (static_cast<int>(v.size()) != d) throw ConfigError("--init needs dim entries", 0, "--init");
      cfg.run.init = Eigen::Map<const Vec>(v.data(), d);
    }
  }
  if (given(sub, "--perturb")) cfg.run.perturb = o.perturb;
  if (given(sub, "--lo")) cfg.scan.lo = o.lo;
  if (given(sub, "--hi")) cfg.scan.hi = o.hi;
  if (given(sub, "--panels")) cfg.scan.panels = o.panels;
  if (given(sub, "--starts")) cfg.multistart.starts = o.starts;
  if (given(sub, "--inits")) cfg.basin.inits = o.inits;
  if (given(sub, "--x")) cfg.field.x = parse_axis(o.x, "--x");
  if (given(sub, "--y")) cfg.field.y = parse_axis(o.y, "--y");
  if (given(sub, "--lambda-t")) cfg.rates.lambda_t = o.lambda_t;
  return cfg;
}

struct Output {
  fs::path dir;
  std::string hash;

  std::ofstream open(const std::string& name) const {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / name).string());
    return os;
  }
  void json(const std::string& name, const std::string& kind, Json payload) const {
    auto os = open(name);
    write_json(os, document(kind, hash, std::move(payload)));
    std::printf("wrote %s\n", (dir / name).string().c_str());
  }
  void note(const std::string& name) const { std::printf("wrote %s\n", (dir / name).string().c_str()); }
};

Vec initial_point(const ExperimentConfig& cfg, const Problem& ctx) {
  Vec l0 = cfg.run.init ? *cfg.run.init : random_inits(ctx, 1, cfg.run.init_scale, cfg.seed).front();
  if (cfg.run.perturb != 0.0) {
    const auto rep = em_jacobian(l0, ctx);
    Eigen::Index k = 0;
    rep.eigenvalues.cwiseAbs().maxCoeff(&k);
    l0 += cfg.run.perturb * rep.eigenvectors.col(k);
  }
  return l0;
}

int cmd_run(const ExperimentConfig& cfg, const Output& out) {
  const Problem ctx = cfg.problem();
  const Vec l0 = initial_point(cfg, ctx);
  const auto traj = run_em(l0, ctx);
  {
    auto os = out.open("trajectory.csv");
    write_trajectory_csv(os, traj, out.hash);
    out.note("trajectory.csv");
  }
  Json summary = to_json(traj);
  try {
    summary["final_residual"] = fixed_point_residual(traj.final_lambda(), ctx).value;
  } catch (const Error& e) {
    summary["final_residual"] = nullptr;
  }
  out.json("run.json", "run", summary);
  std::printf("label %s after %d iterations\n", to_string(traj.label), traj.iterations());
  if (!traj.error.empty()) std::fprintf(stderr, "solver failure: %s\n", traj.error.c_str());
  return traj.converged && traj.error.empty() ? 0 : 2;
}

int report_points(const FixedPointSet& set, const Output& out, const char* kind) {
  out.json("fixed_points.json", kind, to_json(set));
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::printf("  [");
    for (Eigen::Index j = 0; j < set.points[i].size(); ++j) std::printf("%s%.10g", j ? ", " : "", set.points[i](j));
    std::printf("]  %s  radius %.6g\n", to_string(set.reports[i].classification), set.reports[i].spectral_radius);
  }
  std::printf("%zu fixed points\n", set.size());
  return 0;
}

int cmd_scan(const ExperimentConfig& cfg, const Output& out, int threads) {
  const Problem ctx = cfg.problem();
  if (ctx.dim() != 1) throw ConfigError("scan requires dim = 1 (use multistart)", 0, "dim");
  const double m = std::abs(ctx.mu()(0));
  const double lo = cfg.scan.lo.value_or(-4.0 * m), hi = cfg.scan.hi.value_or(4.0 * m);
  return report_points(scan_fixed_points_1d(ctx, lo, hi, cfg.scan.panels, threads), out, "scan");
}

int cmd_multistart(const ExperimentConfig& cfg, const Output& out, int threads) {
  MultistartOptions opt;
  opt.box_scale = cfg.multistart.box_scale;
  opt.accept_tol = cfg.multistart.accept_tol;
  opt.rng_seed = cfg.seed;
  opt.threads = threads;
  opt.extra_starts = cfg.multistart.extra_starts;
  return report_points(multistart_fixed_points(cfg.problem(), cfg.multistart.starts, opt), out, "multistart");
}

int cmd_field(const ExperimentConfig& cfg, const Output& out, int threads) {
  const auto grid = vector_field_2d(cfg.problem(), cfg.field.x, cfg.field.y, threads);
  auto os = out.open("field.csv");
  write_field_csv(os, grid, out.hash);
  out.note("field.csv");
  return 0;
}

int cmd_basin(const ExperimentConfig& cfg, const Output& out, int threads) {
  const auto rep = basin_sample(cfg.problem(), cfg.basin.inits, cfg.basin.scale, cfg.seed, threads);
  out.json("basin.json", "basin", to_json(rep));
  for (const auto& [label, n] : rep.counts) std::printf("  %-12s %d\n", to_string(label), n);
  return 0;
}

int cmd_rates(const ExperimentConfig& cfg, const Output& out, int threads) {
  const Problem ctx = cfg.problem();
  const int d = ctx.dim();
  Json data;
  data["local"] = to_json(local_rate_check(ctx));

  std::vector<double> scales = cfg.rates.lambda_t;
  if (scales.empty()) scales = {0.25, 0.5, 0.75};
  const double m = d == 1 ? ctx.mu()(0) : 0.0;
  Json profiles = Json::array();
  for (double s : scales) {
    const Vec l0 = s * ctx.mu();
    const auto traj = run_em(l0, ctx);
    Json p{{"init", to_json(l0)}};
    if (traj.label == LimitLabel::NotConverged) {
      p["error"] = traj.error.empty() ? "not converged" : traj.error;
    } else {
      p["report"] = to_json(contraction_profile(traj, ctx));
      if (d == 1) p["bracketing"] = bracket_check(traj, m);
    }
    profiles.push_back(p);
  }
  data["profiles"] = profiles;

  if (d == 1) {
    std::vector<double> xi = cfg.rates.xi;
    if (xi.empty())
      for (int k = 0; k <= 8; ++k) xi.push_back(m * (-2.0 + 0.5 * k));
    Json den = Json::array();
    for (double x : xi) den.push_back(to_json(denominator_identity_check(x, ctx)));
    data["denominator"] = den;
    Json num = Json::array();
    for (double s : scales) {
      const double lt = s * m;
      if (lt > 0 && lt < m) num.push_back(to_json(numerator_bound_eval(lt, ctx, cfg.rates.n_xi, threads)));
    }
    data["numerator"] = num;
    if (m > 0) data["fkg_numerator"] = to_json(fkg_quantitative_check(numerator_fkg_spec(ctx, 0.5 * m, m)));
  }

  std::vector<TruncationSpec> family;
  for (double w : cfg.rates.widths) family.push_back(TruncationSpec::annuli({{0.0, w}}));
  const auto sweep = local_rate_sweep(ctx, family, threads);
  data["sweep"] = to_json(sweep);
  {
    auto os = out.open("sweep.csv");
    write_sweep_csv(os, sweep, out.hash);
    out.note("sweep.csv");
  }
  out.json("rates.json", "rates", data);
  std::printf("sweep: all contracting %s, monotone %s\n", sweep.all_contracting ? "yes" : "no",
              sweep.monotone ? "yes" : "no");
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, const Output& out, int threads) {
  const auto rep = run_verify(cfg.problem(), cfg.seed, threads);
  Json checks = Json::array();
  for (const auto& c : rep.checks) {
    checks.push_back(Json{{"name", c.name}, {"hard", c.hard}, {"passed", c.passed}, {"detail", c.detail}});
    std::printf("%-9s %-28s %s\n", c.passed ? "PASS" : (c.hard ? "FAIL" : "SOFT-FAIL"), c.name.c_str(),
                c.detail.c_str());
  }
  out.json("verify.json", "verify",
           Json{{"checks", checks}, {"hard_failures", rep.failures(true)}, {"soft_failures", rep.failures(false)}});
  return rep.hard_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EM for truncated two-component Gaussian mixtures"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common common;
  Overrides ov;
  auto* run = app.add_subcommand("run", "EM trajectory from one initialization");
  auto* scan = app.add_subcommand("scan", "1-D grid scan for fixed points");
  auto* multistart = app.add_subcommand("multistart", "multistart Newton search for fixed points");
  auto* field = app.add_subcommand("field", "2-D vector field of the EM update");
  auto* basin = app.add_subcommand("basin", "limit tallies from random initializations");
  auto* rates = app.add_subcommand("rates", "contraction profiles, rate identities and sweeps");
  auto* verify = app.add_subcommand("verify", "invariant suite (nonzero exit on a hard failure)");
  for (auto* sub : {run, scan, multistart, field, basin, rates, verify}) add_common(sub, common);
  run->add_option("--init", ov.init, "initial point 'a, b, ...' or 'random'");
  run->add_option("--perturb", ov.perturb, "step along the most unstable eigendirection at the init");
  scan->add_option("--lo", ov.lo, "scan lower bound");
  scan->add_option("--hi", ov.hi, "scan upper bound");
  scan->add_option("--panels", ov.panels, "grid panels")->check(CLI::Range(2, 100000000));
  multistart->add_option("--starts", ov.starts, "random starts")->check(CLI::PositiveNumber);
  field->add_option("--x", ov.x, "lambda_1 axis 'lo, hi, count'");
  field->add_option("--y", ov.y, "lambda_2 axis 'lo, hi, count'");
  basin->add_option("--inits", ov.inits, "number of initializations")->check(CLI::PositiveNumber);
  rates->add_option("--lambda-t", ov.lambda_t, "starting points as multiples of mu");

  CLI11_PARSE(app, argc, argv);
  try {
    const CLI::App* sub = app.get_subcommands().front();
    const auto cfg = load(common, ov, *sub);
    fs::create_directories(common.out);
    const Output out{common.out, config_hash(cfg)};
    {
      auto os = out.open("config.resolved.ini");
      os << provenance_line(out.hash) << "\n" << to_config_text(cfg);
    }
    const int t = common.threads;
    if (sub == run) return cmd_run(cfg, out);
    if (sub == scan) return cmd_scan(cfg, out, t);
    if (sub == multistart) return cmd_multistart(cfg, out, t);
    if (sub == field) return cmd_field(cfg, out, t);
    if (sub == basin) return cmd_basin(cfg, out, t);
    if (sub == rates) return cmd_rates(cfg, out, t);
    return cmd_verify(cfg, out, t);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
