#ifndef TRUNCEM_CONFIG_HPP
#define TRUNCEM_CONFIG_HPP

// Experiment configuration: a flat "key = value" text format with [sections].
//
//   dim = 2
//   mu = 1.5, 0.5
//   sigma = 1, 0; 0, 1          (rows separated by ';', default identity)
//   seed = 7
//
//   [truncation]
//   kind = box                  none | box | annulus | halfspace | union | soft
//   intervals = 1, 2; -3, 1.5   box axes or annulus shells (inf allowed)
//   metric = mahalanobis        annulus only: mahalanobis | euclidean
//   normal = 1, 0               halfspace only
//   offset = 0.5                halfspace only
//   soft = ramp                 soft only: step | ramp | logistic
//   params = 0, 1, 0.2, 1       family parameters, see TruncationSpec
//   axis = 0
//   flags = even, rotation_invariant   overrides the derived declarations
//   parts = 2                   union only; parts in [truncation.1], [truncation.2]
//
//   [quad]    abs_tol rel_tol window_radius max_panels nodes_per_axis mc_samples rng_seed method
//   [solver]  inner_tol outer_tol max_newton max_iters
//   [run]     init (vector | random) init_scale perturb
//   [scan]    lo hi panels
//   [multistart] starts box_scale accept_tol extra_starts (vectors separated by ';')
//   [field]   x y (lo, hi, count each)
//   [basin]   inits scale
//   [rates]   lambda_t n_xi widths xi
//
// Every parse error carries the line number and key.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "truncem/em_core.hpp"
#include "truncem/errors.hpp"
#include "truncem/landscape.hpp"
#include "truncem/model.hpp"
#include "truncem/quad.hpp"

namespace truncem {

struct RunOptions {
  std::optional<Vec> init;  // nullopt: seeded random
  double init_scale = 2.0;  // random inits: whitened box scaled by ||mu||
  double perturb = 0.0;     // step along the most unstable eigendirection at init
};

struct ScanOptions {
  std::optional<double> lo, hi;  // default [-4|mu|, 4|mu|]
  int panels = 4000;
};

struct MultistartConfig {
  int starts = 64;
  double box_scale = 3.0;
  double accept_tol = 1e-8;
  std::vector<Vec> extra_starts;
};

struct FieldOptions {
  GridAxis x{-3.0, 3.0, 21};
  GridAxis y{-3.0, 3.0, 21};
};

struct BasinOptions {
  int inits = 50;
  double scale = 2.0;
};

struct RatesOptions {
  std::vector<double> lambda_t;  // multiples of mu, default {1/4, 1/2, 3/4}
  int n_xi = 11;
  std::vector<double> widths{3.0, 2.0, 1.5, 1.0, 0.7, 0.5, 0.3};
  std::vector<double> xi;  // default a grid over [-2mu, 2mu]
};

struct ExperimentConfig {
  MixtureParams params{Vec::Ones(1), Mat::Identity(1, 1)};
  TruncationSpec trunc;
  QuadConfig quad;
  SolverConfig solver;
  std::uint64_t seed = 1;
  RunOptions run;
  ScanOptions scan;
  MultistartConfig multistart;
  FieldOptions field;
  BasinOptions basin;
  RatesOptions rates;

  Problem problem() const { return Problem(params, trunc, quad, solver); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

/// Section name -> key -> entry, with typed accessors that raise ConfigError.
class RawConfig {
 public:
  static RawConfig parse(std::istream& in) {
    RawConfig cfg;
    std::string line, section;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header", n);
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError("empty section name", n);
        cfg.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'", n);
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError("missing key", n);
      auto& sec = cfg.sections_[section];
      if (sec.count(key)) throw ConfigError("duplicate key", n, qualified(section, key));
      sec[key] = Entry{trim(line.substr(eq + 1)), n, false};
    }
    return cfg;
  }

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  const Entry* find(const std::string& sec, const std::string& key) {
    auto s = sections_.find(sec);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  /// Throws on the first key nobody asked for.
  void reject_unused() const {
    const Entry* first = nullptr;
    std::string name;
    for (const auto& [sec, keys] : sections_)
      for (const auto& [key, e] : keys)
        if (!e.used && (!first || e.line < first->line)) {
          first = &e;
          name = qualified(sec, key);
        }
    if (first) throw ConfigError("unknown key", first->line, name);
  }

  static std::string qualified(const std::string& sec, const std::string& key) {
    return sec.empty() ? key : sec + "." + key;
  }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

inline double parse_double(const std::string& s, int line, const std::string& key) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, v);
  if (t.empty() || r.ec != std::errc() || r.ptr != end) throw ConfigError("not a number: '" + t + "'", line, key);
  return v;
}

template <class I>
I parse_int(const std::string& s, int line, const std::string& key) {
  const std::string t = trim(s);
  I v{};
  const auto* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, v);
  if (t.empty() || r.ec != std::errc() || r.ptr != end) throw ConfigError("not an integer: '" + t + "'", line, key);
  return v;
}

inline std::vector<double> parse_list(const std::string& s, int line, const std::string& key) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part, line, key));
  return out;
}

inline std::vector<std::vector<double>> parse_rows(const std::string& s, int line, const std::string& key) {
  std::vector<std::vector<double>> out;
  for (const auto& row : split(s, ';')) out.push_back(parse_list(row, line, key));
  return out;
}

class Reader {
 public:
  Reader(RawConfig& raw, std::string section) : raw_(raw), section_(std::move(section)) {}

  const Entry* entry(const std::string& key) const { return raw_.find(section_, key); }
  std::string name(const std::string& key) const { return RawConfig::qualified(section_, key); }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const Entry* e = raw_.find(section_, key);
    throw ConfigError(what, e ? e->line : 0, name(key));
  }

  void get(const std::string& key, double& out) const {
    if (const auto* e = entry(key)) out = parse_double(e->value, e->line, name(key));
  }
  template <class I>
    requires std::is_integral_v<I>
  void get(const std::string& key, I& out) const {
    if (const auto* e = entry(key)) out = parse_int<I>(e->value, e->line, name(key));
  }
  void get(const std::string& key, std::string& out) const {
    if (const auto* e = entry(key)) out = e->value;
  }
  void get(const std::string& key, std::vector<double>& out) const {
    if (const auto* e = entry(key)) out = parse_list(e->value, e->line, name(key));
  }
  void get(const std::string& key, GridAxis& out) const {
    if (const auto* e = entry(key)) {
      const auto v = parse_list(e->value, e->line, name(key));
      if (v.size() != 3 || v[2] != std::floor(v[2]) || v[2] < 1 || !(v[0] <= v[1]))
        throw ConfigError("expected 'lo, hi, count' with lo <= hi and count >= 1", e->line, name(key));
      out = GridAxis{v[0], v[1], static_cast<int>(v[2])};
    }
  }
  Vec vector(const std::string& key, int d) const {
    const auto* e = entry(key);
    const auto v = parse_list(e->value, e->line, name(key));
    if (static_cast<int>(v.size()) != d)
      throw ConfigError("expected " + std::to_string(d) + " entries, got " + std::to_string(v.size()), e->line,
                        name(key));
    return Eigen::Map<const Vec>(v.data(), d);
  }

 private:
  RawConfig& raw_;
  std::string section_;
};

inline std::vector<Interval> parse_intervals(const Reader& r, const std::string& key) {
  const auto* e = r.entry(key);
  if (!e) r.fail(key, "missing required key");
  std::vector<Interval> out;
  for (const auto& row : parse_rows(e->value, e->line, r.name(key))) {
    if (row.size() != 2) throw ConfigError("each interval needs 'lo, hi'", e->line, r.name(key));
    out.push_back(Interval{row[0], row[1]});
  }
  return out;
}

inline TruncationSpec parse_truncation(RawConfig& raw, const std::string& section, int d) {
  Reader r(raw, section);
  std::string kind = "none";
  r.get("kind", kind);
  const auto* kind_entry = r.entry("kind");
  const int kind_line = kind_entry ? kind_entry->line : 0;
  TruncationSpec spec;
  try {
    if (kind == "none") {
      spec = TruncationSpec::none();
    } else if (kind == "box" || kind == "interval") {
      auto axes = parse_intervals(r, "intervals");
      if (static_cast<int>(axes.size()) != d) r.fail("intervals", "box needs one interval per dimension");
      spec = TruncationSpec::box(std::move(axes));
    } else if (kind == "annulus") {
      std::string metric = "mahalanobis";
      r.get("metric", metric);
      if (metric != "mahalanobis" && metric != "euclidean") r.fail("metric", "expected mahalanobis or euclidean");
      spec = TruncationSpec::annuli(parse_intervals(r, "intervals"),
                                    metric == "euclidean" ? Mat(Mat::Identity(d, d)) : Mat());
    } else if (kind == "halfspace") {
      if (!r.entry("normal")) r.fail("normal", "missing required key");
      double offset = 0.0;
      r.get("offset", offset);
      spec = TruncationSpec::half_space(r.vector("normal", d), offset);
    } else if (kind == "union") {
      int parts = 0;
      r.get("parts", parts);
      if (parts < 1) r.fail("parts", "union needs parts >= 1");
      std::vector<TruncationSpec> children;
      for (int i = 1; i <= parts; ++i) {
        const std::string child = section + "." + std::to_string(i);
        if (!raw.has_section(child)) r.fail("parts", "missing section [" + child + "]");
        children.push_back(parse_truncation(raw, child, d));
      }
      spec = TruncationSpec::union_of(std::move(children));
    } else if (kind == "soft") {
      std::string family;
      std::vector<double> p;
      int axis = 0;
      r.get("soft", family);
      r.get("params", p);
      r.get("axis", axis);
      if (axis < 0 || axis >= d) r.fail("axis", "axis out of range");
      auto need = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi)
          r.fail("params", family + " expects " + std::to_string(lo) + (lo == hi ? "" : "-" + std::to_string(hi)) +
                               " parameters");
      };
      if (family == "step") {
        need(3, 3);
        spec = TruncationSpec::soft_step(p[0], p[1], p[2], axis);
      } else if (family == "ramp") {
        need(2, 4);
        spec = TruncationSpec::soft_ramp(p[0], p[1], p.size() > 2 ? p[2] : 0.0, p.size() > 3 ? p[3] : 1.0, axis);
      } else if (family == "logistic") {
        need(2, 4);
        spec = TruncationSpec::soft_logistic(p[0], p[1], p.size() > 2 ? p[2] : 0.0, p.size() > 3 ? p[3] : 1.0,
                                             axis);
      } else {
        r.fail("soft", "unknown soft family '" + family + "' (step | ramp | logistic)");
      }
    } else {
      throw ConfigError("unknown truncation kind '" + kind + "'", kind_line, r.name("kind"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), kind_line, r.name("kind"));
  }
  if (const auto* e = r.entry("flags")) {
    bool even = false, rot = false;
    for (const auto& f : split(e->value, ',')) {
      if (f == "even") {
        even = true;
      } else if (f == "rotation_invariant") {
        rot = true;
      } else if (!f.empty() && f != "none") {
        throw ConfigError("unknown flag '" + f + "'", e->line, r.name("flags"));
      }
    }
    spec = spec.with_flags(even, rot);
  }
  return spec;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  auto raw = detail::RawConfig::parse(in);
  ExperimentConfig cfg;
  detail::Reader top(raw, "");
  int d = 0;
  top.get("dim", d);
  if (!top.entry("dim")) throw ConfigError("missing required key", 0, "dim");
  if (d < 1) top.fail("dim", "dim must be >= 1");
  if (!top.entry("mu")) throw ConfigError("missing required key", 0, "mu");
  const Vec mu = top.vector("mu", d);
  Mat sigma = Mat::Identity(d, d);
  if (const auto* e = top.entry("sigma")) {
    const auto rows = detail::parse_rows(e->value, e->line, "sigma");
    if (static_cast<int>(rows.size()) != d) throw ConfigError("sigma needs dim rows", e->line, "sigma");
    for (int i = 0; i < d; ++i) {
      if (static_cast<int>(rows[i].size()) != d) throw ConfigError("sigma needs dim columns", e->line, "sigma");
      for (int j = 0; j < d; ++j) sigma(i, j) = rows[i][j];
    }
  }
  try {
    cfg.params = MixtureParams(mu, sigma);
  } catch (const Error& ex) {
    const auto* e = top.entry("sigma");
    throw ConfigError(ex.what(), e ? e->line : 0, "sigma");
  }
  top.get("seed", cfg.seed);

  cfg.trunc = detail::parse_truncation(raw, "truncation", d);

  detail::Reader q(raw, "quad");
  q.get("abs_tol", cfg.quad.abs_tol);
  q.get("rel_tol", cfg.quad.rel_tol);
  q.get("window_radius", cfg.quad.window_radius);
  q.get("max_panels", cfg.quad.max_panels);
  q.get("nodes_per_axis", cfg.quad.nodes_per_axis);
  q.get("mc_samples", cfg.quad.mc_samples);
  q.get("rng_seed", cfg.quad.rng_seed);
  std::string method = "auto";
  q.get("method", method);
  static const std::map<std::string, MethodChoice> methods{{"auto", MethodChoice::Auto},
                                                           {"adaptive", MethodChoice::Adaptive1D},
                                                           {"tensor", MethodChoice::Tensor},
                                                           {"montecarlo", MethodChoice::MonteCarlo}};
  if (!methods.count(method)) q.fail("method", "expected auto | adaptive | tensor | montecarlo");
  cfg.quad.method = methods.at(method);
  try {
    cfg.quad.validate();
  } catch (const Error& ex) {
    throw ConfigError(ex.what(), 0, "quad");
  }

  detail::Reader s(raw, "solver");
  s.get("inner_tol", cfg.solver.inner_tol);
  s.get("outer_tol", cfg.solver.outer_tol);
  s.get("max_newton", cfg.solver.max_newton);
  s.get("max_iters", cfg.solver.max_iters);
  try {
    cfg.solver.validate();
  } catch (const Error& ex) {
    throw ConfigError(ex.what(), 0, "solver");
  }

  detail::Reader run(raw, "run");
  if (const auto* e = run.entry("init"); e && e->value != "random") cfg.run.init = run.vector("init", d);
  run.get("init_scale", cfg.run.init_scale);
  run.get("perturb", cfg.run.perturb);
  if (!(cfg.run.init_scale > 0)) run.fail("init_scale", "must be positive");

  detail::Reader sc(raw, "scan");
  if (const auto* e = sc.entry("lo")) cfg.scan.lo = detail::parse_double(e->value, e->line, "scan.lo");
  if (const auto* e = sc.entry("hi")) cfg.scan.hi = detail::parse_double(e->value, e->line, "scan.hi");
  sc.get("panels", cfg.scan.panels);
  if (cfg.scan.panels < 2) sc.fail("panels", "must be >= 2");

  detail::Reader ms(raw, "multistart");
  ms.get("starts", cfg.multistart.starts);
  ms.get("box_scale", cfg.multistart.box_scale);
  ms.get("accept_tol", cfg.multistart.accept_tol);
  if (const auto* e = ms.entry("extra_starts")) {
    for (const auto& row : detail::parse_rows(e->value, e->line, ms.name("extra_starts"))) {
      if (static_cast<int>(row.size()) != d) ms.fail("extra_starts", "each start needs dim entries");
      cfg.multistart.extra_starts.push_back(Eigen::Map<const Vec>(row.data(), d));
    }
  }
  if (cfg.multistart.starts < 1) ms.fail("starts", "must be >= 1");

  detail::Reader f(raw, "field");
  f.get("x", cfg.field.x);
  f.get("y", cfg.field.y);

  detail::Reader b(raw, "basin");
  b.get("inits", cfg.basin.inits);
  b.get("scale", cfg.basin.scale);
  if (cfg.basin.inits < 1) b.fail("inits", "must be >= 1");

  detail::Reader ra(raw, "rates");
  ra.get("lambda_t", cfg.rates.lambda_t);
  ra.get("n_xi", cfg.rates.n_xi);
  ra.get("widths", cfg.rates.widths);
  ra.get("xi", cfg.rates.xi);
  if (cfg.rates.n_xi < 2) ra.fail("n_xi", "must be >= 2");

  raw.reject_unused();
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Writing

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

inline std::string format_vec(const Vec& v) { return format_list(std::vector<double>(v.data(), v.data() + v.size())); }

namespace detail {

inline void write_truncation(std::ostream& os, const TruncationSpec& spec, const std::string& section) {
  os << "\n[" << section << "]\n";
  const auto& k = spec.kind();
  auto intervals = [&](const std::vector<Interval>& iv) {
    std::string s;
    for (std::size_t i = 0; i < iv.size(); ++i)
      s += (i ? "; " : "") + format_double(iv[i].lo) + ", " + format_double(iv[i].hi);
    return s;
  };
  std::vector<std::pair<std::string, const TruncationSpec*>> children;
  if (std::holds_alternative<trunc::ConstantOne>(k)) {
    os << "kind = none\n";
  } else if (const auto* b = std::get_if<trunc::Box>(&k)) {
    os << "kind = box\nintervals = " << intervals(b->axes) << "\n";
  } else if (const auto* a = std::get_if<trunc::AnnulusUnion>(&k)) {
    os << "kind = annulus\nintervals = " << intervals(a->radii) << "\n";
    if (a->metric.size() != 0) {
      if (a->metric != Mat::Identity(a->metric.rows(), a->metric.cols()))
        throw InvalidArgument("an annulus with a custom metric cannot be written to a config");
      os << "metric = euclidean\n";
    }
  } else if (const auto* h = std::get_if<trunc::HalfSpace>(&k)) {
    os << "kind = halfspace\nnormal = " << format_vec(h->normal) << "\noffset = " << format_double(h->offset)
       << "\n";
  } else if (const auto* u = std::get_if<trunc::Union>(&k)) {
    os << "kind = union\nparts = " << u->parts.size() << "\n";
    for (std::size_t i = 0; i < u->parts.size(); ++i)
      children.emplace_back(section + "." + std::to_string(i + 1), &u->parts[i]);
  } else if (const auto* s = std::get_if<trunc::Soft>(&k)) {
    if (s->family == "custom") throw InvalidArgument("a custom soft truncation cannot be written to a config");
    os << "kind = soft\nsoft = " << s->family << "\nparams = " << format_list(s->params) << "\naxis = " << s->axis
       << "\n";
  }
  std::string flags;
  if (spec.declared_even()) flags += "even";
  if (spec.declared_rotation_invariant()) flags += flags.empty() ? "rotation_invariant" : ", rotation_invariant";
  os << "flags = " << (flags.empty() ? "none" : flags) << "\n";
  for (const auto& [name, child] : children) write_truncation(os, *child, name);
}

}  // namespace detail

/// Canonical text of a config; parse_config(to_config_text(c)) reproduces c.
inline std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  const int d = c.params.dim();
  os << "dim = " << d << "\nmu = " << format_vec(c.params.mu()) << "\nsigma = ";
  for (int i = 0; i < d; ++i) os << (i ? "; " : "") << format_vec(c.params.sigma().row(i).transpose());
  os << "\nseed = " << c.seed << "\n";
  detail::write_truncation(os, c.trunc, "truncation");
  static const char* methods[] = {"auto", "adaptive", "tensor", "montecarlo"};
  const auto& q = c.quad;
  os << "\n[quad]\nabs_tol = " << format_double(q.abs_tol) << "\nrel_tol = " << format_double(q.rel_tol)
     << "\nwindow_radius = " << format_double(q.window_radius) << "\nmax_panels = " << q.max_panels
     << "\nnodes_per_axis = " << q.nodes_per_axis << "\nmc_samples = " << q.mc_samples
     << "\nrng_seed = " << q.rng_seed << "\nmethod = " << methods[static_cast<int>(q.method)] << "\n";
  const auto& s = c.solver;
  os << "\n[solver]\ninner_tol = " << format_double(s.inner_tol) << "\nouter_tol = " << format_double(s.outer_tol)
     << "\nmax_newton = " << s.max_newton << "\nmax_iters = " << s.max_iters << "\n";
  os << "\n[run]\ninit = " << (c.run.init ? format_vec(*c.run.init) : "random")
     << "\ninit_scale = " << format_double(c.run.init_scale) << "\nperturb = " << format_double(c.run.perturb) << "\n";
  os << "\n[scan]\n";
  if (c.scan.lo) os << "lo = " << format_double(*c.scan.lo) << "\n";
  if (c.scan.hi) os << "hi = " << format_double(*c.scan.hi) << "\n";
  os << "panels = " << c.scan.panels << "\n";
  os << "\n[multistart]\nstarts = " << c.multistart.starts << "\nbox_scale = " << format_double(c.multistart.box_scale)
     << "\naccept_tol = " << format_double(c.multistart.accept_tol) << "\n";
  if (!c.multistart.extra_starts.empty()) {
    os << "extra_starts = ";
    for (std::size_t i = 0; i < c.multistart.extra_starts.size(); ++i)
      os << (i ? "; " : "") << format_vec(c.multistart.extra_starts[i]);
    os << "\n";
  }
  auto axis = [](const GridAxis& a) {
    return format_double(a.lo) + ", " + format_double(a.hi) + ", " + std::to_string(a.count);
  };
  os << "\n[field]\nx = " << axis(c.field.x) << "\ny = " << axis(c.field.y) << "\n";
  os << "\n[basin]\ninits = " << c.basin.inits << "\nscale = " << format_double(c.basin.scale) << "\n";
  os << "\n[rates]\n";
  if (!c.rates.lambda_t.empty()) os << "lambda_t = " << format_list(c.rates.lambda_t) << "\n";
  os << "n_xi = " << c.rates.n_xi << "\nwidths = " << format_list(c.rates.widths) << "\n";
  if (!c.rates.xi.empty()) os << "xi = " << format_list(c.rates.xi) << "\n";
  return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the canonical config text, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_config_text(c))));
  return buf;
}

}  // namespace truncem

#endif  // TRUNCEM_CONFIG_HPP
