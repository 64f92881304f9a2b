#include "dunkl/experiments.hpp"

#include <cmath>
#include <iostream>
#include <limits>

#include "dunkl/config.hpp"
#include "dunkl/identities.hpp"
#include "dunkl/lattice.hpp"
#include "dunkl/quadrature.hpp"

namespace dunkl {

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"calculus-check", "fd-sim",  "gradient-bound", "lyapunov",   "invariant-measure",
                                              "lattice-sim",    "cauchy",  "finite-speed",   "ergodicity"};
  return names;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// What a subcommand hands back to the common emitter.
struct Outcome {
  std::vector<CheckRow> rows;
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<std::pair<std::string, Json>> documents;
  std::vector<ChecklistItem> checklist;
  Verdict verdict = Verdict::Pass;
  bool exploratory = false;
  std::vector<std::string> notes;
  Json results = Json::object();
};

struct Context {
  const Json& cfg;
  std::uint64_t seed;
};

const std::set<std::string> kCommon{"experiment", "seed"};

std::set<std::string> keys(std::initializer_list<std::string> extra) {
  std::set<std::string> s = kCommon;
  s.insert(extra.begin(), extra.end());
  return s;
}

const Json& block(const Json& cfg, const std::string& key) {
  static const Json null;
  auto it = cfg.find(key);
  return it == cfg.end() ? null : *it;
}

struct Semigroup {
  SystemConfig sys;
  DriftSpec drift = DriftSpec::linear(1.0);
  RunConfig rc;
  double t_final = 1.0;
};

Semigroup semigroup_setup(const Context& ctx) {
  Semigroup s;
  if (!ctx.cfg.contains("root_system")) throw SchemaError("missing key \"root_system\"");
  s.sys = parse_root_system(ctx.cfg.at("root_system"));
  if (ctx.cfg.contains("drift")) s.drift = parse_drift(ctx.cfg.at("drift"), s.sys.rs.dim);
  s.rc = parse_sim(block(ctx.cfg, "sim"), ctx.seed, &s.t_final);
  return s;
}

void require_linear(const DriftSpec& b, const std::string& what) {
  if (b.kind() != DriftKind::Linear) throw SchemaError(what + " needs the linear drift {\"kind\":\"linear\"}");
}

std::vector<double> point_of(const Json& cfg, const std::string& key, int dim, std::vector<double> fallback) {
  std::vector<double> x = get_vector(cfg, key, "config", fallback);
  if (static_cast<int>(x.size()) != dim)
    throw SchemaError(key + ": expected " + std::to_string(dim) + " coordinates");
  return x;
}

std::vector<SmoothFunction> functions_of(const std::vector<std::string>& texts, int dim) {
  std::vector<SmoothFunction> out;
  for (const auto& t : texts) {
    try {
      out.push_back(parse_observable(t, dim));
    } catch (const std::exception& e) {
      throw SchemaError("observable \"" + t + "\": " + e.what());
    }
  }
  return out;
}

// Quasi-random points of the ball, kept away from the walls so the
// finite-difference stencils stay inside one chamber.
std::vector<std::vector<double>> interior_probes(const RootSystem<double>& rs, std::size_t count, double radius,
                                                 double min_wall) {
  const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  std::vector<std::vector<double>> out;
  for (std::uint64_t i = 1; out.size() < count && i < 100000; ++i) {
    std::vector<double> x(rs.dim);
    double r2 = 0.0;
    for (int a = 0; a < rs.dim; ++a) {
      x[a] = radius * (2.0 * halton(i, primes[a]) - 1.0);
      r2 += x[a] * x[a];
    }
    if (r2 > radius * radius || distance_to_walls(rs, x.data()) < min_wall) continue;
    out.push_back(std::move(x));
  }
  return out;
}

// ---------------------------------------------------------------- calculus

Outcome calculus_check(const Context& ctx) {
  require_keys(ctx.cfg, keys({"root_system", "drift", "n_cases", "max_degree", "n_probes"}), "config");
  if (!ctx.cfg.contains("root_system")) throw SchemaError("missing key \"root_system\"");
  const SystemConfig sys = parse_root_system(ctx.cfg.at("root_system"));
  Json dj = ctx.cfg.contains("drift") ? ctx.cfg.at("drift") : Json{{"kind", "linear"}, {"c", 1}};
  const DriftSpec drift = parse_drift(dj, sys.rs.dim);
  const int n_cases = get_int(ctx.cfg, "n_cases", "config", 100);
  const int max_degree = get_int(ctx.cfg, "max_degree", "config", 6);
  const int n_probes = get_int(ctx.cfg, "n_probes", "config", 10000);
  if (n_cases < 1 || max_degree < 0 || n_probes < 1) throw SchemaError("n_cases, max_degree and n_probes must be positive");

  Outcome o;
  o.checklist = drift_checklist(sys.rs, drift, static_cast<std::size_t>(n_probes));
  std::vector<IdentityResult> ids;
  if (sys.exact) {
    IdentitySuiteOptions opt;
    opt.n_cases = static_cast<std::size_t>(n_cases);
    opt.max_degree = max_degree;
    opt.seed = ctx.seed;
    ids = identity_suite(*sys.exact, opt);
    if (drift.kind() == DriftKind::Linear)
      ids.push_back(generator_identity(*sys.exact, get_exact(dj.at("c"), "drift.c"), static_cast<std::size_t>(n_cases),
                                       ctx.seed));
  } else {
    o.notes.push_back("root system has no exact form; identities checked in floating point (relative 1e-9)");
    if (drift.kind() == DriftKind::Linear)
      ids.push_back(generator_identity(sys.rs, drift.c(), static_cast<std::size_t>(n_cases), ctx.seed));
  }
  Json idj = Json::array();
  for (const auto& r : ids) {
    CheckRow row;
    row.experiment = "calculus-check";
    row.system = r.system;
    row.k = r.k;
    row.c = drift.kind() == DriftKind::Linear ? drift.c() : kNaN;
    row.quantity = r.check;
    row.estimate = r.max_abs_residual;
    row.bound = 0.0;
    row.margin = r.max_abs_residual == 0.0 ? 0.0 : -r.max_abs_residual;
    row.pass = r.pass;
    o.rows.push_back(row);
    idj.push_back({{"check", r.check}, {"system", r.system}, {"k", r.k}, {"max_abs_residual", json_number(r.max_abs_residual)}});
  }
  const double eta = eta_constant(sys.rs, drift);
  CheckRow er;
  er.experiment = "calculus-check";
  er.system = sys.rs.name;
  er.k = k_label(sys.rs);
  er.quantity = "eta";
  er.estimate = eta;
  if (drift.kind() == DriftKind::Linear) {
    er.c = drift.c();
    er.bound = -drift.c() + 2.0 * drift.c() * sys.rs.gamma;
    const double tol = 1e-12 * std::max(1.0, std::abs(er.bound));
    er.margin = tol - std::abs(eta - er.bound);
    er.pass = er.margin >= 0.0;
    if (sys.exact) {
      const QSqrt2 ee = eta_linear_exact(get_exact(dj.at("c"), "drift.c"), sys.exact->gamma);
      o.results["eta_exact"] = ee.to_string();
    }
  } else {
    er.c = kNaN;
    er.bound = kNaN;
    er.margin = kNaN;
  }
  o.rows.push_back(er);
  o.results["identities"] = idj;
  o.results["eta"] = json_number(eta);
  o.documents.push_back({"identities.json", idj});
  o.verdict = rows_verdict(o.rows);
  return o;
}

// ---------------------------------------------------------------- fd-sim

Outcome fd_sim(const Context& ctx) {
  require_keys(ctx.cfg, keys({"root_system", "drift", "sim", "start", "times", "functions"}), "config");
  Semigroup s = semigroup_setup(ctx);
  const int n = s.sys.rs.dim;
  std::vector<double> x0(n, 0.0);
  x0[0] = 1.0;
  const auto x = point_of(ctx.cfg, "start", n, x0);
  const auto times = get_vector(ctx.cfg, "times", "config", std::vector<double>{s.t_final});
  Outcome o;
  o.checklist = drift_checklist(s.sys.rs, s.drift, 10000);
  ProcessModel m(s.sys.rs, s.drift);
  if (s.drift.kind() == DriftKind::Linear) {
    o.rows = verify_moments(m, s.rc, x, times);
  } else {
    o.notes.push_back("custom drift: no closed-form moment oracle");
  }
  for (const auto& f : functions_of(get_strings(ctx.cfg, "functions", "config", std::vector<std::string>{}), n)) {
    for (const auto& e : estimate_Pt(m, s.rc, f, x, times)) {
      CheckRow row;
      row.experiment = "fd-sim";
      row.system = s.sys.rs.name;
      row.k = k_label(s.sys.rs);
      row.c = s.drift.kind() == DriftKind::Linear ? s.drift.c() : kNaN;
      row.t = e.t;
      row.x = x;
      row.quantity = "P_t " + f.name;
      row.estimate = e.mean;
      row.std_error = e.std_error;
      row.bound = kNaN;
      row.margin = kNaN;
      row.pass = e.reliable;
      o.rows.push_back(row);
    }
  }
  o.verdict = rows_verdict(o.rows);
  return o;
}

// ---------------------------------------------------------------- gradient bound

Outcome gradient_bound(const Context& ctx) {
  require_keys(ctx.cfg,
               keys({"root_system", "drift", "sim", "functions", "probes", "probe_count", "probe_radius", "times",
                     "fd_step", "fd_tolerance"}),
               "config");
  Semigroup s = semigroup_setup(ctx);
  const int n = s.sys.rs.dim;
  const auto fs = functions_of(get_strings(ctx.cfg, "functions", "config", std::vector<std::string>{"x1", "tanh(x1)"}), n);
  std::vector<std::vector<double>> probes;
  const double fd_step = get_number(ctx.cfg, "fd_step", "config", 1e-3);
  if (!(fd_step > 0.0)) throw SchemaError("fd_step must be positive");
  if (ctx.cfg.contains("probes")) {
    probes = get_points(ctx.cfg, "probes", "config");
    for (const auto& p : probes)
      if (static_cast<int>(p.size()) != n) throw SchemaError("probes: wrong dimension");
  } else {
    const int count = get_int(ctx.cfg, "probe_count", "config", 4);
    const double radius = get_number(ctx.cfg, "probe_radius", "config", 3.0);
    probes = interior_probes(s.sys.rs, static_cast<std::size_t>(std::max(1, count)), radius, 100.0 * fd_step);
  }
  GradientBoundOptions opt;
  opt.times = get_vector(ctx.cfg, "times", "config", opt.times);
  opt.fd_step = fd_step;
  opt.fd_tolerance = get_number(ctx.cfg, "fd_tolerance", "config", opt.fd_tolerance);
  Outcome o;
  o.checklist = drift_checklist(s.sys.rs, s.drift, 10000);
  ProcessModel m(s.sys.rs, s.drift);
  o.rows = verify_gradient_bound(m, s.rc, fs, probes, opt);
  const double eta = eta_constant(s.sys.rs, s.drift);
  o.results["eta"] = json_number(eta);
  o.verdict = rows_verdict(o.rows);
  if (eta >= 0.0 || s.sys.rs.gamma >= 0.5) {
    o.exploratory = true;
    o.notes.push_back("outside the coercive regime of the gradient bound (eta >= 0 or gamma >= 1/2); exploratory run");
    o.verdict = Verdict::Inconclusive;
  }
  return o;
}

// ---------------------------------------------------------------- lyapunov

Outcome lyapunov(const Context& ctx) {
  require_keys(ctx.cfg, keys({"root_system", "drift", "sim", "starts", "times", "r_max", "n_grid"}), "config");
  Semigroup s = semigroup_setup(ctx);
  require_linear(s.drift, "lyapunov");
  const int n = s.sys.rs.dim;
  std::vector<std::vector<double>> starts;
  if (ctx.cfg.contains("starts")) {
    starts = get_points(ctx.cfg, "starts", "config");
    for (const auto& p : starts)
      if (static_cast<int>(p.size()) != n) throw SchemaError("starts: wrong dimension");
  } else {
    std::vector<double> x(n, 0.0);
    x[0] = 3.0;
    starts.push_back(x);
  }
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.5 * i);
  const auto times = get_vector(ctx.cfg, "times", "config", grid);
  const double r_max = get_number(ctx.cfg, "r_max", "config", 50.0);
  const int n_grid = get_int(ctx.cfg, "n_grid", "config", 100000);
  Outcome o;
  o.checklist = drift_checklist(s.sys.rs, s.drift, 10000);
  const LyapunovConstants lc = lyapunov_constants(s.sys.rs, s.drift.c());
  o.results["C1"] = json_number(lc.c1);
  o.results["C2"] = json_number(lc.c2);
  o.rows.push_back(verify_lyapunov_pointwise(s.sys.rs, s.drift.c(), r_max, static_cast<std::size_t>(std::max(1, n_grid))));
  ProcessModel m(s.sys.rs, s.drift);
  for (auto& r : verify_lyapunov(m, s.rc, starts, times)) o.rows.push_back(r);
  o.verdict = rows_verdict(o.rows);
  return o;
}

// ---------------------------------------------------------------- invariant measure

std::vector<std::string> default_polys(int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
  for (int i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i) + "^2");
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) out.push_back("x" + std::to_string(i) + "*x" + std::to_string(j));
  std::string r4;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) r4 += (r4.empty() ? "" : " + ") + std::string("x") + std::to_string(i) + "^2*x" + std::to_string(j) + "^2";
  out.push_back(r4);
  return out;
}

Outcome invariant_measure(const Context& ctx) {
  require_keys(ctx.cfg,
               keys({"root_system", "drift", "sim", "polynomials", "functions", "start", "window_start", "window_dt",
                     "rel_tol", "restrict_to_span"}),
               "config");
  Semigroup s = semigroup_setup(ctx);
  require_linear(s.drift, "invariant-measure");
  Outcome o;
  RootSystem<double> rs = s.sys.rs;
  bool restrict = rs.dim > rs.rank;
  if (ctx.cfg.contains("restrict_to_span")) {
    if (!ctx.cfg.at("restrict_to_span").is_boolean()) throw SchemaError("restrict_to_span: expected a boolean");
    restrict = ctx.cfg.at("restrict_to_span").get<bool>() && rs.dim > rs.rank;
  }
  if (restrict) {
    rs = restrict_to_span(rs);
    o.notes.push_back("root system restricted to the span of its roots (dimension " + std::to_string(rs.dim) + ")");
  }
  const int n = rs.dim;
  o.checklist = drift_checklist(rs, s.drift, 10000);
  const double rel_tol = get_number(ctx.cfg, "rel_tol", "config", 1e-6);
  const double c = s.drift.c();
  if (n <= 2) {
    const auto polys = get_strings(ctx.cfg, "polynomials", "config", default_polys(n));
    try {
      for (const auto& chk : check_invariance(rs, c, polys, rel_tol)) {
        CheckRow row;
        row.experiment = "invariant-measure";
        row.system = rs.name;
        row.k = k_label(rs);
        row.c = c;
        row.quantity = "int L(" + chk.f + ") dnu";
        row.estimate = chk.integral;
        row.bound = rel_tol * std::max(1.0, chk.scale);
        row.margin = row.bound - std::abs(chk.integral);
        row.pass = chk.pass;
        o.rows.push_back(row);
      }
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("polynomials: ") + e.what());
    }
  } else {
    o.notes.push_back("quadrature is limited to N <= 2; only the Monte Carlo part was run");
  }
  std::vector<std::string> fdef;
  for (int i = 1; i <= n; ++i) fdef.push_back("x" + std::to_string(i) + "^2");
  const auto fs = functions_of(get_strings(ctx.cfg, "functions", "config", fdef), n);
  std::vector<double> x0(n, 0.0);
  x0[0] = 1.0;
  const auto start = point_of(ctx.cfg, "start", n, x0);
  InvariantMeasureOptions opt;
  opt.t_final = s.t_final > 1.0 ? s.t_final : opt.t_final;
  opt.window_start = get_number(ctx.cfg, "window_start", "config", 0.5 * opt.t_final);
  opt.window_dt = get_number(ctx.cfg, "window_dt", "config", opt.window_dt);
  if (!(opt.window_start >= 0.0 && opt.window_start <= opt.t_final && opt.window_dt > 0.0))
    throw SchemaError("need 0 <= window_start <= t_final and window_dt > 0");
  ProcessModel m(rs, s.drift);
  for (auto& r : verify_invariant_measure(m, s.rc, fs, start, opt)) o.rows.push_back(r);
  o.verdict = rows_verdict(o.rows);
  return o;
}

// ---------------------------------------------------------------- lattice

struct LatticeSetup {
  LatticeConfig lc;
  RunConfig rc;
  double t_final = 1.0;
};

LatticeSetup lattice_setup(const Context& ctx) {
  if (!ctx.cfg.contains("lattice")) throw SchemaError("missing key \"lattice\"");
  LatticeSetup s;
  s.lc = parse_lattice(ctx.cfg.at("lattice"));
  s.rc = parse_sim(block(ctx.cfg, "sim"), ctx.seed, &s.t_final);
  return s;
}

std::vector<ChecklistItem> lattice_checklist(const LatticeSpec& spec, const PropagationConstants& pc, bool ergodic) {
  std::vector<ChecklistItem> out;
  const DriftSpec b = DriftSpec::linear(spec.c);
  for (auto& it : drift_checklist(spec.rs, b, 2000)) out.push_back(it);
  std::vector<HypothesisAudit> audits;
  if (spec.exact) audits.push_back(audit_lattice_exact(spec));
  audits.push_back(audit_lattice_probes(spec));
  for (const auto& a : audits)
    for (const auto& it : a.items) out.push_back({it.name, it.passed ? "pass" : "fail", it.detail});
  const bool zeta_ok = std::isfinite(pc.zeta) && spec.decay == DecayType::Summable;
  out.push_back({"zeta_finite", zeta_ok ? "pass" : "warn", "zeta over the window = " + format_double(pc.zeta)});
  out.push_back({"eta_tilde_negative", pc.eta_tilde < 0.0 ? "pass" : "warn",
                 "eta~ = " + format_double(pc.eta_tilde) + ", C~ = " + format_double(pc.c_tilde)});
  if (ergodic)
    out.push_back({"c_tilde_below_minus_two_eta_tilde", pc.ergodic_regime ? "pass" : "warn",
                   "C~ = " + format_double(pc.c_tilde) + ", -2 eta~ = " + format_double(-2.0 * pc.eta_tilde)});
  return out;
}

Json constants_json(const PropagationConstants& pc) {
  return {{"eta", json_number(pc.eta)},           {"young", json_number(pc.young)},
          {"sum_e_max", json_number(pc.sum_e_max)}, {"eta_tilde", json_number(pc.eta_tilde)},
          {"c_tilde", json_number(pc.c_tilde)},     {"tau", json_number(pc.tau)},
          {"sigma", json_number(pc.sigma)},         {"zeta", json_number(pc.zeta)}};
}

// {"fill":[...], "sites":[{"site":[..],"value":[..]}]} on the given window.
std::vector<double> window_from(const Json& j, const LatticeSpec& spec, const Window& w, const std::string& where,
                                std::vector<double> fill_default) {
  const int n = spec.rs.dim;
  if (j.is_null()) return window_config(spec, w, {}, fill_default);
  require_keys(j, {"fill", "sites"}, where);
  const auto fill = get_vector(j, "fill", where, fill_default);
  if (static_cast<int>(fill.size()) != n) throw SchemaError(where + ".fill: expected N values");
  std::vector<std::pair<Site, std::vector<double>>> vals;
  if (j.contains("sites")) {
    if (!j.at("sites").is_array()) throw SchemaError(where + ".sites: expected an array");
    for (const auto& e : j.at("sites")) {
      require_keys(e, {"site", "value"}, where + ".sites");
      if (!e.contains("site")) throw SchemaError(where + ".sites: missing site");
      const Site s = parse_site(e.at("site"), spec.d, where + ".sites");
      const auto v = get_vector(e, "value", where + ".sites");
      if (static_cast<int>(v.size()) != n) throw SchemaError(where + ".sites: expected N values");
      if (w.index(s) < 0) throw SchemaError(where + ".sites: site outside the window");
      vals.push_back({s, v});
    }
  }
  return window_config(spec, w, vals, fill);
}

LatticeObservable observable_of(const Json& cfg, const LatticeSpec& spec) {
  const std::string text = get_string(cfg, "observable", "config", "tanh(x1)");
  Site site{};
  if (cfg.contains("observable_site")) site = parse_site(cfg.at("observable_site"), spec.d, "observable_site");
  try {
    return site_observable(text, spec.rs.dim, site);
  } catch (const LatticeError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError("observable \"" + text + "\": " + e.what());
  }
}

ProcessModel lattice_model(const LatticeSpec& spec) { return ProcessModel(spec.rs, DriftSpec::linear(spec.c)); }

std::string site_text(const Site& s, int d) { return site_label(s, d); }

Outcome lattice_sim(const Context& ctx) {
  require_keys(ctx.cfg, keys({"lattice", "sim", "observable", "observable_site", "start", "times"}), "config");
  LatticeSetup s = lattice_setup(ctx);
  const LatticeSpec& spec = s.lc.spec;
  const ProcessModel m = lattice_model(spec);
  const LatticeObservable f = observable_of(ctx.cfg, spec);
  const Window w = make_window(spec, spec.box_radius, spec.window_radius);
  const auto start = window_from(block(ctx.cfg, "start"), spec, w, "start", std::vector<double>(spec.rs.dim, 0.7));
  const auto times = get_vector(ctx.cfg, "times", "config", std::vector<double>{s.t_final});
  Outcome o;
  const PropagationConstants pc = compute_constants(spec, YoungChoice::Ergodicity);
  o.checklist = lattice_checklist(spec, pc, false);
  o.results["constants"] = constants_json(pc);
  for (const auto& r : lattice_estimate(spec, m, s.rc, f, start, times)) {
    CheckRow row;
    row.experiment = "lattice-sim";
    row.system = spec.rs.name;
    row.k = k_label(spec.rs);
    row.c = spec.c;
    row.t = r.t;
    row.quantity = "E " + f.f.name;
    row.estimate = r.estimate;
    row.std_error = r.std_error;
    row.bound = kNaN;
    row.margin = kNaN;
    o.rows.push_back(row);
  }
  if (spec.eps0 == 0.0 && f.sites.size() == 1) {
    // Decoupled: the site must reproduce a single-site run bit for bit.
    RunConfig single = s.rc;
    single.stream = site_stream(f.sites[0]);
    const int n = spec.rs.dim;
    const int idx = w.index(f.sites[0]);
    std::vector<double> x(start.begin() + idx * n, start.begin() + (idx + 1) * n);
    const auto ref = estimate_Pt(m, single, f.f, x, times);
    bool same = true;
    for (std::size_t t = 0; t < times.size(); ++t)
      same = same && ref[t].mean == o.rows[t].estimate && ref[t].std_error == o.rows[t].std_error;
    CheckRow row;
    row.experiment = "lattice-sim";
    row.system = spec.rs.name;
    row.k = k_label(spec.rs);
    row.c = spec.c;
    row.t = times.back();
    row.quantity = "decoupled bit-identity with single-site run";
    row.estimate = same ? 0.0 : 1.0;
    row.bound = 0.0;
    row.margin = same ? 0.0 : -1.0;
    row.pass = same;
    o.rows.push_back(row);
  }
  o.verdict = rows_verdict(o.rows);
  return o;
}

Outcome finite_speed(const Context& ctx) {
  require_keys(ctx.cfg,
               keys({"lattice", "sim", "observable", "observable_site", "sites", "s", "probe_count", "probe_radius",
                     "probe_fill", "fd_step", "envelope_probes"}),
               "config");
  LatticeSetup s = lattice_setup(ctx);
  const LatticeSpec& spec = s.lc.spec;
  const ProcessModel m = lattice_model(spec);
  const LatticeObservable f = observable_of(ctx.cfg, spec);
  std::vector<Site> sites;
  if (!ctx.cfg.contains("sites")) throw SchemaError("missing key \"sites\"");
  for (const auto& e : ctx.cfg.at("sites")) sites.push_back(parse_site(e, spec.d, "sites"));
  const double sval = get_number(ctx.cfg, "s", "config", 0.5);
  if (!(sval > 0.0)) throw SchemaError("s must be positive");
  const Window w = make_window(spec, spec.box_radius, spec.window_radius);
  const int count = get_int(ctx.cfg, "probe_count", "config", 1);
  const double radius = get_number(ctx.cfg, "probe_radius", "config", 1.5);
  auto probes = lattice_probes(spec, w, static_cast<std::size_t>(std::max(0, count)), radius, ctx.seed);
  if (ctx.cfg.contains("probe_fill")) {
    const auto fill = get_vector(ctx.cfg, "probe_fill", "config");
    if (static_cast<int>(fill.size()) != spec.rs.dim) throw SchemaError("probe_fill: expected N values");
    probes.push_back(window_config(spec, w, {}, fill));
  }
  if (probes.empty()) throw SchemaError("no probe configurations");
  const double fd_step = get_number(ctx.cfg, "fd_step", "config", 0.05);
  const int env = get_int(ctx.cfg, "envelope_probes", "config", 32);
  const FiniteSpeedReport rep = finite_speed_test(spec, m, s.rc, f, sites, sval, probes, fd_step,
                                                  static_cast<std::size_t>(std::max(1, env)));
  Outcome o;
  o.checklist = lattice_checklist(spec, rep.constants, false);
  Table t{{"site", "distance", "N_l", "gamma_tilde_est", "std_error", "envelope"}, {}};
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    t.rows.push_back({site_text(r.site, spec.d), std::to_string(r.distance), std::to_string(r.n_l),
                      format_double(r.gamma_tilde), format_double(r.std_error), format_double(r.envelope)});
    rows.push_back({{"site", site_text(r.site, spec.d)},
                    {"significant", r.significant},
                    {"roundoff_floor", json_number(r.floor)},
                    {"upper_bound", json_number(r.upper)}});
    CheckRow row;
    row.experiment = "finite-speed";
    row.system = spec.rs.name;
    row.k = k_label(spec.rs);
    row.c = spec.c;
    row.t = sval;
    row.quantity = "Gamma~^(" + site_text(r.site, spec.d) + ") P_s f, N_l=" + std::to_string(r.n_l);
    row.estimate = r.gamma_tilde;
    row.std_error = r.std_error;
    row.bound = r.envelope;
    row.margin = r.envelope - (r.significant ? r.gamma_tilde + 3.0 * r.std_error : r.upper);
    row.pass = row.margin >= 0.0;
    o.rows.push_back(row);
  }
  o.tables.push_back({"finite_speed.csv", t});
  o.results["sites"] = rows;
  o.results["constants"] = constants_json(rep.constants);
  o.results["source_sup"] = json_number(rep.source_sup);
  o.results["ratio"] = json_number(rep.ratio);
  o.results["ratio_upper"] = json_number(rep.ratio_upper);
  o.results["decreasing"] = rep.decreasing;
  o.results["below_envelope"] = rep.below_envelope;
  o.results["conclusive"] = rep.conclusive;
  o.results["norm"] = "probe-sup over " + std::to_string(probes.size()) + " configurations";
  o.verdict = !rep.conclusive ? Verdict::Inconclusive : (rep.pass ? Verdict::Pass : Verdict::Fail);
  return o;
}

Outcome cauchy(const Context& ctx) {
  require_keys(ctx.cfg,
               keys({"lattice", "sim", "observable", "observable_site", "t", "radii", "probe_count", "probe_radius",
                     "probe_fill"}),
               "config");
  LatticeSetup s = lattice_setup(ctx);
  const LatticeSpec& spec = s.lc.spec;
  const ProcessModel m = lattice_model(spec);
  const LatticeObservable f = observable_of(ctx.cfg, spec);
  const double t = get_number(ctx.cfg, "t", "config", s.t_final);
  std::vector<int> radii;
  for (double r : get_vector(ctx.cfg, "radii", "config", std::vector<double>{2, 4, 6, 8})) {
    if (r != std::floor(r) || r < 0) throw SchemaError("radii must be nonnegative integers");
    radii.push_back(static_cast<int>(r));
  }
  const Window big = make_window(spec, radii.back(), spec.min_window(radii.back()));
  const int count = get_int(ctx.cfg, "probe_count", "config", 0);
  const double radius = get_number(ctx.cfg, "probe_radius", "config", 1.5);
  auto probes = lattice_probes(spec, big, static_cast<std::size_t>(std::max(0, count)), radius, ctx.seed);
  const auto fill = get_vector(ctx.cfg, "probe_fill", "config", std::vector<double>(spec.rs.dim, 0.7));
  if (static_cast<int>(fill.size()) != spec.rs.dim) throw SchemaError("probe_fill: expected N values");
  probes.push_back(window_config(spec, big, {}, fill));
  const CauchyReport rep = cauchy_test(spec, m, s.rc, f, t, radii, probes);
  Outcome o;
  o.checklist = lattice_checklist(spec, compute_constants(spec, YoungChoice::FiniteSpeed), false);
  Table tab{{"radius_from", "radius_to", "n_tilde", "difference", "std_error", "exact_zero"}, {}};
  for (const auto& r : rep.rows) {
    tab.rows.push_back({std::to_string(r.radius_from), std::to_string(r.radius_to), std::to_string(r.n_tilde),
                        format_double(r.difference), format_double(r.std_error), r.exact_zero ? "true" : "false"});
    CheckRow row;
    row.experiment = "cauchy";
    row.system = spec.rs.name;
    row.k = k_label(spec.rs);
    row.c = spec.c;
    row.t = t;
    row.quantity = "D(" + std::to_string(r.radius_from) + "->" + std::to_string(r.radius_to) + ")";
    row.estimate = r.difference;
    row.std_error = r.std_error;
    row.bound = kNaN;
    row.margin = kNaN;
    o.rows.push_back(row);
  }
  o.tables.push_back({"cauchy.csv", tab});
  o.results["slope"] = json_number(rep.slope);
  o.results["slope_std_error"] = json_number(rep.slope_se);
  o.results["decreasing"] = rep.decreasing;
  o.results["conclusive"] = rep.conclusive;
  o.results["method"] = "pathwise tangent of switching on each shell, common random numbers";
  o.verdict = !rep.conclusive ? Verdict::Inconclusive : (rep.pass ? Verdict::Pass : Verdict::Fail);
  return o;
}

Outcome ergodicity(const Context& ctx) {
  require_keys(ctx.cfg, keys({"lattice", "sim", "observable", "observable_site", "omega", "omega_prime", "times"}),
               "config");
  LatticeSetup s = lattice_setup(ctx);
  const LatticeSpec& spec = s.lc.spec;
  const ProcessModel m = lattice_model(spec);
  const LatticeObservable f = observable_of(ctx.cfg, spec);
  const Window w = make_window(spec, spec.box_radius, spec.window_radius);
  const std::vector<double> zero(spec.rs.dim, 0.5);
  const auto omega = window_from(block(ctx.cfg, "omega"), spec, w, "omega", zero);
  const auto omega_p = window_from(block(ctx.cfg, "omega_prime"), spec, w, "omega_prime", zero);
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(0.25 * i);
  const auto times = get_vector(ctx.cfg, "times", "config", grid);
  const ErgodicityReport rep = ergodicity_test(spec, m, s.rc, f, omega, omega_p, times);
  Outcome o;
  o.checklist = lattice_checklist(spec, rep.constants, true);
  Table tab{{"t", "delta", "std_error"}, {}};
  for (const auto& r : rep.rows) {
    tab.rows.push_back({format_double(r.t), format_double(r.delta), format_double(r.std_error)});
    CheckRow row;
    row.experiment = "ergodicity";
    row.system = spec.rs.name;
    row.k = k_label(spec.rs);
    row.c = spec.c;
    row.t = r.t;
    row.quantity = "Delta(t)";
    row.estimate = r.delta;
    row.std_error = r.std_error;
    row.bound = kNaN;
    row.margin = kNaN;
    o.rows.push_back(row);
  }
  o.tables.push_back({"ergodicity.csv", tab});
  o.results["rate"] = json_number(rep.rate);
  o.results["rate_std_error"] = json_number(rep.rate_se);
  o.results["identical_configurations"] = rep.identical;
  o.results["conclusive"] = rep.conclusive;
  o.results["constants"] = constants_json(rep.constants);
  if (spec.eps0 == 0.0 && spec.rs.dim == 1 && spec.rs.num_positive() == 1)
    o.results["decoupled_rate_oracle"] = json_number(-spec.c * (1.0 + 2.0 * spec.rs.gamma));
  o.verdict = !rep.conclusive ? Verdict::Inconclusive : (rep.pass ? Verdict::Pass : Verdict::Fail);
  return o;
}

Outcome dispatch(const std::string& name, const Context& ctx) {
  if (name == "calculus-check") return calculus_check(ctx);
  if (name == "fd-sim") return fd_sim(ctx);
  if (name == "gradient-bound") return gradient_bound(ctx);
  if (name == "lyapunov") return lyapunov(ctx);
  if (name == "invariant-measure") return invariant_measure(ctx);
  if (name == "lattice-sim") return lattice_sim(ctx);
  if (name == "finite-speed") return finite_speed(ctx);
  if (name == "cauchy") return cauchy(ctx);
  if (name == "ergodicity") return ergodicity(ctx);
  throw SchemaError("unknown subcommand " + name);
}

std::uint64_t seed_of(const Json& cfg, const RunOptions& opt) {
  if (opt.seed) return *opt.seed;
  if (!cfg.contains("seed")) return 1;
  const Json& s = cfg.at("seed");
  if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
    throw SchemaError("seed must be a nonnegative integer");
  return s.get<std::uint64_t>();
}

}  // namespace

int run_subcommand(const std::string& name, const Json& config, const RunOptions& opt) {
  Outcome o;
  std::uint64_t seed = 1;
  std::string experiment = name;
  try {
    seed = seed_of(config, opt);
    if (config.contains("experiment")) experiment = get_string(config, "experiment", "config");
    o = dispatch(name, Context{config, seed});
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const LatticeError& e) {
    // The model could not be built, so the checklist holds that one item.
    o = Outcome{};
    o.verdict = Verdict::Fail;
    o.checklist.push_back({"lattice_model", "fail", e.what()});
  }
  const bool audit_failed = checklist_failed(o.checklist);
  if (audit_failed) o.verdict = Verdict::Fail;

  Json margins = Json::object();
  const double mm_all = min_margin(o.rows);
  margins["min_margin"] = std::isfinite(mm_all) ? Json(mm_all) : Json(nullptr);
  Json per = Json::array();
  for (const auto& r : o.rows)
    if (std::isfinite(r.margin)) per.push_back({{"quantity", r.quantity}, {"t", json_number(r.t)}, {"margin", json_number(r.margin)}});
  margins["rows"] = per;

  Json summary;
  summary["experiment"] = experiment;
  summary["subcommand"] = name;
  summary["status"] = verdict_name(o.verdict);
  summary["exploratory"] = o.exploratory;
  summary["notes"] = o.notes;
  summary["margins"] = margins;
  summary["seeds"] = {{"seed", seed}};
  summary["versions"] = versions_json();
  summary["hypotheses"] = checklist_json(o.checklist);
  summary["results"] = o.results;
  summary["config"] = config;
  summary["n_rows"] = o.rows.size();

  write_results_csv(opt.out / "results.csv", o.rows);
  for (const auto& [file, table] : o.tables) write_table_csv(opt.out / file, table);
  for (const auto& [file, doc] : o.documents) write_json(opt.out / file, doc);
  write_json(opt.out / "summary.json", summary);

  const double mm = min_margin(o.rows);
  std::cout << name << ": " << verdict_name(o.verdict) << " (" << o.rows.size() << " rows"
            << (std::isfinite(mm) ? ", min margin " + format_double(mm) : std::string()) << ")\n";
  if (audit_failed) {
    for (const auto& it : o.checklist)
      if (it.status == "fail") std::cerr << "hypothesis audit failed: " << it.item << ": " << it.detail << "\n";
    return kExitAudit;
  }
  return o.verdict == Verdict::Fail ? kExitFail : kExitPass;
}

}  // namespace dunkl
