// One PASS/FAIL line per acceptance criterion. Tolerances and replica
// counts are pinned here; a run takes several minutes on one core.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>

#include "dunkl/identities.hpp"
#include "dunkl/lattice.hpp"
#include "dunkl/verify.hpp"

using namespace dunkl;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

QSqrt2 q(const char* s) { return QSqrt2::parse(s); }

RootSystem<QSqrt2> exact(Family f, int rank, std::vector<QSqrt2> k) { return build_standard<QSqrt2>(f, rank, k); }

RunConfig replicas(std::size_t n, double dt = 1e-3) {
  RunConfig rc;
  rc.n_replicas = n;
  rc.params.dt = dt;
  return rc;
}

bool all_pass(const std::vector<CheckRow>& rows, Outcome& o, const std::string& tag) {
  bool ok = true;
  for (const auto& r : rows)
    if (!r.pass) {
      ok = false;
      o.detail << " [" << tag << " " << r.quantity << " t=" << r.t << " margin " << r.margin << "]";
    }
  return ok;
}

double min_margin(const std::vector<CheckRow>& rows) {
  double m = INFINITY;
  for (const auto& r : rows)
    if (std::isfinite(r.margin)) m = std::min(m, r.margin);
  return m;
}

// 1. Exact identities on random rational polynomials and multiplicities.
void identities(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  IdentitySuiteOptions opt;
  opt.n_cases = 100;
  opt.max_degree = 6;
  std::size_t checks = 0;
  for (auto rs : {exact(Family::A, 1, {q("1/2")}), exact(Family::A, 2, {q("1/2")}), exact(Family::A, 3, {q("1/2")}),
                  exact(Family::D, 4, {q("1/2")})}) {
    for (const auto& r : identity_suite(rs, opt)) {
      ++checks;
      o.require(r.pass && r.max_abs_residual == 0.0 && r.cases == 100, r.system + " " + r.check);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(checks == 20, "five checks on four systems");
  o.require(secs <= 5.0, "runtime <= 5 s");
  o.detail << checks << " check families, all residuals 0, " << secs << " s";
}

// 2. Generator decomposition and nonnegative jump rates.
void decomposition(Outcome& o) {
  const std::vector<RootSystem<QSqrt2>> catalog{exact(Family::A, 1, {q("1/4")}), exact(Family::A, 2, {q("1/3")}),
                                                exact(Family::A, 3, {q("1/5")}),
                                                exact(Family::B, 2, {q("1/4"), q("1/2")}),
                                                exact(Family::D, 4, {q("1/3")})};
  for (const auto& rs : catalog) {
    const auto r = generator_identity(rs, q("3/2"), 30, 2);
    o.require(r.pass && r.max_abs_residual == 0.0, rs.name + " exact decomposition");
    for (const auto& it : audit_drift(to_floating(rs), DriftSpec::linear(1.5), 10000).items)
      o.require(it.passed, rs.name + " " + it.name);
  }
  const auto i2 = build_standard<double>(Family::I2, 5, {0.3});
  const auto r = generator_identity(i2, 1.5, 30, 2);
  o.require(r.pass, "I_2(5) decomposition (floating, relative 1e-9)");
  for (const auto& it : audit_drift(i2, DriftSpec::linear(1.5), 10000).items) o.require(it.passed, "I_2(5) " + it.name);
  o.detail << "A1 A2 A3 B2 D4 exact, I2(5) residual " << r.max_abs_residual << ", rates >= 0 at 1e4 probes";
}

// 3. eta for the linear drift, in exact arithmetic.
void eta(Outcome& o) {
  const QSqrt2 a = eta_linear_exact(QSqrt2(1), q("1/4"));
  const QSqrt2 b = eta_linear_exact(QSqrt2(1), q("1/2"));
  o.require(a == q("-1/2"), "eta(1, 1/4) = -1/2");
  o.require(b == QSqrt2(0), "eta(1, 1/2) = 0");
  o.detail << "eta(1,1/4) = " << a.to_string() << ", eta(1,1/2) = " << b.to_string();
}

// 4. Rank-one moments against the closed forms.
void moments(Outcome& o) {
  const ProcessModel m(to_floating(exact(Family::A, 1, {q("1/4")})), DriftSpec::linear(1.0));
  const auto rows = verify_moments(m, replicas(100000), {1.0}, {0.25, 0.5, 1.0, 2.0, 5.0});
  for (const auto& r : rows) {
    if (r.t == 5.0) {
      if (r.quantity == "E |X_t|^2") {
        const double rel = std::abs(r.estimate - 1.5) / 1.5;
        o.require(rel <= 0.02, "stationary second moment within 2% of 1.5");
        o.detail << "E|X_5|^2 = " << r.estimate << " (" << 100.0 * rel << "% off 1.5); ";
      }
      continue;
    }
    o.require(r.pass, r.quantity + " at t=" + std::to_string(r.t) + " within 3 sigma");
  }
  double worst = 0.0;
  for (const auto& r : rows)
    if (r.t < 5.0) worst = std::max(worst, std::abs(r.estimate - r.bound) / r.std_error);
  o.detail << "largest deviation " << worst << " sigma over t in {.25,.5,1,2}";
}

// 5. Invariant measure: exact invariance on polynomials and Monte Carlo.
void invariant(Outcome& o) {
  struct Case {
    RootSystem<double> rs;
    std::vector<std::string> polys;
    std::vector<std::string> mc;
    std::vector<double> start;
  };
  const std::vector<Case> cases{
      {to_floating(exact(Family::A, 1, {q("1/4")})), {"x1", "x1^2", "x1^4"}, {"x1^2", "x1^4"}, {1.0}},
      {restrict_to_span(to_floating(exact(Family::A, 2, {q("1/10")}))),
       {"x1", "x2", "x1^2", "x2^2", "x1*x2", "x1^4 + 2*x1^2*x2^2 + x2^4"},
       {"x1^2", "x2^2", "x1*x2", "x1^4 + 2*x1^2*x2^2 + x2^4"},
       {0.6, 0.8}},
      {to_floating(exact(Family::B, 2, {q("1/8"), q("1/4")})),
       {"x1", "x2", "x1^2", "x2^2", "x1*x2", "x1^4 + 2*x1^2*x2^2 + x2^4"},
       {"x1^2", "x2^2", "x1*x2", "x1^4 + 2*x1^2*x2^2 + x2^4"},
       {1.1, 0.4}}};
  InvariantMeasureOptions opt;
  opt.t_final = 6.0;
  opt.window_start = 4.0;
  opt.window_dt = 0.25;
  double worst_int = 0.0;
  for (const auto& c : cases) {
    for (const auto& r : check_invariance(c.rs, 1.0, c.polys, 1e-6)) {
      o.require(r.pass, c.rs.name + " int L(" + r.f + ") dnu");
      worst_int = std::max(worst_int, std::abs(r.integral) / std::max(1.0, r.scale));
    }
    std::vector<SmoothFunction> fs;
    for (const auto& t : c.mc) fs.push_back(parse_observable(t, c.rs.dim));
    const ProcessModel m(c.rs, DriftSpec::linear(1.0));
    const auto rows = verify_invariant_measure(m, replicas(4000, 2e-3), fs, c.start, opt);
    o.require(all_pass(rows, o, c.rs.name), c.rs.name + " Monte Carlo within 3 sigma");
  }
  o.detail << "max |int Lf dnu| / scale = " << worst_int << " on A1, A2 plane, B2; Monte Carlo rows within 3 sigma";
}

// 6. Gradient bound on A1 and the A2 plane.
void gradient(Outcome& o) {
  GradientBoundOptions opt;
  opt.times = {0.0, 0.25, 0.5, 1.0};
  const std::vector<SmoothFunction> fs{parse_observable("x1", 1), parse_observable("tanh(x1)", 1)};
  double worst_t0 = 0.0;
  std::size_t n = 0;
  for (const char* gamma : {"1/4", "2/5"}) {
    const QSqrt2 g = q(gamma);
    const auto a1 = to_floating(exact(Family::A, 1, {g}));
    const auto a2 = restrict_to_span(to_floating(exact(Family::A, 2, {g / QSqrt2(3)})));
    for (const auto& rs : {a1, a2}) {
      std::vector<SmoothFunction> f = fs;
      if (rs.dim == 2) f = {parse_observable("x1", 2), parse_observable("tanh(x1)", 2)};
      std::vector<std::vector<double>> probes =
          rs.dim == 1 ? std::vector<std::vector<double>>{{0.4}, {-1.3}, {2.9}}
                      : std::vector<std::vector<double>>{{0.5, 0.2}, {-1.2, 1.9}, {2.1, -1.6}};
      const ProcessModel m(rs, DriftSpec::linear(1.0));
      const auto rows = verify_gradient_bound(m, replicas(2000), f, probes, opt);
      o.require(all_pass(rows, o, rs.name), rs.name + " gamma=" + gamma);
      for (const auto& r : rows) {
        ++n;
        if (r.t == 0.0) worst_t0 = std::max(worst_t0, std::abs(r.estimate - r.bound) / std::max(1.0, std::abs(r.bound)));
      }
    }
  }
  o.require(worst_t0 <= 1e-4, "t=0 equality within 1e-4");
  o.detail << n << " rows, t=0 relative gap " << worst_t0;
}

// 7. Lyapunov function.
void lyapunov(Outcome& o) {
  std::vector<double> times;
  for (int i = 0; i <= 10; ++i) times.push_back(0.5 * i);
  double worst = INFINITY;
  for (const auto& [rs, x0] :
       {std::pair{to_floating(exact(Family::A, 1, {q("1/4")})), std::vector<double>{3.0}},
        std::pair{to_floating(exact(Family::B, 2, {q("1/4"), q("1/2")})), std::vector<double>{2.0, -1.0}}}) {
    const CheckRow p = verify_lyapunov_pointwise(rs, 1.0, 50.0, 100000);
    o.require(p.pass, rs.name + " pointwise drift condition on [0,50]");
    const ProcessModel m(rs, DriftSpec::linear(1.0));
    const auto rows = verify_lyapunov(m, replicas(2000), {x0}, times);
    o.require(all_pass(rows, o, rs.name), rs.name + " E rho bound");
    worst = std::min({worst, p.margin, min_margin(rows)});
  }
  o.detail << "A1 and B2, smallest margin " << worst;
}

const RootSystem<QSqrt2> kA1 = exact(Family::A, 1, {q("1/4")});

LatticeSpec chain(double eps0, int box, int window) {
  return build_default_model(1, to_floating(kA1), kA1, 1.0, eps0, DecayType::Summable, 1.0, 2, box, window);
}

// 8. Decoupled lattice and exact audits.
void lattice(Outcome& o) {
  const LatticeSpec spec = chain(0.0, 4, 5);
  const ProcessModel m(spec.rs, DriftSpec::linear(1.0));
  const Window w = make_window(spec, 4, 5);
  bool identical = true;
  for (int s : {0, 3}) {
    const Site site{s};
    const auto start = window_config(spec, w, {{site, {0.8}}}, {-0.3});
    const auto lat = lattice_estimate(spec, m, replicas(500), site_observable("tanh(x1)", 1, site), start, {0.5, 1.0});
    RunConfig single = replicas(500);
    single.stream = site_stream(site);
    const auto ref = estimate_Pt(m, single, parse_observable("tanh(x1)", 1), {0.8}, {0.5, 1.0});
    for (std::size_t i = 0; i < ref.size(); ++i)
      identical = identical && lat[i].estimate == ref[i].mean && lat[i].std_error == ref[i].std_error;
  }
  o.require(identical, "eps0 = 0 bit-identical to single-site runs");
  std::size_t items = 0;
  for (double eps0 : {0.0, 0.1}) {
    for (const auto& it : audit_lattice_exact(chain(eps0, 4, 5)).items) {
      ++items;
      o.require(it.passed, it.name);
    }
  }
  const auto b2x = exact(Family::B, 2, {q("1/4"), q("1/2")});
  for (const auto& it :
       audit_lattice_exact(build_default_model(1, to_floating(b2x), b2x, 1.0, 0.1, DecayType::Summable, 1.0, 2, 2, 3))
           .items) {
    ++items;
    o.require(it.passed, "B2 " + it.name);
  }
  o.detail << "bit-identical at two sites, " << items << " exact audit items pass";
}

// 9. Finite speed of propagation.
void finite_speed(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const LatticeSpec spec = chain(0.1, 4, 5);
  const ProcessModel m(spec.rs, DriftSpec::linear(1.0));
  const Window w = make_window(spec, 4, 5);
  auto probes = lattice_probes(spec, w, 1, 1.5);
  probes.push_back(window_config(spec, w, {}, {0.7}));
  const auto rep = finite_speed_test(spec, m, replicas(1000), site_observable("tanh(x1)", 1),
                                     {Site{1}, Site{2}, Site{4}}, 0.5, probes, 0.05);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<int> nl;
  for (const auto& r : rep.rows) nl.push_back(r.n_l);
  o.require(nl == std::vector<int>{1, 2, 3}, "N_l = 1, 2, 3");
  o.require(rep.decreasing, "strictly decreasing");
  o.require(rep.ratio_upper < 1.0, "ratio < 1 at 3 sigma");
  o.require(rep.below_envelope, "below the envelope");
  o.require(rep.conclusive, "significant estimates");
  o.require(secs <= 600.0, "runtime <= 10 min");
  for (const auto& r : rep.rows) o.detail << "N=" << r.n_l << ": " << r.gamma_tilde << " (env " << r.envelope << "); ";
  o.detail << "ratio " << rep.ratio << " (+3s " << rep.ratio_upper << "), " << secs << " s";
}

// 10. Cauchy property of the truncations.
void cauchy(Outcome& o) {
  const auto f = site_observable("tanh(x1)", 1);
  for (double eps0 : {0.1, 0.0}) {
    const LatticeSpec spec = chain(eps0, 8, 9);
    const ProcessModel m(spec.rs, DriftSpec::linear(1.0));
    const Window big = make_window(spec, 8, spec.min_window(8));
    const auto rep = cauchy_test(spec, m, replicas(300), f, 1.0, {2, 4, 6, 8}, {window_config(spec, big, {}, {0.7})});
    if (eps0 > 0.0) {
      o.require(rep.decreasing, "D_n decreasing");
      o.require(rep.slope + 3.0 * rep.slope_se <= 0.0, "log-slope nonpositive at 3 sigma");
      o.require(rep.conclusive && rep.pass, "coupled run passes");
      for (const auto& r : rep.rows) o.detail << "D(" << r.radius_from << "->" << r.radius_to << ")=" << r.difference << "; ";
      o.detail << "slope " << rep.slope << " +- " << rep.slope_se << "; ";
    } else {
      bool zero = true;
      for (const auto& r : rep.rows) zero = zero && r.difference == 0.0 && r.exact_zero;
      o.require(zero, "D_n = 0 exactly at eps0 = 0");
      o.detail << "eps0=0 all exactly 0";
    }
  }
}

// 11. Exponential ergodicity.
void ergodicity(Outcome& o) {
  const auto f = site_observable("tanh(x1)", 1);
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0};
  for (double eps0 : {0.0, 0.1}) {
    const LatticeSpec spec = chain(eps0, 6, 7);
    const ProcessModel m(spec.rs, DriftSpec::linear(1.0));
    const Window w = make_window(spec, 6, 7);
    const auto a = window_config(spec, w, {{Site{}, {1.0}}}, {0.5});
    const auto b = window_config(spec, w, {{Site{}, {-1.0}}}, {0.5});
    const auto rep = ergodicity_test(spec, m, replicas(1000), f, a, b, times);
    if (eps0 == 0.0) {
      const double target = -1.0 * (1.0 + 2.0 * 0.25);
      o.require(std::abs(rep.rate - target) <= 0.1 * std::abs(target), "decoupled rate within 10% of -c(1+2k)");
      o.detail << "decoupled rate " << rep.rate << " +- " << rep.rate_se << " vs " << target << "; ";
    } else {
      o.require(rep.rate + 3.0 * rep.rate_se < 0.0, "coupled rate negative at 3 sigma");
      o.detail << "coupled rate " << rep.rate << " +- " << rep.rate_se << "; ";
    }
    const auto same = ergodicity_test(spec, m, replicas(100), f, a, a, times);
    bool zero = same.identical;
    for (const auto& r : same.rows) zero = zero && r.delta == 0.0;
    o.require(zero, "identical configurations give Delta = 0");
  }
  o.detail << "identical configurations exactly 0";
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  std::vector<bool> selected(12, argc == 1);
  for (int i = 1; i < argc; ++i) {
    const int c = std::atoi(argv[i]);
    if (c >= 1 && c <= 11) selected[c] = true;
  }
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"exact identity suite", identities},
      {"generator decomposition and jump rates", decomposition},
      {"eta for the linear drift", eta},
      {"rank-one moments", moments},
      {"invariant measure", invariant},
      {"gradient bound", gradient},
      {"Lyapunov function", lyapunov},
      {"decoupled lattice and audits", lattice},
      {"finite speed of propagation", finite_speed},
      {"Cauchy property", cauchy},
      {"ergodicity", ergodicity}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i + 1]) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2zu %-40s %s  (%.1f s) %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", secs,
                o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
