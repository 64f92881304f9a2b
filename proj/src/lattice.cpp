#include "dunkl/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace dunkl {

int l1_distance(const Site& a, const Site& b) {
  int s = 0;
  for (int i = 0; i < kMaxLatticeDim; ++i) s += std::abs(a[i] - b[i]);
  return s;
}

int l1_norm(const Site& a) { return l1_distance(a, Site{}); }

std::vector<Site> cube(int d, int r) {
  if (d < 1 || d > kMaxLatticeDim) throw LatticeError("lattice dimension must be 1..3");
  std::vector<Site> out;
  Site s{};
  const int lo1 = d > 1 ? -r : 0, hi1 = d > 1 ? r : 0, lo2 = d > 2 ? -r : 0, hi2 = d > 2 ? r : 0;
  for (s[0] = -r; s[0] <= r; ++s[0])
    for (s[1] = lo1; s[1] <= hi1; ++s[1])
      for (s[2] = lo2; s[2] <= hi2; ++s[2]) out.push_back(s);
  return out;
}

std::uint32_t site_stream(const Site& s) {
  std::uint32_t id = 0;
  for (int i = 0; i < kMaxLatticeDim; ++i) {
    if (std::abs(s[i]) >= 512) throw LatticeError("site coordinate too large for the stream encoding");
    const auto z = static_cast<std::uint32_t>(s[i] >= 0 ? 2 * s[i] : -2 * s[i] - 1);
    id |= z << (10 * i);
  }
  return id;
}

std::string site_label(const Site& s, int d) {
  std::string out;
  for (int i = 0; i < d; ++i) out += (i ? ";" : "") + std::to_string(s[i]);
  return out;
}

double LatticeSpec::eps(const Site& l) const {
  if (decay == DecayType::Uniform) return eps0;
  return eps0 * std::pow(1.0 + l1_norm(l), -(d + delta));
}

std::vector<Site> LatticeSpec::neighbour_offsets() const {
  std::vector<Site> out;
  for (const auto& s : cube(d, range - 1)) {
    const int n = l1_norm(s);
    if (n > 0 && n < range) out.push_back(s);
  }
  return out;
}

int LatticeSpec::n_neighbours() const { return static_cast<int>(neighbour_offsets().size()); }

LatticeSpec build_default_model(int d, RootSystem<double> rs, std::optional<RootSystem<QSqrt2>> exact, double c,
                                double eps0, DecayType decay, double delta, int range, int box_radius,
                                int window_radius, bool allow_uniform) {
  if (d < 1 || d > kMaxLatticeDim) throw LatticeError("d must be 1, 2 or 3");
  if (!(c > 0.0)) throw LatticeError("c must be positive");
  if (eps0 < 0.0) throw LatticeError("eps0 must be nonnegative");
  if (eps0 > c) throw LatticeError("eps0 > c: the jump-rate condition with interaction is not guaranteed");
  if (decay == DecayType::Uniform && !allow_uniform)
    throw LatticeError("uniform amplitude profile violates zeta < inf; pass the override flag to run it anyway");
  if (decay == DecayType::Summable && !(delta > 0.0)) throw LatticeError("decay delta must be positive");
  if (range < 1) throw LatticeError("range must be >= 1");
  if (box_radius < 0) throw LatticeError("box_radius must be >= 0");
  LatticeSpec s;
  s.d = d;
  s.rs = std::move(rs);
  s.exact = std::move(exact);
  s.c = c;
  s.eps0 = eps0;
  s.decay = decay;
  s.delta = delta;
  s.range = range;
  s.box_radius = box_radius;
  s.window_radius = window_radius;
  s.allow_uniform = allow_uniform;
  if (window_radius < s.min_window(box_radius))
    throw LatticeError("window too small: need window_radius >= " + std::to_string(s.min_window(box_radius)));
  return s;
}

// ---------------------------------------------------------------- audits

namespace {

template <class S>
Vec<S> apply(const Matrix<S>& g, const Vec<S>& x) {
  return g.apply(x);
}

template <class S>
struct Config {
  const LatticeSpec* spec;
  std::vector<Site> sites;
  std::vector<Vec<S>> values;
  Vec<S> zero;
  const Vec<S>& operator()(const Site& s) const {
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (sites[i] == s) return values[i];
    return zero;
  }
  Vec<S>& at(const Site& s) {
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (sites[i] == s) return values[i];
    throw LatticeError("site outside the configuration");
  }
};

template <class S>
bool same(const Vec<S>& a, const Vec<S>& b) {
  if constexpr (ScalarTraits<S>::kExact) {
    return a == b;
  } else {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
    return true;
  }
}

template <class S>
std::string vec_text(const Vec<S>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(ScalarTraits<S>::to_double(v[i]));
  return out + ")";
}

template <class S>
HypothesisAudit run_audit(const LatticeSpec& spec, const RootSystem<S>& rs, std::size_t n_probes, std::uint64_t seed,
                          const std::function<S(std::mt19937_64&)>& draw, const std::string& tag) {
  HypothesisAudit audit;
  AuditItem stencil{"lattice stencil (range " + std::to_string(spec.range) + ")" + tag, true, ""};
  AuditItem equiv{"lattice equivariance e(l) o g(l) = g e(l)" + tag, true, ""};
  AuditItem local{"lattice locality e(lbar) o g(l) = e(lbar)" + tag, true, ""};
  std::mt19937_64 gen(seed);
  const auto box = cube(spec.d, spec.box_radius);
  const auto win = cube(spec.d, spec.box_radius + spec.range);
  const int n = rs.dim;
  auto eps_of = [&](const Site& l) { return ScalarTraits<S>::from_double(spec.eps(l)); };
  std::uniform_int_distribution<std::size_t> pick_box(0, box.size() - 1), pick_win(0, win.size() - 1),
      pick_g(0, rs.group.size() - 1);
  for (std::size_t p = 0; p < n_probes; ++p) {
    Config<S> cfg{&spec, win, {}, Vec<S>(n, S(0))};
    for (std::size_t i = 0; i < win.size(); ++i) {
      Vec<S> v(n);
      for (auto& e : v) e = draw(gen);
      cfg.values.push_back(v);
    }
    const Site l = box[pick_box(gen)];
    const Vec<S> base = default_interaction<S>(spec, l, eps_of(l), cfg);
    // stencil: change a site at distance >= R
    Site far = win[pick_win(gen)];
    if (l1_distance(far, l) >= spec.range) {
      Config<S> c2 = cfg;
      for (auto& e : c2.at(far)) e = e + draw(gen) + S(1);
      if (!same(default_interaction<S>(spec, l, eps_of(l), c2), base) && stencil.passed) {
        stencil.passed = false;
        stencil.detail = "e at site " + site_label(l, spec.d) + " changed when site " + site_label(far, spec.d) + " moved";
      }
    }
    const Matrix<S>& g = rs.group[pick_g(gen)];
    Config<S> cg = cfg;
    cg.at(l) = apply(g, cfg(l));
    const Vec<S> lhs = default_interaction<S>(spec, l, eps_of(l), cg);
    const Vec<S> rhs = apply(g, base);
    if (!same(lhs, rhs) && equiv.passed) {
      equiv.passed = false;
      equiv.detail = "site " + site_label(l, spec.d) + ": " + vec_text(lhs) + " vs " + vec_text(rhs);
    }
    for (const auto& o : spec.neighbour_offsets()) {
      Site lb = l;
      for (int a = 0; a < spec.d; ++a) lb[a] += o[a];
      const Vec<S> e0 = default_interaction<S>(spec, lb, eps_of(lb), cfg);
      const Vec<S> e1 = default_interaction<S>(spec, lb, eps_of(lb), cg);
      if (!same(e0, e1) && local.passed) {
        local.passed = false;
        local.detail = "site " + site_label(lb, spec.d) + " reacts to g at " + site_label(l, spec.d);
      }
    }
  }
  audit.items = {stencil, equiv, local};
  return audit;
}

}  // namespace

HypothesisAudit audit_lattice_exact(const LatticeSpec& spec, std::size_t n_probes, std::uint64_t seed) {
  if (!spec.exact) throw LatticeError("exact audit needs an exact root system (families A, B, D)");
  auto draw = [](std::mt19937_64& g) {
    std::uniform_int_distribution<long> num(-40, 40), den(1, 13);
    return QSqrt2(mpq_class(num(g), den(g)));
  };
  return run_audit<QSqrt2>(spec, *spec.exact, n_probes, seed, draw, " [exact]");
}

HypothesisAudit audit_lattice_probes(const LatticeSpec& spec, std::size_t n_probes, std::uint64_t seed) {
  auto draw = [](std::mt19937_64& g) { return std::uniform_real_distribution<double>(-3.0, 3.0)(g); };
  HypothesisAudit audit = run_audit<double>(spec, spec.rs, n_probes, seed, draw, " [probes]");
  AuditItem rates{"site jump rates with b + e nonnegative", true, ""};
  if (spec.eps0 > spec.c) {
    rates.passed = false;
    rates.detail = "eps0 > c";
  }
  std::mt19937_64 gen(seed + 1);
  const auto box = cube(spec.d, spec.box_radius);
  const auto win = cube(spec.d, spec.box_radius + spec.range);
  const int n = spec.rs.dim;
  for (std::size_t p = 0; p < n_probes && rates.passed; ++p) {
    Config<double> cfg{&spec, win, {}, Vec<double>(n, 0.0)};
    // radii spread over [1e-3, 20] including near-wall points
    for (std::size_t i = 0; i < win.size(); ++i) {
      Vec<double> v(n);
      for (auto& e : v) e = std::uniform_real_distribution<double>(-20.0, 20.0)(gen);
      if (p % 4 == 0) {
        const auto& a = spec.rs.positive[p % spec.rs.num_positive()];
        const double s = dot(a, v);
        for (int k = 0; k < n; ++k) v[k] -= (s - 1e-3) * a[k] / 2.0;
      }
      cfg.values.push_back(v);
    }
    const Site l = box[p % box.size()];
    const Vec<double>& x = cfg(l);
    const Vec<double> e = default_interaction<double>(spec, l, spec.eps(l), cfg);
    for (std::size_t a = 0; a < spec.rs.num_positive(); ++a) {
      const auto& al = spec.rs.positive[a];
      const double s = dot(al, x);
      if (s == 0.0) continue;
      double be = 0.0, b = 0.0;
      for (int k = 0; k < n; ++k) {
        b += al[k] * (-spec.c * x[k]);
        be += al[k] * (-spec.c * x[k] + e[k]);
      }
      const double r1 = 2.0 / (s * s) - b / s, r2 = 2.0 / (s * s) - be / s;
      if (r1 < 0.0 || r2 < 0.0) {
        rates.passed = false;
        rates.detail = "negative rate " + format_double(std::min(r1, r2)) + " at site " + site_label(l, spec.d);
        break;
      }
    }
  }
  audit.items.push_back(rates);
  return audit;
}

// ---------------------------------------------------------------- constants

double interaction_bound(const LatticeSpec& spec, const Site& l, const Site& j) {
  const int dist = l1_distance(l, j);
  const double ej = spec.eps(j);
  if (dist == 0) {
    // sup |d_i u_m| = 1 at x = 0; A_alpha u = alpha/(1+|x|^2)
    double amax = 1.0;
    for (const auto& a : spec.rs.positive)
      for (double v : a) amax = std::max(amax, std::abs(v));
    return ej * amax;
  }
  if (dist >= spec.range) return 0.0;
  // |u| <= 1/2, sup_r 2r/(1+r^2)^2 = 3 sqrt3/8; A_alpha in w_l vanishes.
  return ej * 0.5 * (3.0 * std::sqrt(3.0) / 8.0) / spec.n_neighbours();
}

double sigma_from_tau(double c_tilde, double tau) {
  if (c_tilde <= 0.0) return std::numeric_limits<double>::infinity();
  const double x = c_tilde / tau;
  return -(std::log(x) + x + 1.0) / 4.0;
}

int propagation_count(const LatticeSpec& spec, const Site& l, const std::vector<Site>& support) {
  int dmin = std::numeric_limits<int>::max();
  for (const auto& s : support) dmin = std::min(dmin, l1_distance(l, s));
  return dmin / spec.range + 1;
}

PropagationConstants compute_constants(const LatticeSpec& spec, YoungChoice choice, double n_min, double s) {
  PropagationConstants pc;
  const auto& rs = spec.rs;
  pc.eta = eta_constant(rs, DriftSpec::linear(spec.c));
  pc.coercive = pc.eta < 0.0;
  const auto box = cube(spec.d, spec.box_radius);
  for (const auto& l : box) {
    double sum = 0.0;
    for (const auto& j : box) sum += interaction_bound(spec, l, j);
    pc.sum_e_max = std::max(pc.sum_e_max, sum);
  }
  for (const auto& l : cube(spec.d, spec.window_radius)) pc.zeta += spec.eps(l) * 0.5;
  const double n = rs.dim;
  const double gam = 1.0 + std::sqrt(2.0) * rs.gamma;
  const double a = static_cast<double>(rs.group.size()) * n * gam * pc.sum_e_max;  // C = a / young
  const double b = 0.5 * n * gam * pc.sum_e_max;                                   // eta~ = eta + b young
  pc.tau = std::max(1.0, s > 0.0 ? n_min / s : 1.0);
  if (b == 0.0) {
    pc.young = 1.0;
    pc.eta_tilde = pc.eta;
    pc.c_tilde = 0.0;
  } else {
    if (choice == YoungChoice::FiniteSpeed) {
      pc.young = pc.eta < 0.0 ? 0.99 * (-pc.eta / b) : 1.0;
    } else {
      pc.young = std::sqrt(a / (2.0 * b));
    }
    pc.eta_tilde = pc.eta + b * pc.young;
    pc.c_tilde = a / pc.young;
  }
  pc.sigma = sigma_from_tau(pc.c_tilde, pc.tau);
  pc.ergodic_regime = pc.eta_tilde < 0.0 && pc.c_tilde <= -2.0 * pc.eta_tilde;
  return pc;
}

// ---------------------------------------------------------------- windows

int Window::index(const Site& s) const {
  for (int a = 0; a < kMaxLatticeDim; ++a)
    if ((a >= d && s[a] != 0) || std::abs(s[a]) > radius) return -1;
  // cube enumeration is lexicographic
  const int side = 2 * radius + 1;
  int idx = 0;
  for (int a = 0; a < d; ++a) idx = idx * side + (s[a] + radius);
  return idx;
}

Window make_window(const LatticeSpec& spec, int box_radius, int window_radius) {
  if (window_radius < spec.min_window(box_radius))
    throw LatticeError("window too small: need window_radius >= " + std::to_string(spec.min_window(box_radius)));
  Window w;
  w.d = spec.d;
  w.box_radius = box_radius;
  w.radius = window_radius;
  w.sites = cube(spec.d, window_radius);
  const auto offs = spec.neighbour_offsets();
  for (const auto& s : w.sites) {
    bool inside = true;
    for (int a = 0; a < spec.d; ++a) inside = inside && std::abs(s[a]) <= box_radius;
    w.in_box.push_back(inside ? 1 : 0);
    std::vector<int> nb;
    if (inside) {
      for (const auto& o : offs) {
        Site j = s;
        for (int a = 0; a < spec.d; ++a) j[a] += o[a];
        nb.push_back(w.index(j));
      }
    }
    w.neighbours.push_back(nb);
  }
  return w;
}

LatticeObservable site_observable(const std::string& text, int N, const Site& site) {
  return LatticeObservable{{site}, parse_observable(text, N)};
}

std::vector<double> window_config(const LatticeSpec& spec, const Window& w,
                                  const std::vector<std::pair<Site, std::vector<double>>>& values,
                                  const std::vector<double>& fill) {
  const int n = spec.rs.dim;
  if (static_cast<int>(fill.size()) != n) throw LatticeError("fill value has wrong dimension");
  std::vector<double> out;
  for (std::size_t i = 0; i < w.sites.size(); ++i) out.insert(out.end(), fill.begin(), fill.end());
  for (const auto& [s, v] : values) {
    const int i = w.index(s);
    if (i < 0) throw LatticeError("site " + site_label(s, spec.d) + " outside the window");
    if (static_cast<int>(v.size()) != n) throw LatticeError("site value has wrong dimension");
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(i) * n);
  }
  return out;
}

std::vector<std::vector<double>> lattice_probes(const LatticeSpec& spec, const Window& w, std::size_t count,
                                                double radius, std::uint64_t seed) {
  const int n = spec.rs.dim;
  std::vector<std::vector<double>> out;
  std::uint64_t h = seed * 7919;
  for (std::size_t p = 0; p < count; ++p) {
    std::vector<double> cfg;
    for (std::size_t s = 0; s < w.sites.size(); ++s) {
      std::vector<double> x(n);
      for (;;) {
        ++h;
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) {
          static const unsigned primes[kMaxDim] = {2, 3, 5, 7, 11, 13, 17, 19};
          x[i] = radius * (2.0 * halton(h, primes[i]) - 1.0);
          r2 += x[i] * x[i];
        }
        if (r2 <= radius * radius && distance_to_walls(spec.rs, x.data()) > 1e-2) break;
      }
      cfg.insert(cfg.end(), x.begin(), x.end());
    }
    out.push_back(cfg);
  }
  return out;
}

// ---------------------------------------------------------------- simulation

namespace {

// e^(l) at the current chamber points (extra drift for the step).
template <class T>
void interaction_at(const Window& w, const std::vector<BasicReplicaState<T>>& st, std::size_t l, const T& eps_l,
                    int n, T* out) {
  T mean(1.0);
  const auto& nb = w.neighbours[l];
  if (!nb.empty()) {
    T acc(0.0);
    for (int j : nb) {
      T s(0.0);
      for (int i = 0; i < n; ++i) s += st[j].x[i] * st[j].x[i];
      acc += 1.0 / (1.0 + s);
    }
    mean = acc / static_cast<double>(nb.size());
  }
  T r2(0.0);
  for (int i = 0; i < n; ++i) r2 += st[l].x[i] * st[l].x[i];
  const T scale = eps_l * mean / (1.0 + r2);
  for (int i = 0; i < n; ++i) out[i] = scale * st[l].x[i];
}

}  // namespace

BundleData simulate_window(const LatticeSpec& spec, const ProcessModel& m, const Window& w, const RunConfig& rc,
                           const std::vector<std::vector<double>>& starts, const std::vector<double>& times,
                           std::size_t n_outputs, const LatticeObserver& obs) {
  const int n = m.dim();
  const std::size_t ns = w.sites.size();
  for (const auto& s : starts)
    if (s.size() != ns * static_cast<std::size_t>(n)) throw LatticeError("start configuration has wrong size");
  std::vector<std::size_t> steps;
  for (double t : times) {
    steps.push_back(grid_steps(t, rc.params.dt));
    if (steps.size() > 1 && steps.back() < steps[steps.size() - 2]) throw LatticeError("times must be nondecreasing");
  }
  std::vector<double> eps(ns, 0.0);
  std::vector<std::uint32_t> streams(ns);
  for (std::size_t l = 0; l < ns; ++l) {
    if (w.in_box[l]) eps[l] = spec.eps(w.sites[l]);
    streams[l] = site_stream(w.sites[l]);
  }
  BundleData data;
  data.n_replicas = rc.n_replicas;
  data.n_starts = starts.size();
  data.n_times = times.size();
  data.n_outputs = n_outputs;
  data.values.assign(data.n_replicas * data.n_starts * data.n_times * data.n_outputs, 0.0);
  data.flagged.assign(data.n_replicas, 0);

  auto run = [&](std::size_t r) -> std::uint64_t {
    std::vector<ReplicaState> st(ns);
    std::vector<CounterStream> rng;
    std::vector<double> extra(ns * n, 0.0);
    std::uint64_t sub = 0;
    for (std::size_t s = 0; s < starts.size(); ++s) {
      rng.clear();
      for (std::size_t l = 0; l < ns; ++l) {
        rng.emplace_back(rc.seed, static_cast<std::uint32_t>(r), streams[l]);
        st[l].reset(m, starts[s].data() + l * n, rc.params.jump_mode);
      }
      bool flagged = false;
      std::size_t done = 0;
      for (std::size_t t = 0; t < steps.size() && !flagged; ++t) {
        for (; done < steps[t] && !flagged; ++done) {
          // synchronous update from the snapshot
          for (std::size_t l = 0; l < ns; ++l)
            if (eps[l] > 0.0) interaction_at(w, st, l, eps[l], n, &extra[l * n]);
          for (std::size_t l = 0; l < ns; ++l) {
            advance(m, rc.params, st[l], eps[l] > 0.0 ? &extra[l * n] : nullptr, rng[l],
                    static_cast<std::uint32_t>(done));
            flagged = flagged || st[l].flagged;
          }
        }
        if (flagged) break;
        obs(st, s, t, &data.at(r, s, t, 0));
      }
      if (flagged) data.flagged[r] = 1;
      for (const auto& x : st) sub += x.substeps;
    }
    return sub;
  };
  const auto nr = static_cast<std::int64_t>(rc.n_replicas);
  std::uint64_t sub = 0;
  if (rc.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : sub)
    for (std::int64_t r = 0; r < nr; ++r) sub += run(static_cast<std::size_t>(r));
  } else {
    for (std::int64_t r = 0; r < nr; ++r) sub += run(static_cast<std::size_t>(r));
  }
  data.substeps = sub;
  return data;
}

double lattice_expectation(const ProcessModel& m, const Window& w, const std::vector<ReplicaState>& states,
                           const LatticeObservable& f) {
  const int n = m.dim();
  const std::size_t ng = m.group_order();
  const std::size_t k = f.sites.size();
  std::vector<int> idx(k);
  for (std::size_t i = 0; i < k; ++i) {
    idx[i] = w.index(f.sites[i]);
    if (idx[i] < 0) throw LatticeError("observable reads a site outside the window");
  }
  std::vector<double> y(k * n);
  // Odometer over G^k; the per-site reflection laws are independent given
  // the chamber paths.
  std::vector<std::size_t> g(k, 0);
  double num = 0.0, den = 0.0;
  for (;;) {
    double wt = 1.0;
    for (std::size_t i = 0; i < k && wt != 0.0; ++i) {
      const auto& s = states[idx[i]];
      wt *= s.weights.empty() ? (static_cast<std::size_t>(s.element) == g[i] ? 1.0 : 0.0) : s.weights[g[i]];
    }
    if (wt != 0.0) {
      for (std::size_t i = 0; i < k; ++i) m.act(g[i], states[idx[i]].x.data(), &y[i * n]);
      num += wt * f.f.value(y.data());
      den += wt;
    }
    std::size_t i = 0;
    while (i < k && ++g[i] == ng) g[i++] = 0;
    if (i == k) break;
  }
  return num / den;
}

std::vector<LatticeSimRow> lattice_estimate(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                                            const LatticeObservable& f, const std::vector<double>& start,
                                            const std::vector<double>& times) {
  const Window w = make_window(spec, spec.box_radius, spec.window_radius);
  BundleData d = simulate_window(spec, m, w, rc, {start}, times, 1,
                                 [&](const std::vector<ReplicaState>& st, std::size_t, std::size_t, double* out) {
                                   out[0] = lattice_expectation(m, w, st, f);
                                 });
  if (!d.reliable()) throw LatticeError("more than 1% of lattice replicas flagged");
  std::vector<LatticeSimRow> rows;
  for (std::size_t t = 0; t < times.size(); ++t) {
    MeanSe ms = mean_se(d.column(0, t, 0));
    rows.push_back({times[t], ms.mean, ms.std_error});
  }
  return rows;
}

// ---------------------------------------------------------------- finite speed

namespace {

// Sum over the support of Gamma~^(j) f at a configuration.
double source_gradient(const LatticeSpec& spec, const Window& w, const LatticeObservable& f,
                       const std::vector<double>& cfg) {
  const int n = spec.rs.dim;
  std::vector<double> y;
  for (const auto& s : f.sites) {
    const int i = w.index(s);
    y.insert(y.end(), cfg.begin() + static_cast<std::ptrdiff_t>(i) * n, cfg.begin() + static_cast<std::ptrdiff_t>(i + 1) * n);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < f.sites.size(); ++j) {
    SmoothFunction fj;
    fj.dim = n;
    fj.value = [&, j](const double* x) {
      std::vector<double> z = y;
      std::copy(x, x + n, z.begin() + static_cast<std::ptrdiff_t>(j) * n);
      return f.f.value(z.data());
    };
    fj.gradient = [&, j](const double* x, double* g) {
      std::vector<double> z = y, gz(y.size());
      std::copy(x, x + n, z.begin() + static_cast<std::ptrdiff_t>(j) * n);
      f.f.gradient(z.data(), gz.data());
      std::copy(gz.begin() + static_cast<std::ptrdiff_t>(j) * n, gz.begin() + static_cast<std::ptrdiff_t>(j + 1) * n, g);
    };
    std::vector<double> xj(y.begin() + static_cast<std::ptrdiff_t>(j) * n, y.begin() + static_cast<std::ptrdiff_t>(j + 1) * n);
    total += symmetrised_gradient(spec.rs, fj, xj);
  }
  return total;
}

std::vector<double> restrict_config(const Window& from, const Window& to, const std::vector<double>& cfg, int n) {
  std::vector<double> out;
  for (const auto& s : to.sites) {
    const int i = from.index(s);
    if (i < 0) throw LatticeError("probe does not cover the window");
    out.insert(out.end(), cfg.begin() + static_cast<std::ptrdiff_t>(i) * n, cfg.begin() + static_cast<std::ptrdiff_t>(i + 1) * n);
  }
  return out;
}

}  // namespace

FiniteSpeedReport finite_speed_test(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                                    const LatticeObservable& f, const std::vector<Site>& sites, double s,
                                    const std::vector<std::vector<double>>& probes, double fd_step,
                                    std::size_t n_envelope_probes) {
  const int n = m.dim();
  const Window w = make_window(spec, spec.box_radius, spec.window_radius);
  for (const auto& l : sites) {
    if (w.index(l) < 0) throw LatticeError("site " + site_label(l, spec.d) + " outside the window");
    if (std::find(f.sites.begin(), f.sites.end(), l) != f.sites.end())
      throw LatticeError("finite-speed sites must lie outside the support of f");
  }
  FiniteSpeedReport rep;
  int n_min = std::numeric_limits<int>::max();
  for (const auto& l : sites) n_min = std::min(n_min, propagation_count(spec, l, f.sites));
  rep.constants = compute_constants(spec, YoungChoice::FiniteSpeed, n_min, s);

  auto env_probes = lattice_probes(spec, w, n_envelope_probes, 3.0);
  env_probes.insert(env_probes.end(), probes.begin(), probes.end());
  for (const auto& p : env_probes) rep.source_sup = std::max(rep.source_sup, source_gradient(spec, w, f, p));

  const double ng = static_cast<double>(m.group_order());
  std::vector<FiniteSpeedRow> best(sites.size());
  for (std::size_t q = 0; q < sites.size(); ++q) best[q].gamma_tilde = -std::numeric_limits<double>::infinity();
  for (const auto& probe : probes) {
    std::vector<std::vector<double>> starts{probe};
    for (const auto& l : sites) {
      const int li = w.index(l);
      for (int i = 0; i < n; ++i)
        for (double sg : {1.0, -1.0}) {
          auto y = probe;
          y[static_cast<std::size_t>(li) * n + i] += sg * fd_step;
          starts.push_back(y);
        }
    }
    BundleData d = simulate_window(spec, m, w, rc, starts, {s}, 1,
                                   [&](const std::vector<ReplicaState>& st, std::size_t, std::size_t, double* out) {
                                     out[0] = lattice_expectation(m, w, st, f);
                                   });
    if (!d.reliable()) throw LatticeError("more than 1% of lattice replicas flagged");
    std::vector<std::size_t> used;
    for (std::size_t r = 0; r < d.n_replicas; ++r)
      if (!d.flagged[r]) used.push_back(r);
    for (std::size_t q = 0; q < sites.size(); ++q) {
      // P_s f is invariant under g^(l) for l outside the support, so
      // Gamma~^(l) = |G| |grad^(l) P_s f|^2.
      std::vector<std::vector<double>> grad(n, std::vector<double>(used.size()));
      std::vector<double> mean(n), se(n);
      for (int i = 0; i < n; ++i) {
        const std::size_t sp = 1 + (q * n + i) * 2;
        for (std::size_t u = 0; u < used.size(); ++u)
          grad[i][u] = (d.at(used[u], sp, 0, 0) - d.at(used[u], sp + 1, 0, 0)) / (2.0 * fd_step);
        MeanSe ms = mean_se(grad[i]);
        mean[i] = ms.mean;
        se[i] = ms.std_error;
      }
      double est = 0.0;
      std::vector<double> lin(used.size(), 0.0);
      for (int i = 0; i < n; ++i) {
        est += mean[i] * mean[i] - se[i] * se[i];
        for (std::size_t u = 0; u < used.size(); ++u) lin[u] += 2.0 * mean[i] * grad[i][u];
      }
      est *= ng;
      const double est_se = ng * mean_se(lin).std_error;
      // A few ulps of the replica values over the difference step.
      double vmax = 0.0;
      for (std::size_t u = 0; u < used.size(); ++u) vmax = std::max(vmax, std::abs(d.at(used[u], 0, 0, 0)));
      const double gfloor = 4.0 * std::numeric_limits<double>::epsilon() * std::max(vmax, 1e-300) / (2.0 * fd_step);
      const double floor = ng * n * gfloor * gfloor;
      if (est > best[q].gamma_tilde) {
        best[q].gamma_tilde = est;
        best[q].std_error = est_se;
        best[q].floor = floor;
      }
    }
  }
  for (std::size_t q = 0; q < sites.size(); ++q) {
    auto& row = best[q];
    row.site = sites[q];
    int dmin = std::numeric_limits<int>::max();
    for (const auto& x : f.sites) dmin = std::min(dmin, l1_distance(sites[q], x));
    row.distance = dmin;
    row.n_l = propagation_count(spec, sites[q], f.sites);
    row.envelope = std::exp(-2.0 * row.n_l * rep.constants.sigma) * rep.source_sup;
    row.significant = row.gamma_tilde > 3.0 * row.std_error && row.gamma_tilde > row.floor;
    row.upper = row.significant ? row.gamma_tilde + 3.0 * row.std_error
                                : std::max(row.gamma_tilde + 3.0 * row.std_error, row.floor);
    rep.rows.push_back(row);
  }
  std::sort(rep.rows.begin(), rep.rows.end(), [](const auto& a, const auto& b) { return a.n_l < b.n_l; });
  rep.decreasing = true;
  rep.below_envelope = true;
  // Unresolved sites count through their upper bound: decreasing means the
  // bound sits below the previous resolved estimate.
  for (std::size_t q = 0; q < rep.rows.size(); ++q) {
    const auto& r = rep.rows[q];
    const double val = r.significant ? r.gamma_tilde : r.upper;
    if (q > 0) {
      const auto& p = rep.rows[q - 1];
      if (!p.significant || !(val < p.gamma_tilde)) rep.decreasing = false;
    }
    if (val > r.envelope) rep.below_envelope = false;
  }
  std::vector<double> x, y, e;
  for (const auto& r : rep.rows)
    if (r.significant) {
      x.push_back(r.n_l);
      y.push_back(std::log(r.gamma_tilde));
      e.push_back(r.std_error / r.gamma_tilde);
    }
  // Resolved sites must form a prefix (nearest first) of at least two.
  std::size_t prefix = 0;
  while (prefix < rep.rows.size() && rep.rows[prefix].significant) ++prefix;
  rep.conclusive = prefix == x.size() && x.size() >= 2;
  if (x.size() >= 2) {
    LineFit fit = weighted_line_fit(x, y, e);
    rep.ratio = std::exp(fit.slope);
    rep.ratio_upper = std::exp(fit.slope + 3.0 * fit.slope_se);
  }
  rep.pass = rep.conclusive && rep.decreasing && rep.below_envelope && rep.ratio_upper < 1.0;
  return rep;
}

// ---------------------------------------------------------------- Cauchy

namespace {

// E[f | chamber paths] with its tangent.
Dual tangent_expectation(const ProcessModel& m, const Window& w, const std::vector<TangentState>& states,
                         const LatticeObservable& f) {
  const int n = m.dim();
  const std::size_t ng = m.group_order();
  const std::size_t k = f.sites.size();
  std::vector<int> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = w.index(f.sites[i]);
  std::vector<double> y(k * n), dy(k * n), grad(k * n), xv(n), xd(n);
  std::vector<std::size_t> g(k, 0);
  Dual num(0.0), den(0.0);
  for (;;) {
    Dual wt(1.0);
    for (std::size_t i = 0; i < k; ++i) wt *= states[idx[i]].weights[g[i]];
    if (wt.v != 0.0 || wt.d != 0.0) {
      for (std::size_t i = 0; i < k; ++i) {
        const auto& x = states[idx[i]].x;
        for (int a = 0; a < n; ++a) {
          xv[a] = x[a].v;
          xd[a] = x[a].d;
        }
        m.act(g[i], xv.data(), &y[i * n]);
        m.act(g[i], xd.data(), &dy[i * n]);
      }
      f.f.gradient(y.data(), grad.data());
      double df = 0.0;
      for (std::size_t a = 0; a < k * n; ++a) df += grad[a] * dy[a];
      num += wt * Dual(f.f.value(y.data()), df);
      den += wt;
    }
    std::size_t i = 0;
    while (i < k && ++g[i] == ng) g[i++] = 0;
    if (i == k) break;
  }
  return num / den;
}

// d/dlambda E f(omega_t) at lambda = 1/2, where the interactions at sites
// with scaled[l] are multiplied by lambda. Returns [probe][replica]; flagged
// replicas are marked in `flagged`.
std::vector<std::vector<double>> tangent_response(const LatticeSpec& spec, const ProcessModel& m, const Window& w,
                                                  const RunConfig& rc, const std::vector<std::vector<double>>& starts,
                                                  double t, const std::vector<std::uint8_t>& scaled,
                                                  const LatticeObservable& f, std::vector<std::uint8_t>& flagged) {
  const int n = m.dim();
  const std::size_t ns = w.sites.size();
  const std::size_t steps = grid_steps(t, rc.params.dt);
  std::vector<Dual> eps(ns, Dual(0.0));
  std::vector<std::uint32_t> streams(ns);
  for (std::size_t l = 0; l < ns; ++l) {
    const double e = w.in_box[l] ? spec.eps(w.sites[l]) : 0.0;
    eps[l] = scaled[l] ? Dual(0.5 * e, e) : Dual(e);
    streams[l] = site_stream(w.sites[l]);
  }
  std::vector<std::vector<double>> out(starts.size(), std::vector<double>(rc.n_replicas, 0.0));
  SimParams params = rc.params;
  params.jump_mode = JumpMode::Averaged;
  auto run = [&](std::size_t r) {
    std::vector<TangentState> st(ns);
    std::vector<CounterStream> rng;
    std::vector<Dual> extra(ns * n);
    for (std::size_t s = 0; s < starts.size(); ++s) {
      rng.clear();
      for (std::size_t l = 0; l < ns; ++l) {
        rng.emplace_back(rc.seed, static_cast<std::uint32_t>(r), streams[l]);
        st[l].reset(m, starts[s].data() + l * n, params.jump_mode);
      }
      bool bad = false;
      for (std::size_t step = 0; step < steps && !bad; ++step) {
        for (std::size_t l = 0; l < ns; ++l)
          if (eps[l].v > 0.0) interaction_at(w, st, l, eps[l], n, &extra[l * n]);
        for (std::size_t l = 0; l < ns; ++l) {
          advance(m, params, st[l], eps[l].v > 0.0 ? &extra[l * n] : nullptr, rng[l], static_cast<std::uint32_t>(step));
          bad = bad || st[l].flagged;
        }
      }
      if (bad) {
        flagged[r] = 1;
        continue;
      }
      out[s][r] = tangent_expectation(m, w, st, f).d;
    }
  };
  const auto nr = static_cast<std::int64_t>(rc.n_replicas);
  if (rc.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t r = 0; r < nr; ++r) run(static_cast<std::size_t>(r));
  } else {
    for (std::int64_t r = 0; r < nr; ++r) run(static_cast<std::size_t>(r));
  }
  return out;
}

}  // namespace

CauchyReport cauchy_test(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                         const LatticeObservable& f, double t, const std::vector<int>& radii,
                         const std::vector<std::vector<double>>& probes) {
  const int n = m.dim();
  if (radii.size() < 2) throw LatticeError("Cauchy test needs at least two boxes");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1]) throw LatticeError("box radii must increase");
  const int rmax = radii.back();
  const Window big = make_window(spec, rmax, spec.min_window(rmax));
  for (const auto& s : f.sites)
    for (int a = 0; a < spec.d; ++a)
      if (std::abs(s[a]) > radii.front()) throw LatticeError("support of f must lie in the smallest box");
  CauchyReport rep;
  // The difference of consecutive truncations is the integral over lambda
  // in [0,1] of the response to switching on the shell interactions; it is
  // taken at the midpoint. Plain differences lose the signal below the
  // rounding level of the state after a few shells.
  for (std::size_t b = 0; b + 1 < radii.size(); ++b) {
    const Window w = make_window(spec, radii[b + 1], spec.min_window(radii[b + 1]));
    std::vector<std::vector<double>> starts;
    for (const auto& p : probes) starts.push_back(restrict_config(big, w, p, n));
    std::vector<std::uint8_t> shell(w.sites.size(), 0);
    for (std::size_t l = 0; l < w.sites.size(); ++l) {
      int inf = 0;
      for (int a = 0; a < spec.d; ++a) inf = std::max(inf, std::abs(w.sites[l][a]));
      shell[l] = w.in_box[l] && inf > radii[b];
    }
    std::vector<std::uint8_t> flagged(rc.n_replicas, 0);
    auto resp = tangent_response(spec, m, w, rc, starts, t, shell, f, flagged);
    std::size_t nflag = 0;
    for (auto v : flagged) nflag += v;
    if (nflag * 100 > rc.n_replicas) throw LatticeError("more than 1% of lattice replicas flagged");

    CauchyRow row;
    row.radius_from = radii[b];
    row.radius_to = radii[b + 1];
    int ntil = std::numeric_limits<int>::max();
    for (const auto& s : f.sites) {
      int inf = 0;
      for (int a = 0; a < spec.d; ++a) inf = std::max(inf, std::abs(s[a]));
      ntil = std::min(ntil, (radii[b] + 1 - inf) / spec.range + 1);
    }
    row.n_tilde = ntil;
    row.exact_zero = true;
    row.difference = -1.0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      std::vector<double> diff;
      for (std::size_t r = 0; r < rc.n_replicas; ++r) {
        if (flagged[r]) continue;
        if (resp[p][r] != 0.0) row.exact_zero = false;
        diff.push_back(resp[p][r]);
      }
      MeanSe ms = mean_se(diff);
      if (std::abs(ms.mean) > row.difference) {
        row.difference = std::abs(ms.mean);
        row.std_error = ms.std_error;
      }
    }
    rep.rows.push_back(row);
  }
  bool all_zero = true;
  rep.decreasing = true;
  rep.conclusive = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    all_zero = all_zero && rep.rows[i].exact_zero;
    if (i > 0 && !(rep.rows[i].difference < rep.rows[i - 1].difference)) rep.decreasing = false;
    if (!(rep.rows[i].difference > 3.0 * rep.rows[i].std_error)) rep.conclusive = false;
  }
  if (all_zero) {
    // decoupled: the truncations coincide
    rep.decreasing = true;
    rep.conclusive = true;
    rep.pass = true;
    return rep;
  }
  if (rep.conclusive && rep.rows.size() >= 2) {
    std::vector<double> x, y, e;
    for (const auto& r : rep.rows) {
      x.push_back(r.n_tilde);
      y.push_back(std::log(r.difference));
      e.push_back(r.std_error / r.difference);
    }
    LineFit fit = weighted_line_fit(x, y, e);
    rep.slope = fit.slope;
    rep.slope_se = fit.slope_se;
  }
  rep.pass = rep.conclusive && rep.decreasing && rep.slope + 3.0 * rep.slope_se <= 0.0;
  return rep;
}

// ---------------------------------------------------------------- ergodicity

ErgodicityReport ergodicity_test(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                                 const LatticeObservable& f, const std::vector<double>& omega,
                                 const std::vector<double>& omega_prime, const std::vector<double>& times) {
  const Window w = make_window(spec, spec.box_radius, spec.window_radius);
  ErgodicityReport rep;
  rep.constants = compute_constants(spec, YoungChoice::Ergodicity);
  rep.identical = omega == omega_prime;
  BundleData d = simulate_window(spec, m, w, rc, {omega, omega_prime}, times, 1,
                                 [&](const std::vector<ReplicaState>& st, std::size_t, std::size_t, double* out) {
                                   out[0] = lattice_expectation(m, w, st, f);
                                 });
  if (!d.reliable()) throw LatticeError("more than 1% of lattice replicas flagged");
  std::vector<double> x, y, e;
  for (std::size_t t = 0; t < times.size(); ++t) {
    std::vector<double> diff;
    for (std::size_t r = 0; r < d.n_replicas; ++r)
      if (!d.flagged[r]) diff.push_back(d.at(r, 0, t, 0) - d.at(r, 1, t, 0));
    MeanSe ms = mean_se(diff);
    ErgodicityRow row{times[t], std::abs(ms.mean), ms.std_error};
    rep.rows.push_back(row);
    if (times[t] > 0.0 && row.delta > 3.0 * row.std_error) {
      x.push_back(times[t]);
      y.push_back(std::log(row.delta));
      e.push_back(row.std_error / row.delta);
    }
  }
  if (rep.identical) {
    bool zero = true;
    for (const auto& r : rep.rows) zero = zero && r.delta == 0.0 && r.std_error == 0.0;
    rep.conclusive = true;
    rep.pass = zero;
    return rep;
  }
  rep.conclusive = x.size() >= 2;
  if (rep.conclusive) {
    LineFit fit = weighted_line_fit(x, y, e);
    rep.rate = fit.slope;
    rep.rate_se = fit.slope_se;
  }
  rep.pass = rep.conclusive && rep.rate + 3.0 * rep.rate_se < 0.0;
  return rep;
}

// ---------------------------------------------------------------- Lyapunov

InfiniteLyapunovReport infinite_lyapunov_check(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                                               const std::vector<std::vector<double>>& starts,
                                               const std::vector<double>& times, std::size_t n_audit_probes) {
  const int n = m.dim();
  const auto& rs = spec.rs;
  const Window w = make_window(spec, spec.box_radius, spec.window_radius);
  InfiniteLyapunovReport rep;
  // C1 from the single-site constant plus the largest interaction push
  // eps (chi + r chi') r / (1 + r^2) on a radial grid over [0, 50].
  LyapunovConstants lc = lyapunov_constants(rs, spec.c);
  double eps_max = 0.0;
  for (std::size_t l = 0; l < w.sites.size(); ++l)
    if (w.in_box[l]) eps_max = std::max(eps_max, spec.eps(w.sites[l]));
  double push = 0.0;
  for (int i = 0; i <= 500000; ++i) {
    const double r = 50.0 * i / 500000.0;
    push = std::max(push, (Cutoff::chi(r) + r * Cutoff::d1(r)) * r / (1.0 + r * r));
  }
  lc.c1 += eps_max * push * (1.0 + 1e-9);
  rep.constants = lc;
  std::vector<double> a(w.sites.size());
  for (std::size_t l = 0; l < w.sites.size(); ++l) {
    a[l] = std::pow(1.0 + l1_norm(w.sites[l]), -(spec.d + 1.0));
    rep.weight_sum += a[l];
  }

  // per-site inequality L rho_l + e . grad rho_l <= C1 - C2 rho_l on probes
  AuditItem item{"per-site Lyapunov inequality with interaction", true, ""};
  auto probes = lattice_probes(spec, w, n_audit_probes, 20.0, 23);
  for (const auto& p : probes) {
    std::vector<ReplicaState> st(w.sites.size());
    for (std::size_t l = 0; l < w.sites.size(); ++l) st[l].reset(m, p.data() + l * n, JumpMode::Averaged);
    for (std::size_t l = 0; l < w.sites.size() && item.passed; ++l) {
      const double* x = p.data() + l * n;
      double e[kMaxDim] = {};
      if (w.in_box[l]) interaction_at(w, st, l, spec.eps(w.sites[l]), n, e);
      double r2 = 0.0, ex = 0.0;
      for (int i = 0; i < n; ++i) {
        r2 += x[i] * x[i];
        ex += e[i] * x[i];
      }
      const double r = std::sqrt(r2);
      const double grad_part = r > 0.0 ? (Cutoff::chi(r) + r * Cutoff::d1(r)) / r * ex : 0.0;
      const double lhs = generator_rho(rs, spec.c, x) + grad_part;
      const double rhs = lc.c1 - lc.c2 * rho(x, n);
      if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) {
        item.passed = false;
        item.detail = "site " + site_label(w.sites[l], spec.d) + ": " + format_double(lhs) + " > " + format_double(rhs);
      }
    }
    if (!item.passed) break;
  }
  rep.audit.items.push_back(item);

  BundleData d = simulate_window(spec, m, w, rc, starts, times, 1,
                                 [&](const std::vector<ReplicaState>& st, std::size_t, std::size_t, double* out) {
                                   double acc = 0.0;
                                   for (std::size_t l = 0; l < st.size(); ++l) acc += a[l] * rho(st[l].x.data(), n);
                                   out[0] = acc;
                                 });
  for (std::size_t s = 0; s < starts.size(); ++s) {
    double rho0 = 0.0;
    for (std::size_t l = 0; l < w.sites.size(); ++l) rho0 += a[l] * rho(starts[s].data() + l * n, n);
    for (std::size_t t = 0; t < times.size(); ++t) {
      MeanSe ms = mean_se(d.column(s, t, 0));
      CheckRow row;
      row.experiment = "lattice-lyapunov";
      row.system = rs.name;
      row.k = k_label(rs);
      row.c = spec.c;
      row.t = times[t];
      row.x = {static_cast<double>(s)};
      row.quantity = "E sum_l a_l rho_l";
      row.estimate = ms.mean;
      row.std_error = ms.std_error;
      row.bound = rho0 + lc.c1 * rep.weight_sum / lc.c2;
      row.margin = row.bound + 3.0 * ms.std_error - ms.mean;
      row.pass = d.reliable() && row.margin >= 0.0;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

}  // namespace dunkl
