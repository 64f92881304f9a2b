#include "dunkl/verify.hpp"

#include <cmath>
#include <limits>

#include "dunkl/dunkl_ops.hpp"
#include "dunkl/quadrature.hpp"

namespace dunkl {

std::string k_label(const RootSystem<double>& rs) {
  std::string s;
  for (std::size_t i = 0; i < rs.orbit_k.size(); ++i) s += (i ? ";" : "") + format_double(rs.orbit_k[i]);
  return s;
}

std::vector<std::vector<GradientEstimate>> estimate_gradient_bound(const ProcessModel& m, const RunConfig& rc,
                                                                   const std::vector<SmoothFunction>& fs,
                                                                   const std::vector<double>& x,
                                                                   const std::vector<double>& times, double fd_step) {
  const RootSystem<double>& rs = m.system();
  const int n = rs.dim;
  const std::size_t ng = m.group_order();
  const std::size_t nf = fs.size();
  const std::size_t stride = ng + 1;
  const double eta = eta_constant(rs, m.drift());
  BundleSpec spec;
  spec.starts.push_back(x);
  for (int i = 0; i < n; ++i)
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> y = x;
      y[i] += sgn * fd_step;
      spec.starts.push_back(y);
    }
  spec.times = times;
  spec.n_outputs = nf * stride;
  // Per function, output g: E[f(g X_t) | chamber path]; output |G|: Gamma~ f
  // at the chamber point, which equals Gamma~ f(X_t) by invariance.
  BundleData d = simulate_bundle(m, rc, spec, [&](const ReplicaState& s, std::size_t start, std::size_t, double* out) {
    double y[kMaxDim], gy[kMaxDim];
    for (std::size_t o = 0; o < nf * stride; ++o) out[o] = 0.0;
    double den = 0.0;
    for (std::size_t h = 0; h < ng; ++h) {
      const double w = s.weights.empty() ? (static_cast<int>(h) == s.element ? 1.0 : 0.0) : s.weights[h];
      if (w == 0.0) continue;
      den += w;
      m.act(h, s.x.data(), y);
      for (std::size_t g = 0; g < ng; ++g) {
        m.act(g, y, gy);
        for (std::size_t q = 0; q < nf; ++q) out[q * stride + g] += w * fs[q].value(gy);
      }
    }
    for (std::size_t q = 0; q < nf; ++q)
      for (std::size_t g = 0; g < ng; ++g) out[q * stride + g] /= den;
    if (start == 0) {
      std::vector<double> xv(s.x.begin(), s.x.begin() + n);
      for (std::size_t q = 0; q < nf; ++q) out[q * stride + ng] = symmetrised_gradient(rs, fs[q], xv);
    }
  });

  std::vector<double> wall(rs.num_positive());
  for (std::size_t a = 0; a < rs.num_positive(); ++a) wall[a] = dot(rs.positive[a], x);
  std::vector<std::size_t> used;
  for (std::size_t r = 0; r < d.n_replicas; ++r)
    if (!d.flagged[r]) used.push_back(r);
  const std::size_t width = ng * static_cast<std::size_t>(n);

  std::vector<std::vector<GradientEstimate>> out(nf);
  for (std::size_t q = 0; q < nf; ++q)
    for (std::size_t t = 0; t < times.size(); ++t) {
      auto val = [&](std::size_t r, std::size_t s, std::size_t g) { return d.at(r, s, t, q * stride + g); };
      // V[u][g][i]: per-replica Dunkl gradient of P_t(f o g) at x.
      std::vector<double> V(used.size() * width);
      for (std::size_t u = 0; u < used.size(); ++u) {
        const std::size_t r = used[u];
        for (std::size_t g = 0; g < ng; ++g)
          for (int i = 0; i < n; ++i) {
            double v = (val(r, 1 + 2 * i, g) - val(r, 2 + 2 * i, g)) / (2.0 * fd_step);
            for (std::size_t a = 0; a < rs.num_positive(); ++a) {
              if (rs.k[a] == 0.0) continue;
              const auto gs = static_cast<std::size_t>(m.table().right_mult[a][g]);
              v += rs.k[a] * rs.positive[a][i] * (val(r, 0, g) - val(r, 0, gs)) / wall[a];
            }
            V[u * width + g * n + i] = v;
          }
      }
      std::vector<double> mean(width, 0.0), col(used.size());
      double var_total = 0.0;
      for (std::size_t gi = 0; gi < width; ++gi) {
        for (std::size_t u = 0; u < used.size(); ++u) col[u] = V[u * width + gi];
        MeanSe ms = mean_se(col);
        mean[gi] = ms.mean;
        var_total += ms.std_error * ms.std_error;
      }
      double plug = 0.0;
      for (double v : mean) plug += v * v;
      const double growth = std::exp(2.0 * eta * times[t]);
      std::vector<double> lin(used.size()), diff(used.size()), rhs(used.size());
      for (std::size_t u = 0; u < used.size(); ++u) {
        double w = 0.0;
        for (std::size_t gi = 0; gi < width; ++gi) w += 2.0 * mean[gi] * V[u * width + gi];
        lin[u] = w;
        rhs[u] = growth * val(used[u], 0, ng);
        diff[u] = w - rhs[u];
      }
      GradientEstimate e;
      e.t = times[t];
      e.lhs = plug - var_total;  // E|mean|^2 = |E V|^2 + tr Cov / n
      e.rhs = mean_se(rhs).mean;
      e.std_error = mean_se(diff).std_error;
      e.lhs_std_error = mean_se(lin).std_error;
      e.n_used = used.size();
      e.reliable = d.reliable();
      out[q].push_back(e);
    }
  return out;
}

std::vector<CheckRow> verify_gradient_bound(const ProcessModel& m, const RunConfig& rc,
                                            const std::vector<SmoothFunction>& fs,
                                            const std::vector<std::vector<double>>& probes,
                                            const GradientBoundOptions& opt) {
  std::vector<CheckRow> rows;
  const auto& rs = m.system();
  for (const auto& x : probes) {
    auto est = estimate_gradient_bound(m, rc, fs, x, opt.times, opt.fd_step);
    for (std::size_t q = 0; q < fs.size(); ++q)
      for (const auto& e : est[q]) {
        CheckRow row;
        row.experiment = "gradient-bound";
        row.system = rs.name;
        row.k = k_label(rs);
        row.c = m.drift().kind() == DriftKind::Linear ? m.drift().c() : 0.0;
        row.t = e.t;
        row.x = x;
        row.quantity = "Gamma~(P_t " + fs[q].name + ")";
        row.estimate = e.lhs;
        row.std_error = e.std_error;
        row.bound = e.rhs;
        const double fd = opt.fd_tolerance * std::max(1.0, std::abs(e.rhs));
        if (e.t == 0.0) {
          // P_0 = I: the two sides agree up to the difference-quotient error.
          row.margin = fd - std::abs(e.lhs - e.rhs);
        } else {
          row.margin = e.rhs + 3.0 * e.std_error + fd - e.lhs;
        }
        row.pass = e.reliable && row.margin >= 0.0;
        rows.push_back(row);
      }
  }
  return rows;
}

double Cutoff::chi(double r) {
  if (r <= 1.0) return 0.0;
  if (r >= 2.0) return 1.0;
  const double a = std::exp(-1.0 / (r - 1.0)), b = std::exp(-1.0 / (2.0 - r));
  return a / (a + b);
}

namespace {

// psi(s) = exp(-1/s) and its first two derivatives, s > 0.
struct Psi {
  double v, d1, d2;
};
Psi psi(double s) {
  if (s <= 0.0) return {0.0, 0.0, 0.0};
  const double v = std::exp(-1.0 / s);
  return {v, v / (s * s), v * (1.0 / (s * s * s * s) - 2.0 / (s * s * s))};
}

}  // namespace

double Cutoff::d1(double r) {
  if (r <= 1.0 || r >= 2.0) return 0.0;
  Psi a = psi(r - 1.0), b = psi(2.0 - r);
  const double s = a.v + b.v;
  // a' = psi'(r-1), b' = -psi'(2-r)
  return (a.d1 * b.v + a.v * b.d1) / (s * s);
}

double Cutoff::d2(double r) {
  if (r <= 1.0 || r >= 2.0) return 0.0;
  Psi a = psi(r - 1.0), b = psi(2.0 - r);
  const double s = a.v + b.v;
  const double ap = a.d1, bp = -b.d1, app = a.d2, bpp = b.d2;
  const double num1 = app * b.v - a.v * bpp;
  const double num2 = ap * b.v - a.v * bp;
  return num1 / (s * s) - 2.0 * num2 * (ap + bp) / (s * s * s);
}

double rho(const double* x, int n) {
  double r2 = 0.0;
  for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
  const double r = std::sqrt(r2);
  return r * Cutoff::chi(r);
}

double generator_rho(const RootSystem<double>& rs, double c, const double* x) {
  double r2 = 0.0;
  for (int i = 0; i < rs.dim; ++i) r2 += x[i] * x[i];
  const double r = std::sqrt(r2);
  if (r <= 1.0) return 0.0;
  const double ng = rs.dim + 2.0 * rs.gamma;
  const double ch = Cutoff::chi(r), c1 = Cutoff::d1(r), c2 = Cutoff::d2(r);
  const double lap = (ng - 1.0) * ch / r + (ng + 1.0) * c1 + r * c2;
  // <b, grad rho> with b = -c x: -c r (chi + r chi')
  return lap - c * r * (ch + r * c1);
}

LyapunovConstants lyapunov_constants(const RootSystem<double>& rs, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("Lyapunov constants need c > 0");
  LyapunovConstants k;
  k.c2 = c;
  const double tail = (rs.dim + 2.0 * rs.gamma - 1.0) / 2.0;
  double sup = std::max(0.0, tail);
  std::vector<double> x(rs.dim, 0.0);
  for (int i = 0; i <= 200000; ++i) {
    x[0] = 1.0 + i / 200000.0;
    sup = std::max(sup, generator_rho(rs, c, x.data()) + c * rho(x.data(), rs.dim));
  }
  k.c1 = sup * (1.0 + 1e-9) + 1e-12;
  return k;
}

std::vector<double> mean_oracle(const RootSystem<double>& rs, double c, const std::vector<double>& x, double t) {
  const int n = rs.dim;
  // d/dt E X = -c M E X, M = I + sum k alpha alpha^T; exp by scaling and squaring.
  std::vector<double> a(n * n, 0.0);
  for (int i = 0; i < n; ++i) a[i * n + i] = 1.0;
  for (std::size_t r = 0; r < rs.num_positive(); ++r)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a[i * n + j] += rs.k[r] * rs.positive[r][i] * rs.positive[r][j];
  double norm = 0.0;
  for (double& v : a) {
    v *= -c * t;
    norm = std::max(norm, std::abs(v));
  }
  int squarings = 0;
  while (norm * n > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (double& v : a) v *= scale;
  auto mul = [n](const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> r(n * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) r[i * n + j] += p[i * n + k] * q[k * n + j];
    return r;
  };
  std::vector<double> e(n * n, 0.0), term(n * n, 0.0);
  for (int i = 0; i < n; ++i) e[i * n + i] = term[i * n + i] = 1.0;
  for (int k = 1; k <= 20; ++k) {
    term = mul(term, a);
    for (double& v : term) v /= k;
    for (int i = 0; i < n * n; ++i) e[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) e = mul(e, e);
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i] += e[i * n + j] * x[j];
  return out;
}

double second_moment_oracle(const RootSystem<double>& rs, double c, const std::vector<double>& x, double t) {
  // m' = (2N + 4 gamma) - 2 c m
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double inf = (rs.dim + 2.0 * rs.gamma) / c;
  return inf + (r2 - inf) * std::exp(-2.0 * c * t);
}

std::vector<CheckRow> verify_moments(const ProcessModel& m, const RunConfig& rc, const std::vector<double>& x,
                                     const std::vector<double>& times) {
  const auto& rs = m.system();
  if (m.drift().kind() != DriftKind::Linear) throw std::invalid_argument("moment oracles need b = -c x");
  const double c = m.drift().c();
  const int n = rs.dim;
  BundleSpec spec{{x}, times, static_cast<std::size_t>(n) + 1};
  BundleData d = simulate_bundle(m, rc, spec, [&](const ReplicaState& s, std::size_t, std::size_t, double* out) {
    double y[kMaxDim];
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += s.x[i] * s.x[i];
    for (int i = 0; i < n; ++i) out[i] = 0.0;
    if (s.weights.empty()) {
      m.act(static_cast<std::size_t>(s.element), s.x.data(), y);
      for (int i = 0; i < n; ++i) out[i] = y[i];
    } else {
      for (std::size_t g = 0; g < s.weights.size(); ++g) {
        if (s.weights[g] == 0.0) continue;
        m.act(g, s.x.data(), y);
        for (int i = 0; i < n; ++i) out[i] += s.weights[g] * y[i];
      }
    }
    out[n] = r2;  // |x|^2 is G-invariant
  });
  std::vector<CheckRow> rows;
  for (std::size_t t = 0; t < times.size(); ++t) {
    const std::vector<double> mean = mean_oracle(rs, c, x, times[t]);
    for (int o = 0; o <= n; ++o) {
      MeanSe ms = mean_se(d.column(0, t, o));
      CheckRow row;
      row.experiment = "fd-sim";
      row.system = rs.name;
      row.k = k_label(rs);
      row.c = c;
      row.t = times[t];
      row.x = x;
      row.quantity = o < n ? "E X_t[" + std::to_string(o + 1) + "]" : "E |X_t|^2";
      row.estimate = ms.mean;
      row.std_error = ms.std_error;
      row.bound = o < n ? mean[o] : second_moment_oracle(rs, c, x, times[t]);
      row.margin = 3.0 * ms.std_error - std::abs(ms.mean - row.bound);
      row.pass = d.reliable() && row.margin >= 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

CheckRow verify_lyapunov_pointwise(const RootSystem<double>& rs, double c, double r_max, std::size_t n_grid) {
  const LyapunovConstants lc = lyapunov_constants(rs, c);
  // Midpoints, so the grid differs from the one that produced C1.
  std::vector<double> x(rs.dim, 0.0);
  double worst = -std::numeric_limits<double>::infinity();
  double at = 0.0;
  for (std::size_t i = 0; i < n_grid; ++i) {
    x[0] = r_max * (static_cast<double>(i) + 0.5) / static_cast<double>(n_grid);
    const double v = generator_rho(rs, c, x.data()) - (lc.c1 - lc.c2 * rho(x.data(), rs.dim));
    if (v > worst) {
      worst = v;
      at = x[0];
    }
  }
  CheckRow row;
  row.experiment = "lyapunov";
  row.system = rs.name;
  row.k = k_label(rs);
  row.c = c;
  row.x = {at};
  row.quantity = "max_r L rho - C1 + C2 rho";
  row.estimate = worst;
  row.bound = 0.0;
  row.margin = -worst;
  row.pass = worst <= 0.0;
  return row;
}

std::vector<CheckRow> verify_lyapunov(const ProcessModel& m, const RunConfig& rc,
                                      const std::vector<std::vector<double>>& starts,
                                      const std::vector<double>& times) {
  const auto& rs = m.system();
  if (m.drift().kind() != DriftKind::Linear) throw std::invalid_argument("Lyapunov check is implemented for b = -c x");
  const LyapunovConstants lc = lyapunov_constants(rs, m.drift().c());
  BundleSpec spec{starts, times, 1};
  BundleData d = simulate_bundle(m, rc, spec, [&](const ReplicaState& s, std::size_t, std::size_t, double* out) {
    out[0] = rho(s.x.data(), rs.dim);  // rho is G-invariant
  });
  std::vector<CheckRow> rows;
  for (std::size_t s = 0; s < starts.size(); ++s)
    for (std::size_t t = 0; t < times.size(); ++t) {
      MeanSe ms = mean_se(d.column(s, t, 0));
      CheckRow row;
      row.experiment = "lyapunov";
      row.system = rs.name;
      row.k = k_label(rs);
      row.c = m.drift().c();
      row.t = times[t];
      row.x = starts[s];
      row.quantity = "E rho(X_t)";
      row.estimate = ms.mean;
      row.std_error = ms.std_error;
      row.bound = rho(starts[s].data(), rs.dim) + lc.c1 / lc.c2;
      row.margin = row.bound + 3.0 * ms.std_error - ms.mean;
      row.pass = d.reliable() && row.margin >= 0.0;
      rows.push_back(row);
    }
  return rows;
}

std::vector<InvariantCheck> check_invariance(const RootSystem<double>& rs, double c,
                                             const std::vector<std::string>& polys, double rel_tol) {
  DunklOperators<double> ops(rs);
  const auto drift = ops.linear_drift(c);
  std::vector<InvariantCheck> out;
  for (const auto& text : polys) {
    MultiPoly<double> f = parse_polynomial<double>(text, rs.dim);
    MultiPoly<double> lf = ops.generator(f, drift);
    InvariantCheck ic;
    ic.f = text;
    const double z = integrate_damped(rs, [](const double*) { return 1.0; }, c);
    ic.integral = integrate_damped(rs, [&](const double* x) { return lf.evaluate_double(x); }, c) / z;
    // L2(nu) norms keep the integrand smooth; |Lf| has kinks.
    auto norm = [&](const MultiPoly<double>& p) {
      return std::sqrt(integrate_damped(rs, [&](const double* x) { const double v = p.evaluate_double(x); return v * v; }, c) / z);
    };
    ic.scale = norm(lf) + norm(f);
    ic.pass = std::abs(ic.integral) <= rel_tol * std::max(1.0, ic.scale);
    out.push_back(ic);
  }
  return out;
}

double invariant_moment(const RootSystem<double>& rs, double c, const SmoothFunction& f) {
  const double z = integrate_damped(rs, [](const double*) { return 1.0; }, c);
  return integrate_damped(rs, [&](const double* x) { return f.value(x); }, c) / z;
}

std::vector<CheckRow> verify_invariant_measure(const ProcessModel& m, const RunConfig& rc,
                                               const std::vector<SmoothFunction>& fs,
                                               const std::vector<double>& start, const InvariantMeasureOptions& opt) {
  const auto& rs = m.system();
  if (m.drift().kind() != DriftKind::Linear) throw std::invalid_argument("invariant measure is known for b = -c x");
  const double c = m.drift().c();
  std::vector<double> times;
  for (double t = opt.window_start; t <= opt.t_final + 1e-12; t += opt.window_dt) times.push_back(t);
  BundleSpec spec{{start}, times, fs.size()};
  BundleData d = simulate_bundle(m, rc, spec, [&](const ReplicaState& s, std::size_t, std::size_t, double* out) {
    for (std::size_t i = 0; i < fs.size(); ++i) out[i] = conditional_expectation(m, s, fs[i]);
  });
  std::vector<CheckRow> rows;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double target = invariant_moment(rs, c, fs[i]);
    std::vector<double> last = d.column(0, times.size() - 1, i);
    std::vector<double> avg(last.size(), 0.0);
    for (std::size_t t = 0; t < times.size(); ++t) {
      std::vector<double> col = d.column(0, t, i);
      for (std::size_t u = 0; u < col.size(); ++u) avg[u] += col[u] / static_cast<double>(times.size());
    }
    std::vector<double> paired(last.size());
    for (std::size_t u = 0; u < last.size(); ++u) paired[u] = avg[u] - last[u];
    MeanSe ml = mean_se(last), ma = mean_se(avg), mp = mean_se(paired);
    CheckRow base;
    base.experiment = "invariant-measure";
    base.system = rs.name;
    base.k = k_label(rs);
    base.c = c;
    base.t = opt.t_final;
    base.x = start;

    CheckRow a = base;
    a.quantity = "long-run E " + fs[i].name;
    a.estimate = ml.mean;
    a.std_error = ml.std_error;
    a.bound = target;
    a.margin = 3.0 * ml.std_error - std::abs(ml.mean - target);
    a.pass = d.reliable() && a.margin >= 0.0;
    rows.push_back(a);

    CheckRow b = base;
    b.quantity = "time-average " + fs[i].name + " - long-run";
    b.estimate = ma.mean - ml.mean;
    b.std_error = mp.std_error;
    b.bound = 0.0;
    b.margin = 3.0 * mp.std_error - std::abs(b.estimate);
    b.pass = d.reliable() && b.margin >= 0.0;
    rows.push_back(b);
  }
  return rows;
}

}  // namespace dunkl
