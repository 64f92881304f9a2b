#include "dunkl/process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace dunkl {

namespace {

constexpr std::uint32_t kNormalSlot = 0;   // slots 0..3: Gaussian increments
constexpr std::uint32_t kGammaSlot = 8;    // slots 8..: gamma variate attempts
constexpr std::uint32_t kFlipSlot = 160;   // slots 160..: reflection uniforms

template <class T>
T ratio_of_bessel(double k, const T& z) {
  if constexpr (std::is_same_v<T, double>) {
    return bessel_ratio(k, z);
  } else {
    const double r = bessel_ratio(k, z.v);
    // R' = 1 - 2k R/z - R^2 for R = I_{k+1/2}/I_{k-1/2}
    const double dr = z.v > 0.0 ? 1.0 - 2.0 * k * r / z.v - r * r : 1.0 / (2.0 * k + 1.0);
    return {r, dr * z.d};
  }
}

template <class T>
T clamp_half(const T& v) {
  if (v < T(0.0)) return T(0.0);
  if (v > T(0.5)) return T(0.5);
  return v;
}

template <class T>
struct Stepper {
  const ProcessModel& m;
  const SimParams& p;
  BasicReplicaState<T>& s;
  const T* extra;
  CounterStream& rng;
  std::uint32_t step;

  T wall(std::size_t j, const T* x) const {
    const auto& a = m.active()[j].alpha;
    T v(0.0);
    for (int i = 0; i < m.dim(); ++i) v += a[i] * x[i];
    return v;
  }

  void drift(const T* x, T* out, int n) const {
    if constexpr (std::is_same_v<T, double>) {
      m.drift().eval(x, out, n);
    } else {
      const double c = m.drift().c();
      for (int i = 0; i < n; ++i) out[i] = -c * x[i];
    }
  }

  // <b + e, alpha>/<alpha, x>; exact -c for the linear drift.
  T drift_ratio(std::size_t j, const T* x, const T& sj) const {
    const auto& a = m.active()[j].alpha;
    T r(0.0);
    if (m.drift().kind() == DriftKind::Linear) {
      r = T(-m.drift().c());
    } else if (value_of(sj) != 0.0) {
      T b[kMaxDim];
      drift(x, b, m.dim());
      T v(0.0);
      for (int i = 0; i < m.dim(); ++i) v += b[i] * a[i];
      r = v / sj;
    }
    if (extra != nullptr && value_of(sj) != 0.0) {
      T v(0.0);
      for (int i = 0; i < m.dim(); ++i) v += extra[i] * a[i];
      r += v / sj;
    }
    return r;
  }

  void run(double dt, std::uint32_t code, int depth) {
    using std::abs;
    using std::exp;
    using std::sqrt;
    const std::size_t na = m.num_active();
    const int n = m.dim();
    T sw[64];
    std::size_t nearest = 0;
    double rest_rate = 0.0;
    for (std::size_t j = 0; j < na; ++j) {
      sw[j] = wall(j, s.x.data());
      if (std::abs(value_of(sw[j])) < std::abs(value_of(sw[nearest]))) nearest = j;
    }
    for (std::size_t j = 0; j < na; ++j)
      if (j != nearest) rest_rate += 2.0 * m.active()[j].k / (value_of(sw[j]) * value_of(sw[j]));
    if (na > 1 && rest_rate * dt > p.jump_prob_cap && depth < p.max_substep_depth) {
      run(0.5 * dt, 2 * code, depth + 1);
      if (!s.flagged) run(0.5 * dt, 2 * code + 1, depth + 1);
      return;
    }
    rng.position(step, code);
    ++s.substeps;

    const T* x = s.x.data();
    T mu[kMaxDim];
    drift(x, mu, n);
    if (extra != nullptr)
      for (int i = 0; i < n; ++i) mu[i] += extra[i];
    for (std::size_t j = 0; j < na; ++j) {
      if (j == nearest) continue;
      const auto& r = m.active()[j];
      for (int i = 0; i < n; ++i) mu[i] += 2.0 * r.k * r.alpha[i] / sw[j];
    }
    T norm(0.0);
    for (int i = 0; i < n; ++i) norm += mu[i] * mu[i];
    norm = sqrt(norm) * dt;
    const T tame = norm > T(p.taming_cap) ? p.taming_cap / norm : T(1.0);

    double z[kMaxDim];
    for (int i = 0; i < n; i += 2) {
      auto pr = rng.normal_pair(kNormalSlot + static_cast<std::uint32_t>(i / 2));
      z[i] = pr[0];
      if (i + 1 < n) z[i + 1] = pr[1];
    }
    const double sq2dt = std::sqrt(2.0 * dt);
    std::array<T, kMaxDim> xn{};
    for (int i = 0; i < n; ++i) xn[i] = x[i] + tame * mu[i] * dt + sq2dt * z[i];

    if (na == 0) {
      s.x = xn;
      if (!std::isfinite(value_of(xn[0]))) s.flagged = true;
      return;
    }

    // Normal coordinate to the nearest wall: exact Bessel transition.
    const auto& ra = m.active()[nearest];
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    T u(0.0), mun(0.0), un(0.0);
    double zn = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ni = ra.alpha[i] * inv_sqrt2;
      u += ni * x[i];
      mun += ni * mu[i];
      zn += ni * z[i];
      un += ni * xn[i];
    }
    const double side = value_of(sw[nearest]) >= 0.0 ? 1.0 : -1.0;
    const T y0 = abs(u + tame * mun * dt) * inv_sqrt2;
    const double g = 2.0 * rng.gamma(ra.k, kGammaSlot);
    const double sdt = std::sqrt(dt);
    const T y1 = sqrt((y0 + sdt * zn) * (y0 + sdt * zn) + dt * g);
    const T u_new = side * std::sqrt(2.0) * y1;
    for (int i = 0; i < n; ++i) xn[i] += (u_new - un) * ra.alpha[i] * inv_sqrt2;

    // Fold a crossing back into the chamber. Near a corner, reflecting in one
    // wall can push the point across the nearest one, so every wall takes
    // part; each fold removes one separating wall, so na passes suffice.
    T sn[64];
    for (int pass = 0; pass <= static_cast<int>(na); ++pass) {
      bool crossed = false;
      for (std::size_t j = 0; j < na; ++j) {
        sn[j] = wall(j, xn.data());
        if ((value_of(sn[j]) >= 0.0) == (value_of(sw[j]) >= 0.0)) continue;
        crossed = true;
        const auto& a = m.active()[j].alpha;
        for (int i = 0; i < n; ++i) xn[i] -= sn[j] * a[i];
        sn[j] = -sn[j];
      }
      if (!crossed) break;
      if (pass == static_cast<int>(na)) s.flagged = true;
    }
    if ((value_of(sn[nearest]) >= 0.0) != (side > 0.0)) s.flagged = true;
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(value_of(xn[i]))) s.flagged = true;
    for (std::size_t j = 0; j < na; ++j)
      if (j != nearest && std::abs(value_of(sn[j])) < p.hyperplane_guard) s.flagged = true;
    if (s.flagged) return;

    // Reflection probabilities from the survival of the chamber sign.
    T pflip[64];
    for (std::size_t j = 0; j < na; ++j) {
      const double k = m.active()[j].k;
      const T ratio = drift_ratio(j, x, sw[j]);
      T surv;
      if (j == nearest) {
        surv = ratio_of_bessel(k, T(y0 * y1 / dt)) * exp(2.0 * dt * k * ratio);
      } else {
        surv = exp(-2.0 * dt * k * (2.0 / (sw[j] * sn[j]) - ratio));
      }
      pflip[j] = clamp_half(T(0.5 * (1.0 - surv)));
    }
    s.x = xn;
    const bool forward = ((step + code) & 1u) == 0;
    for (std::size_t t = 0; t < na; ++t) {
      const std::size_t j = forward ? t : na - 1 - t;
      if (value_of(pflip[j]) <= 0.0) continue;
      const auto& right = m.table().right_mult[m.active()[j].index];
      if (p.jump_mode == JumpMode::Sampled) {
        const double uj = rng.uniform_pair(kFlipSlot + static_cast<std::uint32_t>(j / 2))[j % 2];
        if (uj < value_of(pflip[j])) s.element = right[s.element];
      } else {
        const T q = pflip[j];
        std::vector<T>& w = s.weights;
        // w'(h) = (1-q) w(h) + q w(h sigma_j); pairs (h, h sigma_j) are swapped.
        for (std::size_t h = 0; h < w.size(); ++h) {
          const std::size_t hs = static_cast<std::size_t>(right[h]);
          if (hs <= h) continue;
          const T a = w[h], b = w[hs];
          w[h] = (1.0 - q) * a + q * b;
          w[hs] = (1.0 - q) * b + q * a;
        }
      }
    }
  }
};

}  // namespace

ProcessModel::ProcessModel(RootSystem<double> rs, DriftSpec drift)
    : rs_(std::move(rs)), drift_(std::move(drift)), table_(build_group_table(rs_)) {
  if (rs_.num_positive() > 64) throw std::invalid_argument("simulation supports at most 64 positive roots");
  for (std::size_t r = 0; r < rs_.num_positive(); ++r) {
    if (rs_.k[r] == 0.0) continue;
    ActiveRoot a;
    for (int i = 0; i < rs_.dim; ++i) a.alpha[i] = rs_.positive[r][i];
    a.k = rs_.k[r];
    a.index = static_cast<int>(r);
    active_.push_back(a);
  }
  const int n = rs_.dim;
  for (const auto& g : rs_.group)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) group_flat_.push_back(g(i, j));
}

void ProcessModel::act(std::size_t g, const double* x, double* out) const {
  const int n = rs_.dim;
  const double* a = group_flat_.data() + g * static_cast<std::size_t>(n * n);
  for (int i = 0; i < n; ++i) {
    double v = 0.0;
    for (int j = 0; j < n; ++j) v += a[i * n + j] * x[j];
    out[i] = v;
  }
}

template <class T>
void advance(const ProcessModel& m, const SimParams& p, BasicReplicaState<T>& s,
             const std::type_identity_t<T>* extra_drift, CounterStream& rng, std::uint32_t step) {
  if (s.flagged) return;
  if constexpr (!std::is_same_v<T, double>) {
    if (m.drift().kind() != DriftKind::Linear) throw std::invalid_argument("tangent stepping needs a linear drift");
  }
  Stepper<T> st{m, p, s, extra_drift, rng, step};
  st.run(p.dt, 1, 0);
}
template void advance<double>(const ProcessModel&, const SimParams&, ReplicaState&, const double*, CounterStream&,
                              std::uint32_t);
template void advance<Dual>(const ProcessModel&, const SimParams&, TangentState&, const Dual*, CounterStream&,
                            std::uint32_t);

std::vector<double> step_point(const ProcessModel& m, const SimParams& p, const std::vector<double>& x,
                               CounterStream& rng, std::uint32_t step) {
  SimParams sp = p;
  sp.jump_mode = JumpMode::Sampled;
  ReplicaState s;
  s.reset(m, x.data(), JumpMode::Sampled);
  advance(m, sp, s, nullptr, rng, step);
  std::vector<double> out(m.dim());
  physical_position(m, s, out.data());
  return out;
}

double conditional_expectation(const ProcessModel& m, const ReplicaState& s, const SmoothFunction& f) {
  double y[kMaxDim];
  if (s.weights.empty()) {
    m.act(static_cast<std::size_t>(s.element), s.x.data(), y);
    return f.value(y);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t g = 0; g < s.weights.size(); ++g) {
    const double w = s.weights[g];
    if (w == 0.0) continue;
    m.act(g, s.x.data(), y);
    num += w * f.value(y);
    den += w;
  }
  return num / den;
}

void physical_position(const ProcessModel& m, const ReplicaState& s, double* out) {
  m.act(static_cast<std::size_t>(s.element), s.x.data(), out);
}

}  // namespace dunkl
