#include "dunkl/drift.hpp"

#include "dunkl/pointwise.hpp"

#include <cmath>
#include <cstdio>

namespace dunkl {

namespace {

constexpr unsigned kPrimes[kMaxDim] = {2, 3, 5, 7, 11, 13, 17, 19};

std::string witness(const std::vector<double>& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_double(x[i]);
  return s + ")";
}

}  // namespace

DriftSpec DriftSpec::linear(double c) {
  DriftSpec d;
  d.kind_ = DriftKind::Linear;
  d.c_ = c;
  return d;
}

DriftSpec DriftSpec::polynomial(std::vector<MultiPoly<double>> components, DriftBounds declared) {
  if (components.empty()) throw std::invalid_argument("drift needs at least one component");
  DriftSpec d;
  d.kind_ = DriftKind::Polynomial;
  d.declared_ = declared;
  const int n = components.front().nvars();
  if (static_cast<int>(components.size()) != n) throw std::invalid_argument("drift must have N components in N variables");
  for (const auto& p : components) {
    std::vector<MultiPoly<double>> row;
    for (int j = 0; j < n; ++j) row.push_back(p.derivative(j));
    d.jac_.push_back(std::move(row));
  }
  d.comps_ = std::move(components);
  return d;
}

std::string DriftSpec::describe() const {
  if (kind_ == DriftKind::Linear) return "linear(c=" + format_double(c_) + ")";
  std::string s = "polynomial[";
  for (std::size_t i = 0; i < comps_.size(); ++i) s += (i ? "; " : "") + format_polynomial(comps_[i]);
  return s + "]";
}

void DriftSpec::eval(const double* x, double* out, int dim) const {
  if (kind_ == DriftKind::Linear) {
    for (int i = 0; i < dim; ++i) out[i] = -c_ * x[i];
    return;
  }
  for (int i = 0; i < dim; ++i) out[i] = comps_[i].evaluate_double(x);
}

std::vector<double> DriftSpec::eval(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  eval(x.data(), out.data(), static_cast<int>(x.size()));
  return out;
}

double DriftSpec::partial(int i, int j, const double* x) const {
  if (kind_ == DriftKind::Linear) return i == j ? -c_ : 0.0;
  return jac_[i][j].evaluate_double(x);
}

DriftBounds DriftSpec::bounds(const RootSystem<double>& rs) const {
  if (kind_ == DriftKind::Polynomial) return declared_;
  // A_alpha(-c x) = -c alpha, |alpha| = sqrt2
  DriftBounds b;
  b.sup_diag = -c_;
  b.max_offdiag = 0.0;
  b.max_a_alpha = rs.num_positive() > 0 ? std::abs(c_) * std::sqrt(2.0) : 0.0;
  return b;
}

double eta_constant(const RootSystem<double>& rs, const DriftSpec& b) {
  DriftBounds d = b.bounds(rs);
  return d.sup_diag + (rs.dim - 1) * d.max_offdiag + std::sqrt(2.0) * rs.gamma * d.max_a_alpha;
}

bool HypothesisAudit::ok() const { return first_failure() == nullptr; }

const AuditItem* HypothesisAudit::first_failure() const {
  for (const auto& it : items)
    if (!it.passed) return &it;
  return nullptr;
}

double halton(std::uint64_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

std::vector<std::vector<double>> probe_points(const RootSystem<double>& rs, std::size_t count, double radius,
                                              double wall_offset) {
  const int n = rs.dim;
  std::vector<std::vector<double>> pts;
  for (std::uint64_t idx = 1; pts.size() < count; ++idx) {
    std::vector<double> x(n);
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] = radius * (2.0 * halton(idx, kPrimes[i]) - 1.0);
      r2 += x[i] * x[i];
    }
    if (r2 <= radius * radius) pts.push_back(std::move(x));
  }
  // Near-hyperplane probes from the first few bulk points.
  const std::size_t base = std::min<std::size_t>(pts.size(), 64);
  for (std::size_t p = 0; p < base; ++p)
    for (const auto& a : rs.positive)
      for (double side : {-1.0, 1.0}) {
        std::vector<double> y = pts[p];
        double s = dot(a, y);
        for (int i = 0; i < n; ++i) y[i] += (side * wall_offset * std::sqrt(2.0) - s) * a[i] / 2.0;
        pts.push_back(std::move(y));
      }
  return pts;
}

HypothesisAudit audit_drift(const RootSystem<double>& rs, const DriftSpec& b, std::size_t n_probes, double radius) {
  HypothesisAudit audit;
  const int n = rs.dim;
  const auto pts = probe_points(rs, n_probes, radius);
  const DriftBounds decl = b.bounds(rs);
  const double tol = 1e-9;

  AuditItem bounds{"drift derivative bounds", true, ""};
  AuditItem equiv{"drift G-equivariance", true, ""};
  AuditItem rates{"nonnegative jump rates", true, ""};
  for (const auto& x : pts) {
    if (distance_to_walls(rs, x.data()) == 0.0) continue;
    std::vector<double> bx = b.eval(x);
    const double scale = 1.0;
    for (int i = 0; i < n && bounds.passed; ++i)
      for (int j = 0; j < n; ++j) {
        double d = b.partial(i, j, x.data());
        bool bad = (i == j) ? d > decl.sup_diag + tol * scale : std::abs(d) > decl.max_offdiag + tol * scale;
        if (bad) {
          bounds.passed = false;
          bounds.detail = "d" + std::to_string(j + 1) + " b" + std::to_string(i + 1) + " = " + format_double(d) +
                          " at " + witness(x);
          break;
        }
      }
    for (std::size_t r = 0; r < rs.num_positive() && bounds.passed; ++r) {
      const auto& a = rs.positive[r];
      std::vector<double> sx = reflect(a, x);
      std::vector<double> bs = b.eval(sx);
      double s = dot(a, x), norm2 = 0.0;
      for (int i = 0; i < n; ++i) norm2 += std::pow((bx[i] - bs[i]) / s, 2);
      if (std::sqrt(norm2) > decl.max_a_alpha + 1e-7 * (1.0 + decl.max_a_alpha)) {
        bounds.passed = false;
        bounds.detail = "|A_alpha b| = " + format_double(std::sqrt(norm2)) + " at " + witness(x);
      }
    }
    if (equiv.passed) {
      for (const auto& g : rs.group) {
        std::vector<double> lhs = b.eval(g.apply(x));
        std::vector<double> rhs = g.apply(bx);
        double err = 0.0, mag = 1.0;
        for (int i = 0; i < n; ++i) {
          err = std::max(err, std::abs(lhs[i] - rhs[i]));
          mag = std::max(mag, std::abs(rhs[i]));
        }
        if (err > 1e-9 * mag) {
          equiv.passed = false;
          equiv.detail = "b(gx) != g b(x) at " + witness(x);
          break;
        }
      }
    }
    for (std::size_t r = 0; r < rs.num_positive() && rates.passed; ++r) {
      if (rs.k[r] == 0.0) continue;
      const auto& a = rs.positive[r];
      double s = dot(a, x);
      double lam = 2.0 / (s * s) - dot(bx, a) / s;
      if (lam < -1e-12 * (2.0 / (s * s))) {
        rates.passed = false;
        rates.detail = "2/<a,x>^2 - <b,a>/<a,x> = " + format_double(lam) + " at " + witness(x);
      }
    }
  }
  audit.items = {bounds, equiv, rates};
  return audit;
}

}  // namespace dunkl
