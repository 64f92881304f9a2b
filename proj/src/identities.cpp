#include "dunkl/identities.hpp"

#include <algorithm>
#include <random>

namespace dunkl {

namespace {

using P = MultiPoly<QSqrt2>;

// Raw engine output only, so the draws do not depend on the standard
// library's distribution implementations.
struct Draw {
  std::mt19937_64 eng;
  Draw(std::uint64_t seed, std::uint64_t index) : eng(seed * 0x9e3779b97f4a7c15ull + index) {}
  int below(int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); }
};

QSqrt2 random_k(Draw& d) {
  const int den = 1 + d.below(12);
  return QSqrt2(mpq_class(d.below(den + 1), den));
}

std::string k_text(const RootSystem<QSqrt2>& rs) {
  std::string s;
  for (std::size_t i = 0; i < rs.orbit_k.size(); ++i) s += (i ? ";" : "") + rs.orbit_k[i].to_string();
  return s;
}

void record(IdentityResult& r, const P& residual) {
  r.max_abs_residual = std::max(r.max_abs_residual, residual.max_abs_coefficient());
  if (!residual.is_zero()) r.pass = false;
}

}  // namespace

MultiPoly<QSqrt2> random_rational_poly(int nvars, int max_degree, std::uint64_t seed, std::uint64_t index) {
  Draw d(seed, index);
  std::vector<P::Term> terms;
  const int nterms = 2 + d.below(7);
  for (int t = 0; t < nterms; ++t) {
    const int deg = d.below(max_degree + 1);
    Monomial m;
    for (int e = 0; e < deg; ++e) m = m * Monomial::var(d.below(nvars));
    int num = d.below(19) - 9;
    if (num == 0) num = 1;
    terms.push_back({m, QSqrt2(mpq_class(num, 1 + d.below(6)))});
  }
  return P::from_terms(nvars, std::move(terms));
}

std::vector<IdentityResult> identity_suite(const RootSystem<QSqrt2>& base, const IdentitySuiteOptions& opt) {
  const std::vector<std::string> names{"commutativity", "laplacian_closed_form", "leibniz_defect", "carre_du_champ",
                                       "chain_rule_G"};
  std::vector<IdentityResult> out(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    out[i].check = names[i];
    out[i].system = base.name;
  }
  const std::size_t per_k = std::max<std::size_t>(1, opt.n_cases / std::max<std::size_t>(1, opt.k_draws));
  const int n = base.dim;
  std::string k_seen;
  for (std::size_t c0 = 0; c0 < opt.n_cases; c0 += per_k) {
    Draw dk(opt.seed, 1000000 + c0);
    std::vector<QSqrt2> ks;
    for (std::size_t o = 0; o < base.orbit_k.size(); ++o) ks.push_back(random_k(dk));
    const RootSystem<QSqrt2> rs = with_multiplicity(base, ks);
    k_seen += (k_seen.empty() ? "" : "|") + k_text(rs);
    const DunklOperators<QSqrt2> ops(rs);
    // The chain rule is multiplicative in g, so the reflections of the
    // positive roots (which generate G) suffice; one more element per case
    // exercises a longer word directly.
    for (std::size_t c = c0; c < std::min(opt.n_cases, c0 + per_k); ++c) {
      const P f = random_rational_poly(n, opt.max_degree, opt.seed, 2 * c);
      const P h = random_rational_poly(n, opt.max_degree, opt.seed, 2 * c + 1);
      std::vector<P> tf;
      for (int i = 0; i < n; ++i) tf.push_back(ops.dunkl_T(i, f));
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) record(out[0], ops.dunkl_T(i, tf[j]) - ops.dunkl_T(j, tf[i]));
      const P lap = ops.laplacian(f, LaplacianMethod::SumOfSquares);
      record(out[1], lap - ops.laplacian(f, LaplacianMethod::ClosedForm));
      for (int i = 0; i < n; ++i) record(out[2], ops.leibniz_defect(i, f, h) - ops.leibniz_formula(i, f, h));
      record(out[3], ops.carre_du_champ(f, CarreDuChampMethod::Definition) -
                         ops.carre_du_champ(f, CarreDuChampMethod::ClosedForm));
      std::vector<std::size_t> elems;
      for (std::size_t r = 0; r < rs.num_positive(); ++r) elems.push_back(r);
      Draw dg(opt.seed, 2000000 + c);
      const std::size_t extra = static_cast<std::size_t>(dg.below(static_cast<int>(rs.group.size())));
      for (std::size_t e = 0; e <= elems.size(); ++e) {
        const Matrix<QSqrt2>& g = e < elems.size() ? rs.reflections[elems[e]] : rs.group[extra];
        const P fg = ops.compose(f, g);
        // T_i(f o g) = sum_j g_ji (T_j f) o g
        for (int i = 0; i < n; ++i) {
          P rhs(n);
          for (int j = 0; j < n; ++j)
            if (!g(j, i).is_zero()) rhs += g(j, i) * ops.compose(tf[j], g);
          record(out[4], ops.dunkl_T(i, fg) - rhs);
        }
      }
    }
  }
  for (auto& r : out) {
    r.cases = opt.n_cases;
    r.k = k_seen;
  }
  return out;
}

IdentityResult generator_identity(const RootSystem<QSqrt2>& rs, const QSqrt2& c, std::size_t n_cases,
                                  std::uint64_t seed) {
  IdentityResult r;
  r.check = "generator_decomposition";
  r.system = rs.name;
  r.k = k_text(rs);
  r.cases = n_cases;
  const DunklOperators<QSqrt2> ops(rs);
  const auto b = ops.linear_drift(c);
  for (std::size_t i = 0; i < n_cases; ++i) {
    const P f = random_rational_poly(rs.dim, 6, seed, i);
    record(r, ops.jump_diffusion_form(f, b) - ops.generator(f, b));
  }
  return r;
}

IdentityResult generator_identity(const RootSystem<double>& rs, double c, std::size_t n_cases, std::uint64_t seed,
                                  double tol) {
  IdentityResult r;
  r.check = "generator_decomposition";
  r.system = rs.name;
  for (std::size_t i = 0; i < rs.orbit_k.size(); ++i) r.k += (i ? ";" : "") + format_double(rs.orbit_k[i]);
  r.cases = n_cases;
  const DunklOperators<double> ops(rs);
  const auto b = ops.linear_drift(c);
  for (std::size_t i = 0; i < n_cases; ++i) {
    const P fe = random_rational_poly(rs.dim, 6, seed, i);
    std::vector<MultiPoly<double>::Term> terms;
    for (const auto& [m, v] : fe.terms()) terms.push_back({m, v.to_double()});
    const auto f = MultiPoly<double>::from_terms(rs.dim, std::move(terms));
    const auto lhs = ops.jump_diffusion_form(f, b);
    const auto rhs = ops.generator(f, b);
    const double scale = std::max({1.0, lhs.max_abs_coefficient(), rhs.max_abs_coefficient()});
    const double res = (lhs - rhs).max_abs_coefficient() / scale;
    r.max_abs_residual = std::max(r.max_abs_residual, res);
    if (!(res <= tol)) r.pass = false;
  }
  return r;
}

QSqrt2 eta_linear_exact(const QSqrt2& c, const QSqrt2& gamma) {
  // sup d_i b_i = -c, off-diagonal derivatives vanish, A_alpha b = -c alpha
  // has norm c |alpha| = c sqrt2.
  const QSqrt2 sup_diag = -c;
  const QSqrt2 a_alpha = c * QSqrt2::sqrt2();
  return sup_diag + QSqrt2::sqrt2() * gamma * a_alpha;
}

}  // namespace dunkl
