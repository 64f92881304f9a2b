#include <random>

#include "doctest.h"
#include "dunkl/drift.hpp"
#include "dunkl/dunkl_ops.hpp"
#include "dunkl/identities.hpp"
#include "dunkl/pointwise.hpp"

using namespace dunkl;

namespace {
using P = MultiPoly<QSqrt2>;
RootSystem<QSqrt2> a1(const char* k) { return build_standard<QSqrt2>(Family::A, 1, {QSqrt2::parse(k)}); }
}  // namespace

TEST_CASE("polynomial text round trip") {
  for (const char* text : {"2*x1^2*x2 - 1/3*x3", "x1^6 + 5", "sqrt2*x2 - 7/2*x1*x3^2", "0"}) {
    const P p = parse_polynomial<QSqrt2>(text, 3);
    CHECK(parse_polynomial<QSqrt2>(format_polynomial(p), 3) == p);
  }
  for (std::uint64_t i = 0; i < 50; ++i) {
    const P p = random_rational_poly(3, 6, 9, i);
    CHECK(p.degree() <= 6);
    CHECK(parse_polynomial<QSqrt2>(format_polynomial(p), 3) == p);
  }
  CHECK_THROWS(parse_polynomial<QSqrt2>("x4", 3));
  CHECK_THROWS(parse_polynomial<QSqrt2>("x1 +* 2", 3));
}

TEST_CASE("rank one Dunkl operator on monomials") {
  // T x^n = (n + 2k [n odd]) x^(n-1)
  const QSqrt2 k = QSqrt2::parse("2/7");
  DunklOperators<QSqrt2> ops(a1("2/7"));
  P xn = P::constant(1, QSqrt2(1));
  const P x = P::variable(1, 0);
  for (int n = 1; n <= 8; ++n) {
    const P prev = xn;
    xn = xn * x;
    const QSqrt2 coef = QSqrt2(n) + (n % 2 ? QSqrt2(2) * k : QSqrt2(0));
    CHECK(ops.dunkl_T(0, xn) == coef * prev);
  }
}

TEST_CASE("Dunkl Laplacian of |x|^2") {
  // Delta_k |x|^2 = 2N + 4 gamma
  for (auto rs : {build_standard<QSqrt2>(Family::A, 2, {QSqrt2::parse("1/3")}),
                  build_standard<QSqrt2>(Family::B, 2, {QSqrt2::parse("1/4"), QSqrt2::parse("3/5")})}) {
    DunklOperators<QSqrt2> ops(rs);
    P r2(rs.dim);
    for (int i = 0; i < rs.dim; ++i) r2 += P::variable(rs.dim, i) * P::variable(rs.dim, i);
    const QSqrt2 expect = QSqrt2(2 * rs.dim) + QSqrt2(4) * rs.gamma;
    CHECK(ops.laplacian(r2) == P::constant(rs.dim, expect));
    CHECK(ops.laplacian(r2, LaplacianMethod::ClosedForm) == P::constant(rs.dim, expect));
  }
}

TEST_CASE("identity suite is exact on the catalog") {
  IdentitySuiteOptions opt;
  opt.n_cases = 20;
  for (auto rs : {build_standard<QSqrt2>(Family::A, 1, {QSqrt2(0)}), build_standard<QSqrt2>(Family::A, 2, {QSqrt2(0)}),
                  build_standard<QSqrt2>(Family::B, 2, {QSqrt2(0), QSqrt2(0)})}) {
    for (const auto& r : identity_suite(rs, opt)) {
      INFO(r.system << " " << r.check);
      CHECK(r.pass);
      CHECK(r.max_abs_residual == 0.0);
      CHECK(r.cases == 20);
    }
  }
}

TEST_CASE("the checks can fail: a wrong multiplicity is detected") {
  // Closed-form Laplacian with k from one system, operators from another.
  const auto rs = build_standard<QSqrt2>(Family::A, 2, {QSqrt2::parse("1/4")});
  const auto wrong = with_multiplicity(rs, {QSqrt2::parse("1/3")});
  DunklOperators<QSqrt2> good(rs), bad(wrong);
  int differ = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const P f = random_rational_poly(3, 4, 3, i);
    if (!(good.laplacian(f) == bad.laplacian(f, LaplacianMethod::ClosedForm))) ++differ;
  }
  CHECK(differ > 0);
}

TEST_CASE("generator decomposition, exact and floating") {
  const auto b2 = build_standard<QSqrt2>(Family::B, 2, {QSqrt2::parse("1/4"), QSqrt2::parse("1/2")});
  CHECK(generator_identity(b2, QSqrt2::parse("3/2"), 10, 4).pass);
  const auto i2 = build_standard<double>(Family::I2, 5, {0.3});
  const auto r = generator_identity(i2, 1.0, 10, 4);
  CHECK(r.pass);
  CHECK(r.max_abs_residual < 1e-9);
}

TEST_CASE("eta for the linear drift") {
  const QSqrt2 c(1);
  CHECK(eta_linear_exact(c, QSqrt2::parse("1/4")) == QSqrt2::parse("-1/2"));
  CHECK(eta_linear_exact(c, QSqrt2::parse("1/2")) == QSqrt2(0));
  const auto rs = to_floating(a1("1/4"));
  CHECK(eta_constant(rs, DriftSpec::linear(1.0)) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("pointwise gradient matches the polynomial one") {
  const auto ex = build_standard<QSqrt2>(Family::A, 2, {QSqrt2::parse("1/4")});
  const auto rs = to_floating(ex);
  DunklOperators<QSqrt2> ops(ex);
  const P f = parse_polynomial<QSqrt2>("x1^3*x2 - 2*x3^2 + x1", 3);
  const auto grad = ops.gradient(f);
  const SmoothFunction sf = parse_observable("x1^3*x2 - 2*x3^2 + x1", 3);
  const std::vector<double> x{0.3, -1.1, 0.45};
  const auto g = dunkl_gradient_at(rs, sf, x);
  for (int i = 0; i < 3; ++i) CHECK(g[i] == doctest::Approx(grad[i].evaluate_double(x.data())).epsilon(1e-12));
}

TEST_CASE("jump rates are nonnegative for the linear drift") {
  const auto rs = to_floating(build_standard<QSqrt2>(Family::D, 4, {QSqrt2::parse("1/3")}));
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> x(4), b(4);
    for (int a = 0; a < 4; ++a) x[a] = nd(gen), b[a] = -0.7 * x[a];
    if (distance_to_walls(rs, x.data()) < 1e-6) continue;
    for (double l : generator_decomposition(rs, b, x).rates) CHECK(l >= 0.0);
  }
}
