#include <cmath>

#include "doctest.h"
#include "dunkl/ensemble.hpp"
#include "dunkl/quadrature.hpp"
#include "dunkl/verify.hpp"

using namespace dunkl;

namespace {
RootSystem<double> fl(Family f, int rank, std::vector<const char*> k) {
  std::vector<QSqrt2> q;
  for (auto s : k) q.push_back(QSqrt2::parse(s));
  return to_floating(build_standard<QSqrt2>(f, rank, q));
}

RunConfig small(std::size_t n, std::uint64_t seed = 3) {
  RunConfig rc;
  rc.n_replicas = n;
  rc.seed = seed;
  return rc;
}
}  // namespace

TEST_CASE("invariant second moment by quadrature") {
  // E_nu |x|^2 = (N + 2 gamma) / c
  const auto a1 = fl(Family::A, 1, {"1/4"});
  const double c = 1.7;
  const auto x2 = parse_observable("x1^2", 1);
  CHECK(invariant_moment(a1, c, x2) == doctest::Approx((1.0 + 0.5) / c).epsilon(1e-10));
  const auto b2 = fl(Family::B, 2, {"1/4", "1/2"});
  const auto r2 = parse_observable("x1^2 + x2^2", 2);
  CHECK(invariant_moment(b2, c, r2) == doctest::Approx((2.0 + 2.0 * b2.gamma) / c).epsilon(1e-9));
}

TEST_CASE("quadrature refuses the undamped measure") {
  const auto a1 = fl(Family::A, 1, {"1/4"});
  CHECK_THROWS_AS(integrate_damped(a1, [](const double*) { return 1.0; }, 0.0), QuadratureError);
}

TEST_CASE("invariance of nu on polynomials") {
  const auto a2 = restrict_to_span(fl(Family::A, 2, {"1/10"}));
  for (const auto& r : check_invariance(a2, 1.0, {"x1", "x2^2", "x1*x2", "x1^4 + 2*x1^2*x2^2 + x2^4"}, 1e-6))
    CHECK(r.pass);
}

TEST_CASE("radial generator of rho against finite differences") {
  const auto b2 = fl(Family::B, 2, {"1/4", "1/2"});
  const double c = 1.3, h = 1e-4;
  for (auto p : {std::vector<double>{1.2, 0.7}, std::vector<double>{-0.4, 2.9}, std::vector<double>{5.0, -3.1}}) {
    double lap = 0.0, grad[2];
    for (int i = 0; i < 2; ++i) {
      auto up = p, dn = p;
      up[i] += h;
      dn[i] -= h;
      const double fu = rho(up.data(), 2), fd = rho(dn.data(), 2), f0 = rho(p.data(), 2);
      lap += (fu - 2.0 * f0 + fd) / (h * h);
      grad[i] = (fu - fd) / (2.0 * h);
    }
    // rho is radial, so the jump part vanishes and only the first-order
    // wall terms remain.
    double l = lap - c * (p[0] * grad[0] + p[1] * grad[1]);
    for (std::size_t r = 0; r < b2.num_positive(); ++r) {
      const auto& a = b2.positive[r];
      l += 2.0 * b2.k[r] * (a[0] * grad[0] + a[1] * grad[1]) / (a[0] * p[0] + a[1] * p[1]);
    }
    CHECK(generator_rho(b2, c, p.data()) == doctest::Approx(l).epsilon(1e-5));
  }
}

TEST_CASE("Lyapunov drift condition on a radial grid") {
  for (auto rs : {fl(Family::A, 1, {"1/4"}), fl(Family::B, 2, {"1/4", "1/2"})}) {
    const CheckRow r = verify_lyapunov_pointwise(rs, 1.0, 50.0, 20000);
    CHECK(r.pass);
    CHECK(r.estimate <= 0.0);
  }
}

TEST_CASE("mean oracle in rank one") {
  // E X_t = x exp(-c (1 + 2k) t) for A_1 in R^1
  const auto a1 = fl(Family::A, 1, {"1/4"});
  for (double t : {0.0, 0.3, 2.0})
    CHECK(mean_oracle(a1, 0.8, {1.5}, t)[0] == doctest::Approx(1.5 * std::exp(-0.8 * 1.5 * t)).epsilon(1e-13));
  CHECK(second_moment_oracle(a1, 1.0, {1.0}, 100.0) == doctest::Approx(1.5));
}

TEST_CASE("serial and parallel paths agree bit for bit") {
  const ProcessModel m(fl(Family::B, 2, {"1/4", "1/2"}), DriftSpec::linear(1.0));
  const auto f = parse_observable("x1^2*x2 + x2", 2);
  RunConfig rc = small(300);
  rc.execution = Execution::Serial;
  const auto s = estimate_Pt(m, rc, f, {0.8, -0.3}, {0.2, 0.5});
  rc.execution = Execution::Parallel;
  const auto p = estimate_Pt(m, rc, f, {0.8, -0.3}, {0.2, 0.5});
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].mean == p[i].mean);
    CHECK(s[i].std_error == p[i].std_error);
  }
}

TEST_CASE("averaged and sampled jumps estimate the same semigroup") {
  const ProcessModel m(fl(Family::A, 1, {"1/2"}), DriftSpec::linear(1.0));
  const auto f = parse_observable("tanh(x1)", 1);
  RunConfig rc = small(8000);
  const auto avg = estimate_Pt(m, rc, f, {0.6}, {0.5});
  rc.params.jump_mode = JumpMode::Sampled;
  const auto smp = estimate_Pt(m, rc, f, {0.6}, {0.5});
  const double se = std::hypot(avg[0].std_error, smp[0].std_error);
  CHECK(std::abs(avg[0].mean - smp[0].mean) < 4.0 * se);
  // conditioning can only reduce the spread
  CHECK(avg[0].std_error <= smp[0].std_error);
}

TEST_CASE("Monte Carlo moments against the closed forms") {
  const ProcessModel m(fl(Family::A, 1, {"1/4"}), DriftSpec::linear(1.0));
  for (const auto& r : verify_moments(m, small(6000), {1.0}, {0.25, 1.0})) {
    INFO(r.quantity << " t=" << r.t);
    CHECK(r.pass);
  }
}

TEST_CASE("gradient bound holds with equality at time zero") {
  const ProcessModel m(fl(Family::A, 1, {"1/4"}), DriftSpec::linear(1.0));
  GradientBoundOptions opt;
  opt.times = {0.0, 0.5};
  const auto rows = verify_gradient_bound(m, small(1500), {parse_observable("tanh(x1)", 1)}, {{0.7}, {-1.9}}, opt);
  for (const auto& r : rows) {
    INFO(r.quantity << " t=" << r.t);
    CHECK(r.pass);
  }
}

TEST_CASE("reruns are reproducible") {
  const ProcessModel m(fl(Family::A, 1, {"1/4"}), DriftSpec::linear(1.0));
  const auto f = parse_observable("x1", 1);
  const auto a = estimate_Pt(m, small(200, 9), f, {1.0}, {0.5});
  const auto b = estimate_Pt(m, small(200, 9), f, {1.0}, {0.5});
  const auto c = estimate_Pt(m, small(200, 10), f, {1.0}, {0.5});
  CHECK(a[0].mean == b[0].mean);
  CHECK(a[0].mean != c[0].mean);
}

TEST_CASE("no replica is lost at chamber corners") {
  // Small k keeps paths close to the walls; near the origin of A_2 a fold in
  // one wall can cross another.
  const ProcessModel m(restrict_to_span(fl(Family::A, 2, {"1/10"})), DriftSpec::linear(1.0));
  const auto e = estimate_Pt(m, small(500), parse_observable("x1^2", 2), {0.6, 0.8}, {1.0, 3.0});
  for (const auto& r : e) {
    CHECK(r.n_flagged == 0);
    CHECK(r.reliable);
  }
  // stationary E x1^2 = (N + 2 gamma) / (N c) = 1.3
  CHECK(std::abs(e[1].mean - 1.3) < 4.0 * e[1].std_error);
}
