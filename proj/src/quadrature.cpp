#include "dunkl/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "dunkl/pointwise.hpp"

namespace dunkl {

namespace {

void check(double value, double err, double l1, const char* where) {
  if (!std::isfinite(value) || !std::isfinite(err) || err > 1e-6 * std::max(1.0, l1))
    throw QuadratureError(std::string("quadrature did not converge (") + where + ", value " + format_double(value) +
                          ", error " + format_double(err) + "); integrand may not be integrable");
}

// int_0^inf g(r) dr with a possible endpoint singularity at 0. For damped
// integrands the tail beyond `cutoff` is below e^{-200} times polynomial
// growth and is dropped; exp_sinh misjudges its error on peaked tails.
double half_line(const std::function<double(double)>& g, double tol, double cutoff) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double err = 0.0, l1 = 0.0;
  double near = ts.integrate(g, 0.0, 1.0, tol, &err, &l1);
  check(near, err, l1, "[0,1]");
  double far = 0.0;
  if (std::isfinite(cutoff)) {
    if (cutoff > 1.0) far = ts.integrate(g, 1.0, cutoff, tol, &err, &l1);
  } else {
    boost::math::quadrature::exp_sinh<double> es;
    far = es.integrate(g, 1.0, std::numeric_limits<double>::infinity(), tol, &err, &l1);
  }
  check(far, err, l1, "[1,inf)");
  return near + far;
}

double damped_cutoff(double c) { return std::sqrt(400.0 / c); }

}  // namespace

double integrate_line(const std::function<double(double)>& g, double tol) {
  const double inf = std::numeric_limits<double>::infinity();
  return half_line(g, tol, inf) + half_line([&](double x) { return g(-x); }, tol, inf);
}

double integrate_damped(const RootSystem<double>& rs, const Integrand& F, double c, double tol) {
  if (!(c > 0.0)) throw QuadratureError("integrals against the bare Dunkl measure are refused: need c > 0");
  if (rs.dim == 1) {
    auto g = [&](double x) {
      double p[1] = {x};
      const double damp = std::exp(-0.5 * c * x * x);
      if (damp == 0.0) return 0.0;  // polynomial growth cannot beat the underflow
      return F(p) * weight(rs, {x}) * damp;
    };
    const double R = damped_cutoff(c);
    return half_line(g, tol, R) + half_line([&](double x) { return g(-x); }, tol, R);
  }
  if (rs.dim != 2) throw QuadratureError("quadrature is limited to N = 1 and N = 2");
  // Angular breakpoints where a wall crosses the unit circle.
  std::vector<double> cuts{0.0, 2.0 * std::numbers::pi};
  for (const auto& a : rs.positive) {
    double th = std::atan2(a[1], a[0]) + 0.5 * std::numbers::pi;
    for (int s = -2; s <= 2; ++s) {
      double t = th + s * std::numbers::pi;
      if (t > 0.0 && t < 2.0 * std::numbers::pi) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a < 1e-14; }), cuts.end());
  boost::math::quadrature::tanh_sinh<double> ts;
  auto angular = [&](double th) {
    const double ct = std::cos(th), st = std::sin(th);
    // The weight is homogeneous of degree 2 gamma. Factoring it keeps
    // directions within roundoff of a wall from jittering along the ray.
    const double w_dir = weight(rs, {ct, st});
    auto radial = [&](double r) {
      const double damp = std::exp(-0.5 * c * r * r);
      if (damp == 0.0) return 0.0;
      std::vector<double> x{r * ct, r * st};
      return F(x.data()) * w_dir * std::pow(r, 2.0 * rs.gamma) * damp * r;
    };
    return half_line(radial, tol, damped_cutoff(c));
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    double v = ts.integrate(angular, cuts[i], cuts[i + 1], tol, &err, &l1);
    check(v, err, l1, "angular");
    total += v;
  }
  return total;
}

}  // namespace dunkl
