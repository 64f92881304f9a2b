#include "dunkl/rng.hpp"

#include <stdexcept>

namespace dunkl {

double CounterStream::gamma(double shape, std::uint32_t first_slot) const {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  const bool boost = shape < 1.0;
  const double a = boost ? shape + 1.0 : shape;
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (std::uint32_t attempt = 0; attempt < 60; ++attempt) {
    const std::uint32_t slot = first_slot + 2 * attempt;
    auto [z, z_unused] = normal_pair(slot);
    (void)z_unused;
    auto [u, u_boost] = uniform_pair(slot + 1);
    const double t = 1.0 + c * z;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2 || std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) {
      double g = d * v;
      if (boost) g *= std::exp(std::log(u_boost) / shape);
      return g;
    }
  }
  // Unreachable in practice (acceptance rate > 0.95 per attempt).
  return boost ? shape : d;
}

double bessel_ratio(double k, double z) {
  if (z <= 0.0) return 0.0;
  const double nu = k - 0.5;
  if (z < 20.0) {
    // Power series of both Bessel functions, common factors cancelled.
    const double q = 0.25 * z * z;
    double t = 1.0 / std::tgamma(nu + 1.0), s = 1.0 / std::tgamma(nu + 2.0);
    double a = t, b = s;
    for (int m = 0; m < 400; ++m) {
      t *= q / ((m + 1.0) * (m + 1.0 + nu));
      s *= q / ((m + 1.0) * (m + 2.0 + nu));
      a += t;
      b += s;
      if (t < 1e-17 * a && s < 1e-17 * b) break;
    }
    return 0.5 * z * b / a;
  }
  // Hankel expansion; the exponential prefactors cancel in the ratio.
  const double m0 = 4.0 * nu * nu, m1 = 4.0 * (nu + 1.0) * (nu + 1.0);
  const double inv8z = 0.125 / z;
  double t0 = 1.0, t1 = 1.0, s0 = 1.0, s1 = 1.0;
  for (int j = 1; j < 40; ++j) {
    const double odd = (2.0 * j - 1.0) * (2.0 * j - 1.0);
    const double n0 = -t0 * (m0 - odd) * inv8z / j;
    const double n1 = -t1 * (m1 - odd) * inv8z / j;
    if (j > 2 && (std::abs(n0) > std::abs(t0) || std::abs(n1) > std::abs(t1))) break;
    t0 = n0;
    t1 = n1;
    s0 += t0;
    s1 += t1;
    if (std::abs(t0) < 1e-17 && std::abs(t1) < 1e-17) break;
  }
  return s1 / s0;
}

}  // namespace dunkl
