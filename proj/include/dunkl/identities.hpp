#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dunkl/dunkl_ops.hpp"
#include "dunkl/drift.hpp"

namespace dunkl {

// One identity family checked on one system: {check, system, k, max_abs_residual}.
struct IdentityResult {
  std::string check;
  std::string system;
  std::string k;
  double max_abs_residual = 0.0;
  std::size_t cases = 0;
  bool pass = true;
};

struct IdentitySuiteOptions {
  std::size_t n_cases = 100;
  int max_degree = 6;
  std::size_t k_draws = 10;  // fresh random k every n_cases / k_draws cases
  std::uint64_t seed = 1;
};

// Same roots and group, new multiplicities (one value per orbit).
template <class S>
RootSystem<S> with_multiplicity(RootSystem<S> rs, const std::vector<S>& orbit_k) {
  if (orbit_k.size() != rs.orbit_k.size()) throw RootSystemError("one multiplicity per orbit expected");
  rs.orbit_k = orbit_k;
  rs.gamma = S(0);
  for (std::size_t r = 0; r < rs.num_positive(); ++r) {
    rs.k[r] = orbit_k[rs.orbit[r]];
    rs.gamma += rs.k[r];
  }
  return rs;
}

// Random polynomial with rational coefficients, total degree <= max_degree.
MultiPoly<QSqrt2> random_rational_poly(int nvars, int max_degree, std::uint64_t seed, std::uint64_t index);

// Commutativity, Laplacian closed form, Leibniz defect, carre du champ and
// the chain rule under G, on random polynomials and random rational k in
// [0,1]. Residuals are exact: any nonzero coefficient fails.
std::vector<IdentityResult> identity_suite(const RootSystem<QSqrt2>& rs, const IdentitySuiteOptions& opt);

// Delta f + mu.grad f + sum lambda (f o sigma - f) against (Delta_k + b.grad_k) f
// for b = -c x on random polynomials.
IdentityResult generator_identity(const RootSystem<QSqrt2>& rs, const QSqrt2& c, std::size_t n_cases,
                                  std::uint64_t seed);
// Floating version for systems without an exact form; residual relative to
// the coefficient scale.
IdentityResult generator_identity(const RootSystem<double>& rs, double c, std::size_t n_cases, std::uint64_t seed,
                                  double tol = 1e-9);

// eta = -c + 2 c gamma for b = -c x, in exact arithmetic.
QSqrt2 eta_linear_exact(const QSqrt2& c, const QSqrt2& gamma);

}  // namespace dunkl
