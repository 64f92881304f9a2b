#pragma once

#include <functional>
#include <stdexcept>

#include "dunkl/root_system.hpp"

namespace dunkl {

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Integrand = std::function<double(const double*)>;

// int F(x) w_k(x) exp(-c|x|^2/2) dx over R^N for N = 1 (adaptive, split at the
// wall) or N = 2 (polar: angular pieces between walls, adaptive radial part).
// c must be positive: the bare measure w_k dx is not finite.
double integrate_damped(const RootSystem<double>& rs, const Integrand& F, double c, double tol = 1e-11);

// One-dimensional helper: int_{-inf}^{inf} g(x) dx with a possible
// integrable singularity at 0.
double integrate_line(const std::function<double(double)>& g, double tol = 1e-11);

}  // namespace dunkl
