#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dunkl/multipoly.hpp"
#include "dunkl/root_system.hpp"

namespace dunkl {

// A smooth test function on R^N with its Euclidean gradient.
struct SmoothFunction {
  std::string name;
  int dim = 0;
  std::function<double(const double*)> value;
  std::function<void(const double*, double*)> gradient;
};

SmoothFunction function_from_polynomial(const MultiPoly<double>& p, std::string name = {});
SmoothFunction tanh_coordinate(int dim, int i);
SmoothFunction constant_function(int dim, double c);
// "tanh(x2)", "1", or any polynomial in the text syntax.
SmoothFunction parse_observable(const std::string& text, int dim);
// f o g for a group element g (a matrix).
SmoothFunction compose(const SmoothFunction& f, const Matrix<double>& g);

// Pointwise Dunkl gradient at x (x must avoid the reflecting hyperplanes).
std::vector<double> dunkl_gradient_at(const RootSystem<double>& rs, const SmoothFunction& f,
                                      const std::vector<double>& x);
// sum over g in G of |grad_k f(g x)|^2
double symmetrised_gradient(const RootSystem<double>& rs, const SmoothFunction& f, const std::vector<double>& x);

// prod_{alpha in R_+} |<alpha,x>|^{2 k_alpha}
double weight(const RootSystem<double>& rs, const std::vector<double>& x);

// Jump-diffusion decomposition of L = Delta_k + <b, grad_k>: diffusion
// coefficient sqrt2, drift mu = b + 2 sum k alpha/<alpha,x>, jump rates
// lambda_alpha = k (2/<alpha,x>^2 - <b,alpha>/<alpha,x>).
struct GeneratorDecomposition {
  double diffusion = 0.0;
  std::vector<double> mu;
  std::vector<double> rates;
};
GeneratorDecomposition generator_decomposition(const RootSystem<double>& rs, const std::vector<double>& b,
                                               const std::vector<double>& x);

// Smallest |<alpha,x>| over positive roots.
double distance_to_walls(const RootSystem<double>& rs, const double* x);

}  // namespace dunkl
