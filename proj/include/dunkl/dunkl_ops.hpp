#pragma once

#include <vector>

#include "dunkl/multipoly.hpp"
#include "dunkl/root_system.hpp"

namespace dunkl {

enum class LaplacianMethod { SumOfSquares, ClosedForm };
enum class CarreDuChampMethod { Definition, ClosedForm };

// Symbolic Dunkl calculus on polynomials. Every operator maps polynomials to
// polynomials: the difference quotients are exact divisions by <alpha,x>.
template <class S>
class DunklOperators {
 public:
  using Poly = MultiPoly<S>;
  using Field = std::vector<Poly>;  // vector field, one polynomial per coordinate

  explicit DunklOperators(RootSystem<S> rs);

  const RootSystem<S>& system() const { return rs_; }
  int dim() const { return rs_.dim; }

  Poly compose(const Poly& f, const Matrix<S>& g) const { return f.compose_linear(g); }

  // (f - f o sigma_alpha) / <alpha, x>
  Poly a_alpha(const Poly& f, std::size_t root) const;
  std::vector<Poly> a_all(const Poly& f) const;

  Poly dunkl_T(int i, const Poly& f) const;
  Field gradient(const Poly& f) const;
  Poly laplacian(const Poly& f, LaplacianMethod method = LaplacianMethod::SumOfSquares) const;

  // T_i(fg) - f T_i g - g T_i f, computed by applying the operators.
  Poly leibniz_defect(int i, const Poly& f, const Poly& g) const;
  // -sum_alpha k alpha_i (f - f o sigma)(g - g o sigma) / <alpha,x>
  Poly leibniz_formula(int i, const Poly& f, const Poly& g) const;

  Poly carre_du_champ(const Poly& f, CarreDuChampMethod method = CarreDuChampMethod::ClosedForm) const;

  // L f = Delta_k f + <b, grad_k f> for a polynomial drift b.
  Poly generator(const Poly& f, const Field& drift) const;
  // Gamma_L by definition 1/2 (L f^2 - 2 f L f), or the closed form
  // |grad f|^2 + 1/2 sum k (f - f sigma)^2 (2/<a,x>^2 - <a,b>/<a,x>).
  Poly gamma_L(const Poly& f, const Field& drift, CarreDuChampMethod method) const;
  // Delta f + <mu, grad f> + sum lambda_alpha (f o sigma - f), with
  // mu = b + 2 sum k alpha/<a,x> and lambda = k (2/<a,x>^2 - <b,a>/<a,x>).
  Poly jump_diffusion_form(const Poly& f, const Field& drift) const;

  Field linear_drift(const S& c) const;

 private:
  Poly euclidean_laplacian(const Poly& f) const;

  RootSystem<S> rs_;
};

}  // namespace dunkl
