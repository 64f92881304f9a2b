#include "dunkl/dunkl_ops.hpp"

namespace dunkl {

template <class S>
DunklOperators<S>::DunklOperators(RootSystem<S> rs) : rs_(std::move(rs)) {}

template <class S>
auto DunklOperators<S>::a_alpha(const Poly& f, std::size_t root) const -> Poly {
  Poly diff = f - f.compose_linear(rs_.reflections.at(root));
  return diff.divide_by_linear_form(rs_.positive[root]);
}

template <class S>
auto DunklOperators<S>::a_all(const Poly& f) const -> std::vector<Poly> {
  std::vector<Poly> out;
  out.reserve(rs_.num_positive());
  for (std::size_t r = 0; r < rs_.num_positive(); ++r) out.push_back(a_alpha(f, r));
  return out;
}

template <class S>
auto DunklOperators<S>::dunkl_T(int i, const Poly& f) const -> Poly {
  Poly out = f.derivative(i);
  for (std::size_t r = 0; r < rs_.num_positive(); ++r) {
    S w = rs_.k[r] * rs_.positive[r][i];
    if (ScalarTraits<S>::is_zero(w)) continue;
    out += w * a_alpha(f, r);
  }
  return out;
}

template <class S>
auto DunklOperators<S>::gradient(const Poly& f) const -> Field {
  std::vector<Poly> a = a_all(f);
  Field g;
  for (int i = 0; i < dim(); ++i) {
    Poly t = f.derivative(i);
    for (std::size_t r = 0; r < a.size(); ++r) {
      S w = rs_.k[r] * rs_.positive[r][i];
      if (!ScalarTraits<S>::is_zero(w)) t += w * a[r];
    }
    g.push_back(std::move(t));
  }
  return g;
}

template <class S>
auto DunklOperators<S>::euclidean_laplacian(const Poly& f) const -> Poly {
  Poly out(dim());
  for (int i = 0; i < dim(); ++i) out += f.derivative(i).derivative(i);
  return out;
}

template <class S>
auto DunklOperators<S>::laplacian(const Poly& f, LaplacianMethod method) const -> Poly {
  if (method == LaplacianMethod::SumOfSquares) {
    Field g = gradient(f);
    Poly out(dim());
    for (int i = 0; i < dim(); ++i) out += dunkl_T(i, g[i]);
    return out;
  }
  // Delta f + 2 sum k [<grad f, a>/<a,x> - (f - f sigma)/<a,x>^2]
  //   = Delta f + 2 sum k (<grad f, a> - A_a f) / <a,x>
  Poly out = euclidean_laplacian(f);
  std::vector<Poly> grad;
  for (int i = 0; i < dim(); ++i) grad.push_back(f.derivative(i));
  for (std::size_t r = 0; r < rs_.num_positive(); ++r) {
    if (ScalarTraits<S>::is_zero(rs_.k[r])) continue;
    const auto& a = rs_.positive[r];
    Poly directional(dim());
    for (int i = 0; i < dim(); ++i)
      if (!ScalarTraits<S>::is_zero(a[i])) directional += a[i] * grad[i];
    Poly num = directional - a_alpha(f, r);
    out += (S(2) * rs_.k[r]) * num.divide_by_linear_form(a);
  }
  return out;
}

template <class S>
auto DunklOperators<S>::leibniz_defect(int i, const Poly& f, const Poly& g) const -> Poly {
  return dunkl_T(i, f * g) - f * dunkl_T(i, g) - g * dunkl_T(i, f);
}

template <class S>
auto DunklOperators<S>::leibniz_formula(int i, const Poly& f, const Poly& g) const -> Poly {
  Poly out(dim());
  for (std::size_t r = 0; r < rs_.num_positive(); ++r) {
    S w = rs_.k[r] * rs_.positive[r][i];
    if (ScalarTraits<S>::is_zero(w)) continue;
    Poly gdiff = g - g.compose_linear(rs_.reflections[r]);
    out -= w * (a_alpha(f, r) * gdiff);
  }
  return out;
}

template <class S>
auto DunklOperators<S>::carre_du_champ(const Poly& f, CarreDuChampMethod method) const -> Poly {
  if (method == CarreDuChampMethod::Definition) {
    Poly lf2 = laplacian(f * f);
    Poly flf = f * laplacian(f);
    return S(1) / S(2) * (lf2 - S(2) * flf);
  }
  Poly out(dim());
  for (int i = 0; i < dim(); ++i) {
    Poly d = f.derivative(i);
    out += d * d;
  }
  std::vector<Poly> a = a_all(f);
  for (std::size_t r = 0; r < a.size(); ++r)
    if (!ScalarTraits<S>::is_zero(rs_.k[r])) out += rs_.k[r] * (a[r] * a[r]);
  return out;
}

template <class S>
auto DunklOperators<S>::generator(const Poly& f, const Field& drift) const -> Poly {
  Poly out = laplacian(f);
  Field g = gradient(f);
  for (int i = 0; i < dim(); ++i) out += drift.at(i) * g[i];
  return out;
}

template <class S>
auto DunklOperators<S>::gamma_L(const Poly& f, const Field& drift, CarreDuChampMethod method) const -> Poly {
  if (method == CarreDuChampMethod::Definition) {
    Poly lf2 = generator(f * f, drift);
    Poly flf = f * generator(f, drift);
    return S(1) / S(2) * (lf2 - S(2) * flf);
  }
  // (f - f sigma)^2 / <a,x>^2 = (A f)^2 and (f - f sigma)^2 / <a,x> = (A f)(f - f sigma).
  Poly out(dim());
  for (int i = 0; i < dim(); ++i) {
    Poly d = f.derivative(i);
    out += d * d;
  }
  for (std::size_t r = 0; r < rs_.num_positive(); ++r) {
    if (ScalarTraits<S>::is_zero(rs_.k[r])) continue;
    const auto& a = rs_.positive[r];
    Poly af = a_alpha(f, r);
    Poly diff = f - f.compose_linear(rs_.reflections[r]);
    Poly ab(dim());
    for (int i = 0; i < dim(); ++i)
      if (!ScalarTraits<S>::is_zero(a[i])) ab += a[i] * drift.at(i);
    out += rs_.k[r] * (af * af);
    out -= (rs_.k[r] / S(2)) * (ab * (af * diff));
  }
  return out;
}

template <class S>
auto DunklOperators<S>::jump_diffusion_form(const Poly& f, const Field& drift) const -> Poly {
  // Each singular piece is combined before dividing so every intermediate
  // stays polynomial:
  //   2k <a,grad f>/<a,x> + 2k (f sigma - f)/<a,x>^2 = 2k (<a,grad f> - A f)/<a,x>
  //   -k <b,a>/<a,x> (f sigma - f) = k <b,a> A f
  Poly out = euclidean_laplacian(f);
  std::vector<Poly> grad;
  for (int i = 0; i < dim(); ++i) {
    grad.push_back(f.derivative(i));
    out += drift.at(i) * grad.back();
  }
  for (std::size_t r = 0; r < rs_.num_positive(); ++r) {
    if (ScalarTraits<S>::is_zero(rs_.k[r])) continue;
    const auto& a = rs_.positive[r];
    Poly directional(dim()), ab(dim());
    for (int i = 0; i < dim(); ++i) {
      if (ScalarTraits<S>::is_zero(a[i])) continue;
      directional += a[i] * grad[i];
      ab += a[i] * drift.at(i);
    }
    Poly af = a_alpha(f, r);
    out += (S(2) * rs_.k[r]) * (directional - af).divide_by_linear_form(a);
    out += rs_.k[r] * (ab * af);
  }
  return out;
}

template <class S>
auto DunklOperators<S>::linear_drift(const S& c) const -> Field {
  Field b;
  for (int i = 0; i < dim(); ++i) b.push_back((-c) * Poly::variable(dim(), i));
  return b;
}

template class DunklOperators<double>;
template class DunklOperators<QSqrt2>;

}  // namespace dunkl
