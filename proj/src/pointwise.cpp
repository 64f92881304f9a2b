#include "dunkl/pointwise.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <regex>

namespace dunkl {

SmoothFunction function_from_polynomial(const MultiPoly<double>& p, std::string name) {
  auto poly = std::make_shared<MultiPoly<double>>(p);
  auto grad = std::make_shared<std::vector<MultiPoly<double>>>();
  for (int i = 0; i < p.nvars(); ++i) grad->push_back(p.derivative(i));
  SmoothFunction f;
  f.name = name.empty() ? format_polynomial(p) : std::move(name);
  f.dim = p.nvars();
  f.value = [poly](const double* x) { return poly->evaluate_double(x); };
  f.gradient = [grad](const double* x, double* out) {
    for (std::size_t i = 0; i < grad->size(); ++i) out[i] = (*grad)[i].evaluate_double(x);
  };
  return f;
}

SmoothFunction tanh_coordinate(int dim, int i) {
  SmoothFunction f;
  f.name = "tanh(x" + std::to_string(i + 1) + ")";
  f.dim = dim;
  f.value = [i](const double* x) { return std::tanh(x[i]); };
  f.gradient = [dim, i](const double* x, double* out) {
    for (int j = 0; j < dim; ++j) out[j] = 0.0;
    double t = std::tanh(x[i]);
    out[i] = 1.0 - t * t;
  };
  return f;
}

SmoothFunction constant_function(int dim, double c) {
  SmoothFunction f;
  f.name = format_double(c);
  f.dim = dim;
  f.value = [c](const double*) { return c; };
  f.gradient = [dim](const double*, double* out) {
    for (int j = 0; j < dim; ++j) out[j] = 0.0;
  };
  return f;
}

SmoothFunction parse_observable(const std::string& text, int dim) {
  static const std::regex tanh_re(R"(\s*tanh\(\s*x(\d+)\s*\)\s*)");
  std::smatch m;
  if (std::regex_match(text, m, tanh_re)) {
    int i = std::stoi(m[1].str());
    if (i < 1 || i > dim) throw std::invalid_argument("observable variable out of range: " + text);
    return tanh_coordinate(dim, i - 1);
  }
  return function_from_polynomial(parse_polynomial<double>(text, dim), text);
}

SmoothFunction compose(const SmoothFunction& f, const Matrix<double>& g) {
  SmoothFunction h;
  h.name = f.name + " o g";
  h.dim = f.dim;
  const int n = f.dim;
  h.value = [f, g, n](const double* x) {
    double y[kMaxDim];
    for (int i = 0; i < n; ++i) {
      y[i] = 0.0;
      for (int j = 0; j < n; ++j) y[i] += g(i, j) * x[j];
    }
    return f.value(y);
  };
  h.gradient = [f, g, n](const double* x, double* out) {
    double y[kMaxDim], gy[kMaxDim];
    for (int i = 0; i < n; ++i) {
      y[i] = 0.0;
      for (int j = 0; j < n; ++j) y[i] += g(i, j) * x[j];
    }
    f.gradient(y, gy);
    // grad (f o g)(x) = g^T grad f(g x)
    for (int j = 0; j < n; ++j) {
      out[j] = 0.0;
      for (int i = 0; i < n; ++i) out[j] += g(i, j) * gy[i];
    }
  };
  return h;
}

std::vector<double> dunkl_gradient_at(const RootSystem<double>& rs, const SmoothFunction& f,
                                      const std::vector<double>& x) {
  const int n = rs.dim;
  std::vector<double> out(n);
  f.gradient(x.data(), out.data());
  const double fx = f.value(x.data());
  for (std::size_t r = 0; r < rs.num_positive(); ++r) {
    if (rs.k[r] == 0.0) continue;
    const auto& a = rs.positive[r];
    double s = dot(a, x);
    if (s == 0.0) throw std::domain_error("grad_k evaluated on a reflecting hyperplane");
    std::vector<double> sx = reflect(a, x);
    double q = (fx - f.value(sx.data())) / s;
    for (int i = 0; i < n; ++i) out[i] += rs.k[r] * a[i] * q;
  }
  return out;
}

double symmetrised_gradient(const RootSystem<double>& rs, const SmoothFunction& f, const std::vector<double>& x) {
  double total = 0.0;
  for (const auto& g : rs.group) {
    std::vector<double> gx = g.apply(x);
    for (double v : dunkl_gradient_at(rs, f, gx)) total += v * v;
  }
  return total;
}

double weight(const RootSystem<double>& rs, const std::vector<double>& x) {
  double w = 1.0;
  for (std::size_t r = 0; r < rs.num_positive(); ++r)
    if (rs.k[r] != 0.0) w *= std::pow(std::abs(dot(rs.positive[r], x)), 2.0 * rs.k[r]);
  return w;
}

GeneratorDecomposition generator_decomposition(const RootSystem<double>& rs, const std::vector<double>& b,
                                               const std::vector<double>& x) {
  GeneratorDecomposition d;
  d.diffusion = std::sqrt(2.0);
  d.mu = b;
  for (std::size_t r = 0; r < rs.num_positive(); ++r) {
    const auto& a = rs.positive[r];
    double s = dot(a, x);
    double rate = rs.k[r] * (2.0 / (s * s) - dot(b, a) / s);
    d.rates.push_back(rate);
    for (int i = 0; i < rs.dim; ++i) d.mu[i] += 2.0 * rs.k[r] * a[i] / s;
  }
  return d;
}

double distance_to_walls(const RootSystem<double>& rs, const double* x) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : rs.positive) {
    double s = 0.0;
    for (int i = 0; i < rs.dim; ++i) s += a[i] * x[i];
    m = std::min(m, std::abs(s));
  }
  return m;
}

}  // namespace dunkl
