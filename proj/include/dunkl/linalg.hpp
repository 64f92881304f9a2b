#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dunkl/scalar.hpp"

namespace dunkl {

template <class S>
using Vec = std::vector<S>;

template <class S>
S dot(const Vec<S>& a, const Vec<S>& b) {
  S acc(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Square row-major matrix, small N only.
template <class S>
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, S(0)) {}

  static Matrix identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }

  int dim() const { return n_; }
  S& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const S& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  Matrix operator*(const Matrix& o) const {
    Matrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int l = 0; l < n_; ++l) {
        if (ScalarTraits<S>::is_zero((*this)(i, l))) continue;
        for (int j = 0; j < n_; ++j) r(i, j) += (*this)(i, l) * o(l, j);
      }
    return r;
  }

  Vec<S> apply(const Vec<S>& x) const {
    Vec<S> y(n_, S(0));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (!ScalarTraits<S>::is_zero((*this)(i, j))) y[i] += (*this)(i, j) * x[j];
    return y;
  }

  Matrix transpose() const {
    Matrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  const std::vector<S>& entries() const { return a_; }
  friend bool operator==(const Matrix& l, const Matrix& r) { return l.n_ == r.n_ && l.a_ == r.a_; }

 private:
  int n_ = 0;
  std::vector<S> a_;
};

// sigma_alpha = I - 2 alpha alpha^T / |alpha|^2.
template <class S>
Matrix<S> reflection_matrix(const Vec<S>& alpha) {
  const int n = static_cast<int>(alpha.size());
  S norm2 = dot(alpha, alpha);
  if (ScalarTraits<S>::is_zero(norm2)) throw std::invalid_argument("zero root");
  Matrix<S> m = Matrix<S>::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) -= S(2) * alpha[i] * alpha[j] / norm2;
  return m;
}

template <class S>
Matrix<double> to_double(const Matrix<S>& m) {
  Matrix<double> r(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) r(i, j) = ScalarTraits<S>::to_double(m(i, j));
  return r;
}

template <class S>
Vec<double> to_double(const Vec<S>& v) {
  Vec<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = ScalarTraits<S>::to_double(v[i]);
  return r;
}

}  // namespace dunkl
