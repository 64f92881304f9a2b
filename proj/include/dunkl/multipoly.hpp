#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dunkl/linalg.hpp"

namespace dunkl {

struct NotDivisibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxPolyVars = 8;
inline constexpr int kMaxPolyDegree = 32;

// Exponent vector packed into one word, x1 in the most significant byte, so
// integer order is lexicographic order and monomial product is addition.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::uint64_t key) : key_(key) {}
  static Monomial var(int i, int power = 1) { return Monomial(static_cast<std::uint64_t>(power) << shift(i)); }

  int exponent(int i) const { return static_cast<int>((key_ >> shift(i)) & 0xffu); }
  int degree() const {
    int d = 0;
    for (int i = 0; i < kMaxPolyVars; ++i) d += exponent(i);
    return d;
  }
  Monomial with_exponent(int i, int e) const {
    std::uint64_t k = key_ & ~(std::uint64_t{0xff} << shift(i));
    return Monomial(k | (static_cast<std::uint64_t>(e) << shift(i)));
  }
  std::uint64_t key() const { return key_; }
  Monomial operator*(Monomial o) const { return Monomial(key_ + o.key_); }
  friend bool operator<(Monomial a, Monomial b) { return a.key_ < b.key_; }
  friend bool operator==(Monomial a, Monomial b) { return a.key_ == b.key_; }

 private:
  static int shift(int i) { return 8 * (kMaxPolyVars - 1 - i); }
  std::uint64_t key_ = 0;
};

// Sparse multivariate polynomial over S (QSqrt2 or double). Terms are kept
// sorted by monomial with no zero coefficients.
template <class S>
class MultiPoly {
 public:
  using Term = std::pair<Monomial, S>;

  MultiPoly() = default;
  explicit MultiPoly(int nvars) : nvars_(nvars) { check_vars(nvars); }

  static MultiPoly constant(int nvars, const S& c) {
    MultiPoly p(nvars);
    if (!ScalarTraits<S>::is_zero(c)) p.terms_.push_back({Monomial(), c});
    return p;
  }
  static MultiPoly variable(int nvars, int i) {
    if (i < 0 || i >= nvars) throw std::out_of_range("variable index out of range");
    MultiPoly p(nvars);
    p.terms_.push_back({Monomial::var(i), S(1)});
    return p;
  }
  static MultiPoly linear_form(const Vec<S>& coeffs) {
    MultiPoly p(static_cast<int>(coeffs.size()));
    for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i)
      if (!ScalarTraits<S>::is_zero(coeffs[i])) p.terms_.push_back({Monomial::var(i), coeffs[i]});
    return p;
  }
  static MultiPoly from_terms(int nvars, std::vector<Term> terms) {
    MultiPoly p(nvars);
    p.terms_ = std::move(terms);
    p.normalize();
    return p;
  }

  int nvars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const {
    int d = -1;
    for (const auto& t : terms_) d = std::max(d, t.first.degree());
    return d;
  }
  S coefficient(Monomial m) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                               [](const Term& t, Monomial key) { return t.first < key; });
    return (it != terms_.end() && it->first == m) ? it->second : S(0);
  }
  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(ScalarTraits<S>::to_double(t.second)));
    return m;
  }

  MultiPoly& operator+=(const MultiPoly& o) { return merge(o, false); }
  MultiPoly& operator-=(const MultiPoly& o) { return merge(o, true); }
  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
  friend MultiPoly operator-(MultiPoly a) {
    for (auto& t : a.terms_) t.second = -t.second;
    return a;
  }
  friend MultiPoly operator*(const S& c, MultiPoly a) {
    if (ScalarTraits<S>::is_zero(c)) return MultiPoly(a.nvars_);
    for (auto& t : a.terms_) t.second *= c;
    a.drop_zeros();
    return a;
  }

  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    same_ring(a, b);
    MultiPoly r(a.nvars_);
    if (a.is_zero() || b.is_zero()) return r;
    if (a.degree() + b.degree() > kMaxPolyDegree)
      throw std::length_error("polynomial degree would exceed " + std::to_string(kMaxPolyDegree));
    r.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.terms_.push_back({ma * mb, ca * cb});
    r.normalize();
    return r;
  }

  friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
    if constexpr (ScalarTraits<S>::kExact) {
      return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
    } else {
      return approx_equal(a, b, ScalarTraits<double>::kTolerance);
    }
  }

  // Coefficientwise comparison relative to the larger coefficient scale.
  friend bool approx_equal(const MultiPoly& a, const MultiPoly& b, double tol) {
    MultiPoly d = a - b;
    double scale = std::max({1.0, a.max_abs_coefficient(), b.max_abs_coefficient()});
    return d.max_abs_coefficient() <= tol * scale;
  }

  MultiPoly derivative(int i) const {
    MultiPoly r(nvars_);
    for (const auto& [m, c] : terms_) {
      int e = m.exponent(i);
      if (e == 0) continue;
      r.terms_.push_back({m.with_exponent(i, e - 1), S(e) * c});
    }
    r.normalize();
    return r;
  }

  template <class T>
  T evaluate(const std::vector<T>& x) const {
    if (static_cast<int>(x.size()) != nvars_) throw std::invalid_argument("evaluation point has wrong dimension");
    // Powers cached per variable.
    std::vector<std::vector<T>> pw(nvars_, std::vector<T>{T(1)});
    T acc(0);
    for (const auto& [m, c] : terms_) {
      T v = coerce<T>(c);
      for (int i = 0; i < nvars_; ++i) {
        int e = m.exponent(i);
        if (e == 0) continue;
        auto& p = pw[i];
        while (static_cast<int>(p.size()) <= e) p.push_back(p.back() * x[i]);
        v *= p[e];
      }
      acc += v;
    }
    return acc;
  }
  double evaluate_double(const double* x) const {
    double acc = 0.0;
    for (const auto& [m, c] : terms_) {
      double v = ScalarTraits<S>::to_double(c);
      for (int i = 0; i < nvars_; ++i)
        for (int e = m.exponent(i); e > 0; --e) v *= x[i];
      acc += v;
    }
    return acc;
  }

  // f(M x): variable i is replaced by row i of M.
  MultiPoly compose_linear(const Matrix<S>& M) const {
    if (M.dim() != nvars_) throw std::invalid_argument("compose_linear: dimension mismatch");
    // Signed permutation fast path.
    std::vector<int> perm(nvars_, -1);
    std::vector<S> sgn(nvars_);
    bool monomial_map = true;
    for (int i = 0; i < nvars_ && monomial_map; ++i) {
      for (int j = 0; j < nvars_; ++j) {
        if (ScalarTraits<S>::is_zero(M(i, j))) continue;
        if (perm[i] >= 0) {
          monomial_map = false;
          break;
        }
        perm[i] = j;
        sgn[i] = M(i, j);
      }
      if (perm[i] < 0) monomial_map = false;
    }
    MultiPoly r(nvars_);
    if (monomial_map) {
      r.terms_.reserve(terms_.size());
      for (const auto& [m, c] : terms_) {
        Monomial out;
        S coef = c;
        for (int i = 0; i < nvars_; ++i) {
          int e = m.exponent(i);
          if (e == 0) continue;
          out = out * Monomial::var(perm[i], e);
          for (int t = 0; t < e; ++t) coef *= sgn[i];
        }
        r.terms_.push_back({out, coef});
      }
      r.normalize();
      return r;
    }
    std::vector<std::vector<MultiPoly>> pw(nvars_);
    for (int i = 0; i < nvars_; ++i) {
      Vec<S> row(nvars_);
      for (int j = 0; j < nvars_; ++j) row[j] = M(i, j);
      pw[i] = {constant(nvars_, S(1)), linear_form(row)};
    }
    for (const auto& [m, c] : terms_) {
      MultiPoly t = constant(nvars_, c);
      for (int i = 0; i < nvars_; ++i) {
        int e = m.exponent(i);
        if (e == 0) continue;
        auto& p = pw[i];
        while (static_cast<int>(p.size()) <= e) p.push_back(p.back() * p[1]);
        t = t * p[e];
      }
      r += t;
    }
    return r;
  }

  // Exact quotient by the linear form <alpha, x>. Throws NotDivisibleError if
  // the remainder does not vanish (exactly, or within tolerance for double).
  MultiPoly divide_by_linear_form(const Vec<S>& alpha) const {
    if (static_cast<int>(alpha.size()) != nvars_) throw std::invalid_argument("divide: dimension mismatch");
    int j = -1;
    double best = 0.0;
    for (int i = 0; i < nvars_; ++i) {
      double a = std::abs(ScalarTraits<S>::to_double(alpha[i]));
      if (a > best) best = a, j = i;
    }
    if (j < 0) throw std::invalid_argument("divide by the zero form");
    // l = a_j x_j + r(x'). Group f by the power of x_j: f = sum_d c_d x_j^d.
    std::map<int, MultiPoly> by_power;
    for (const auto& [m, c] : terms_) {
      int d = m.exponent(j);
      auto [it, fresh] = by_power.try_emplace(d, nvars_);
      it->second.terms_.push_back({m.with_exponent(j, 0), c});
    }
    for (auto& [d, p] : by_power) p.normalize();
    Vec<S> rest = alpha;
    rest[j] = S(0);
    const MultiPoly r = linear_form(rest);
    const S inv_aj = S(1) / alpha[j];
    MultiPoly quotient(nvars_);
    int top = by_power.empty() ? 0 : by_power.rbegin()->first;
    for (int d = top; d >= 1; --d) {
      auto it = by_power.find(d);
      if (it == by_power.end() || it->second.is_zero()) continue;
      MultiPoly q = inv_aj * it->second;  // coefficient of x_j^{d-1}
      auto [lower, fresh] = by_power.try_emplace(d - 1, nvars_);
      lower->second -= r * q;
      for (const auto& [m, c] : q.terms_) quotient.terms_.push_back({m.with_exponent(j, d - 1), c});
    }
    quotient.normalize();
    auto it0 = by_power.find(0);
    if (it0 != by_power.end() && !it0->second.is_zero()) {
      if constexpr (ScalarTraits<S>::kExact) {
        throw NotDivisibleError("polynomial is not divisible by the linear form");
      } else {
        double scale = std::max(1.0, max_abs_coefficient());
        if (it0->second.max_abs_coefficient() > ScalarTraits<double>::kTolerance * scale)
          throw NotDivisibleError("polynomial is not divisible by the linear form");
      }
    }
    return quotient;
  }

  template <class T>
  MultiPoly<T> convert() const {
    MultiPoly<T> r(nvars_);
    std::vector<typename MultiPoly<T>::Term> ts;
    for (const auto& [m, c] : terms_) ts.push_back({m, coerce<T>(c)});
    return MultiPoly<T>::from_terms(nvars_, std::move(ts));
  }

 private:
  template <class>
  friend class MultiPoly;

  template <class T>
  static T coerce(const S& c) {
    if constexpr (std::is_same_v<T, S>) {
      return c;
    } else if constexpr (std::is_same_v<T, double>) {
      return ScalarTraits<S>::to_double(c);
    } else {
      return ScalarTraits<T>::from_double(ScalarTraits<S>::to_double(c));
    }
  }

  static void check_vars(int n) {
    if (n < 1 || n > kMaxPolyVars) throw std::invalid_argument("polynomials support 1..8 variables");
  }
  static void same_ring(const MultiPoly& a, const MultiPoly& b) {
    if (a.nvars_ != b.nvars_) throw std::invalid_argument("polynomials over different variable sets");
  }

  void drop_zeros() {
    std::erase_if(terms_, [](const Term& t) { return ScalarTraits<S>::is_zero(t.second); });
  }

  // Sort, combine equal monomials, drop zeros.
  void normalize() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < terms_.size();) {
      Monomial m = terms_[i].first;
      S c = std::move(terms_[i].second);
      std::size_t j = i + 1;
      for (; j < terms_.size() && terms_[j].first == m; ++j) c += terms_[j].second;
      if (!ScalarTraits<S>::is_zero(c)) terms_[out++] = {m, std::move(c)};
      i = j;
    }
    terms_.resize(out);
  }

  MultiPoly& merge(const MultiPoly& o, bool subtract) {
    same_ring(*this, o);
    std::vector<Term> out;
    out.reserve(terms_.size() + o.terms_.size());
    std::size_t i = 0, j = 0;
    while (i < terms_.size() || j < o.terms_.size()) {
      if (j == o.terms_.size() || (i < terms_.size() && terms_[i].first < o.terms_[j].first)) {
        out.push_back(std::move(terms_[i++]));
      } else if (i == terms_.size() || o.terms_[j].first < terms_[i].first) {
        out.push_back({o.terms_[j].first, subtract ? S(-o.terms_[j].second) : o.terms_[j].second});
        ++j;
      } else {
        S c = std::move(terms_[i].second);
        if (subtract) c -= o.terms_[j].second; else c += o.terms_[j].second;
        if (!ScalarTraits<S>::is_zero(c)) out.push_back({terms_[i].first, std::move(c)});
        ++i, ++j;
      }
    }
    terms_ = std::move(out);
    return *this;
  }

  int nvars_ = 1;
  std::vector<Term> terms_;
};

// Text form: "2*x1^2*x2 - 1/3*x3" (variables 1-based). Coefficients may be
// integers, p/q, decimals or multiples of sqrt2.
template <class S>
MultiPoly<S> parse_polynomial(const std::string& text, int nvars);

template <class S>
std::string format_polynomial(const MultiPoly<S>& p);

}  // namespace dunkl
