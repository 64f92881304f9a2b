#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>

namespace dunkl {

// Element a + b*sqrt(2) of the field Q(sqrt2). Every root system we build
// exactly (A_n, D_n, B_n, A_1 in R^1) has coordinates in this field.
class QSqrt2 {
 public:
  QSqrt2() = default;
  QSqrt2(long v) : a_(v) {}  // NOLINT(implicit)
  QSqrt2(mpq_class a, mpq_class b = 0) : a_(std::move(a)), b_(std::move(b)) {
    a_.canonicalize();
    b_.canonicalize();
  }

  static QSqrt2 sqrt2() { return QSqrt2(mpq_class(0), mpq_class(1)); }
  // Accepts "3", "-2/7", "0.125", "sqrt2", "3/4*sqrt2", "1e-3".
  static QSqrt2 parse(std::string_view text);
  // Exact binary value of a double.
  static QSqrt2 from_double(double v);

  const mpq_class& rational_part() const { return a_; }
  const mpq_class& irrational_part() const { return b_; }
  bool is_rational() const { return sgn(b_) == 0; }
  bool is_zero() const { return sgn(a_) == 0 && sgn(b_) == 0; }
  int sign() const;
  double to_double() const { return a_.get_d() + b_.get_d() * std::sqrt(2.0); }
  std::string to_string() const;

  QSqrt2& operator+=(const QSqrt2& o);
  QSqrt2& operator-=(const QSqrt2& o);
  QSqrt2& operator*=(const QSqrt2& o);
  QSqrt2& operator/=(const QSqrt2& o);

  friend QSqrt2 operator+(QSqrt2 l, const QSqrt2& r) { return l += r; }
  friend QSqrt2 operator-(QSqrt2 l, const QSqrt2& r) { return l -= r; }
  friend QSqrt2 operator*(QSqrt2 l, const QSqrt2& r) { return l *= r; }
  friend QSqrt2 operator/(QSqrt2 l, const QSqrt2& r) { return l /= r; }
  friend QSqrt2 operator-(const QSqrt2& v) { return QSqrt2(mpq_class(-v.a_), mpq_class(-v.b_)); }
  friend bool operator==(const QSqrt2& l, const QSqrt2& r) { return l.a_ == r.a_ && l.b_ == r.b_; }
  friend bool operator<(const QSqrt2& l, const QSqrt2& r) { return (l - r).sign() < 0; }

 private:
  mpq_class a_{0};
  mpq_class b_{0};
};

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool kExact = false;
  static constexpr double kTolerance = 1e-10;
  static bool is_zero(double v) { return v == 0.0; }
  static double to_double(double v) { return v; }
  static double from_double(double v) { return v; }
  static double parse(std::string_view text);
  static std::string to_string(double v);
  static double abs(double v) { return std::abs(v); }
};

template <>
struct ScalarTraits<QSqrt2> {
  static constexpr bool kExact = true;
  static bool is_zero(const QSqrt2& v) { return v.is_zero(); }
  static double to_double(const QSqrt2& v) { return v.to_double(); }
  static QSqrt2 from_double(double v) { return QSqrt2::from_double(v); }
  static QSqrt2 parse(std::string_view text) { return QSqrt2::parse(text); }
  static std::string to_string(const QSqrt2& v) { return v.to_string(); }
  static QSqrt2 abs(const QSqrt2& v) { return v.sign() < 0 ? -v : v; }
};

// Shortest round-trip decimal form; used everywhere floats are written out.
std::string format_double(double v);

}  // namespace dunkl
