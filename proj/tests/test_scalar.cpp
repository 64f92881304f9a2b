#include <cmath>

#include "doctest.h"
#include "dunkl/dual.hpp"
#include "dunkl/scalar.hpp"

using namespace dunkl;

TEST_CASE("Q(sqrt2) field operations") {
  const QSqrt2 r2 = QSqrt2::sqrt2();
  CHECK(r2 * r2 == QSqrt2(2));
  const QSqrt2 a(mpq_class(1, 3), mpq_class(-2, 5));
  CHECK(a / a == QSqrt2(1));
  CHECK((a + r2) - r2 == a);
  CHECK((QSqrt2(1) + r2) * (r2 - QSqrt2(1)) == QSqrt2(1));
  CHECK(a.to_double() == doctest::Approx(1.0 / 3.0 - 0.4 * std::sqrt(2.0)));
}

TEST_CASE("signs near zero are decided exactly") {
  // 140/99 < sqrt2 < 99/70, both within 1e-4
  CHECK((QSqrt2::sqrt2() - QSqrt2(mpq_class(140, 99))).sign() > 0);
  CHECK((QSqrt2::sqrt2() - QSqrt2(mpq_class(99, 70))).sign() < 0);
  CHECK((QSqrt2(mpq_class(99, 70)) - QSqrt2::sqrt2()).sign() > 0);
  CHECK(QSqrt2(0).sign() == 0);
  CHECK(QSqrt2(mpq_class(-1, 2)) < QSqrt2(0));
}

TEST_CASE("parsing and printing") {
  for (const char* s : {"1/4", "-3", "2*sqrt2", "1/2 - 1/3*sqrt2", "-1/2+sqrt2", "sqrt2", "-sqrt2"}) {
    const QSqrt2 v = QSqrt2::parse(s);
    CHECK(QSqrt2::parse(v.to_string()) == v);
  }
  CHECK(QSqrt2::parse("0.25") == QSqrt2(mpq_class(1, 4)));
  CHECK_THROWS(QSqrt2::parse("1/0"));
  CHECK_THROWS(QSqrt2::parse("abc"));
  CHECK_THROWS(QSqrt2::parse("sqrt2 + sqrt2"));
  CHECK(QSqrt2::parse("1/2 - 1/3*sqrt2") == QSqrt2(mpq_class(1, 2), mpq_class(-1, 3)));
}

TEST_CASE("dual numbers carry first derivatives") {
  const Dual x(0.7, 1.0);
  const Dual y = exp(x) * x / (Dual(1.0) + x * x) - sqrt(x);
  const double v = 0.7;
  const double f = std::exp(v) * v / (1 + v * v) - std::sqrt(v);
  const double df = std::exp(v) * v / (1 + v * v) + std::exp(v) / (1 + v * v) -
                    std::exp(v) * v * 2 * v / ((1 + v * v) * (1 + v * v)) - 0.5 / std::sqrt(v);
  CHECK(y.v == doctest::Approx(f).epsilon(1e-15));
  CHECK(y.d == doctest::Approx(df).epsilon(1e-14));
  CHECK(value_of(y) == y.v);
  CHECK(abs(Dual(-2.0, 3.0)).d == -3.0);
}
