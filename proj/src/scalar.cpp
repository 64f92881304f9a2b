#include "dunkl/scalar.hpp"

#include <charconv>
#include <stdexcept>

namespace dunkl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Decimal literal with optional fraction and exponent, converted exactly.
mpq_class parse_decimal(std::string_view s) {
  s = trim(s);
  if (s.empty()) throw std::invalid_argument("empty number");
  bool neg = false;
  if (s.front() == '+' || s.front() == '-') {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  long exp10 = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view es = s.substr(e + 1);
    if (!es.empty() && es.front() == '+') es.remove_prefix(1);
    auto [p, ec] = std::from_chars(es.data(), es.data() + es.size(), exp10);
    if (ec != std::errc() || p != es.data() + es.size())
      throw std::invalid_argument("bad exponent in '" + std::string(s) + "'");
    s = s.substr(0, e);
  }
  std::string digits;
  bool seen_dot = false, seen_digit = false;
  for (char ch : s) {
    if (ch == '.' && !seen_dot) {
      seen_dot = true;
    } else if (ch >= '0' && ch <= '9') {
      digits.push_back(ch);
      seen_digit = true;
      if (seen_dot) --exp10;
    } else {
      throw std::invalid_argument("bad number '" + std::string(s) + "'");
    }
  }
  if (!seen_digit) throw std::invalid_argument("bad number '" + std::string(s) + "'");
  mpz_class num(digits, 10);
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
  mpq_class out = exp10 < 0 ? mpq_class(num, pow10) : mpq_class(num * pow10);
  out.canonicalize();
  return neg ? mpq_class(-out) : out;
}

mpq_class parse_rational(std::string_view s) {
  s = trim(s);
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    mpq_class n = parse_decimal(s.substr(0, slash));
    mpq_class d = parse_decimal(s.substr(slash + 1));
    if (sgn(d) == 0) throw std::invalid_argument("zero denominator");
    mpq_class q = n / d;
    q.canonicalize();
    return q;
  }
  return parse_decimal(s);
}

}  // namespace

QSqrt2 QSqrt2::parse(std::string_view text) {
  std::string_view s = trim(text);
  // "a + b*sqrt2": split off the rational part at the last binary sign
  if (s.find("sqrt2") != std::string_view::npos) {
    for (std::size_t i = s.size(); i-- > 1;) {
      if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
        const QSqrt2 head = parse(s.substr(0, i));
        if (!head.is_rational()) throw std::invalid_argument("bad field element '" + std::string(text) + "'");
        const QSqrt2 tail = parse(s.substr(i + 1));
        return s[i] == '+' ? head + tail : head - tail;
      }
    }
  }
  bool neg = false;
  if (!s.empty() && s.front() == '-') {
    neg = true;
    s = trim(s.substr(1));
  }
  QSqrt2 out;
  if (auto pos = s.find("sqrt2"); pos != std::string_view::npos) {
    std::string_view coeff = trim(s.substr(0, pos));
    if (trim(s.substr(pos + 5)).size() != 0) throw std::invalid_argument("bad field element '" + std::string(text) + "'");
    mpq_class b(1);
    if (!coeff.empty()) {
      if (coeff.back() != '*') throw std::invalid_argument("bad field element '" + std::string(text) + "'");
      b = parse_rational(coeff.substr(0, coeff.size() - 1));
    }
    out = QSqrt2(mpq_class(0), b);
  } else {
    out = QSqrt2(parse_rational(s));
  }
  return neg ? -out : out;
}

QSqrt2 QSqrt2::from_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
  return QSqrt2(mpq_class(v));
}

int QSqrt2::sign() const {
  int sa = sgn(a_), sb = sgn(b_);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // a and b*sqrt2 have opposite signs: compare a^2 with 2 b^2.
  mpq_class lhs = a_ * a_;
  mpq_class rhs = 2 * b_ * b_;
  int c = cmp(lhs, rhs);
  return c == 0 ? 0 : (c > 0 ? sa : sb);
}

std::string QSqrt2::to_string() const {
  if (is_rational()) return a_.get_str();
  std::string irr = (b_ == 1) ? "sqrt2" : (b_ == -1 ? "-sqrt2" : b_.get_str() + "*sqrt2");
  if (sgn(a_) == 0) return irr;
  if (irr.front() == '-') return a_.get_str() + " - " + irr.substr(1);
  return a_.get_str() + " + " + irr;
}

QSqrt2& QSqrt2::operator+=(const QSqrt2& o) {
  a_ += o.a_;
  if (sgn(o.b_) != 0) b_ += o.b_;
  return *this;
}

QSqrt2& QSqrt2::operator-=(const QSqrt2& o) {
  a_ -= o.a_;
  if (sgn(o.b_) != 0) b_ -= o.b_;
  return *this;
}

QSqrt2& QSqrt2::operator*=(const QSqrt2& o) {
  if (sgn(b_) == 0 && sgn(o.b_) == 0) {
    a_ *= o.a_;
    return *this;
  }
  mpq_class na = a_ * o.a_ + 2 * b_ * o.b_;
  mpq_class nb = a_ * o.b_ + b_ * o.a_;
  a_ = std::move(na);
  b_ = std::move(nb);
  return *this;
}

QSqrt2& QSqrt2::operator/=(const QSqrt2& o) {
  if (o.is_zero()) throw std::domain_error("division by zero in Q(sqrt2)");
  if (sgn(o.b_) == 0) {
    a_ /= o.a_;
    if (sgn(b_) != 0) b_ /= o.a_;
    return *this;
  }
  mpq_class norm = o.a_ * o.a_ - 2 * o.b_ * o.b_;
  QSqrt2 conj(o.a_, mpq_class(-o.b_));
  *this *= conj;
  a_ /= norm;
  b_ /= norm;
  return *this;
}

double ScalarTraits<double>::parse(std::string_view text) {
  std::string_view s = trim(text);
  if (s.find("sqrt2") != std::string_view::npos) return QSqrt2::parse(s).to_double();
  if (s.find('/') != std::string_view::npos) return parse_rational(s).get_d();
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("bad number '" + std::string(s) + "'");
  return v;
}

std::string ScalarTraits<double>::to_string(double v) { return format_double(v); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace dunkl
