#include <cctype>
#include <string>

#include "dunkl/multipoly.hpp"

namespace dunkl {

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool done() {
    skip();
    return pos >= s.size();
  }
  char peek() {
    skip();
    return pos < s.size() ? s[pos] : '\0';
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("polynomial parse error at column " + std::to_string(pos + 1) + ": " + what);
  }
  // digits, '.', exponent, optional '/digits'
  std::string number() {
    skip();
    std::size_t start = pos;
    auto digits = [&] {
      while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) ++pos;
    };
    digits();
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
      std::size_t save = pos++;
      if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
      if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        digits();
      } else {
        pos = save;
      }
    }
    if (pos < s.size() && s[pos] == '/') {
      ++pos;
      digits();
    }
    if (pos == start) fail("expected a number");
    return s.substr(start, pos - start);
  }
};

template <class S>
MultiPoly<S> parse_factor(Cursor& c, int nvars) {
  char ch = c.peek();
  if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
    return MultiPoly<S>::constant(nvars, ScalarTraits<S>::parse(c.number()));
  }
  if (c.s.compare(c.pos, 5, "sqrt2") == 0) {
    c.pos += 5;
    return MultiPoly<S>::constant(nvars, ScalarTraits<S>::parse("sqrt2"));
  }
  if (ch == 'x') {
    ++c.pos;
    std::size_t start = c.pos;
    while (c.pos < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.pos]))) ++c.pos;
    if (start == c.pos) c.fail("expected variable index after 'x'");
    int idx = std::stoi(c.s.substr(start, c.pos - start));
    if (idx < 1 || idx > nvars) c.fail("variable x" + std::to_string(idx) + " out of range 1.." + std::to_string(nvars));
    int power = 1;
    if (c.peek() == '^') {
      ++c.pos;
      c.skip();
      std::size_t ps = c.pos;
      while (c.pos < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.pos]))) ++c.pos;
      if (ps == c.pos) c.fail("expected exponent");
      power = std::stoi(c.s.substr(ps, c.pos - ps));
      if (power > kMaxPolyDegree) c.fail("exponent above degree cap");
    }
    std::vector<typename MultiPoly<S>::Term> t{{Monomial::var(idx - 1, power), S(1)}};
    return MultiPoly<S>::from_terms(nvars, std::move(t));
  }
  c.fail(std::string("unexpected character '") + ch + "'");
}

}  // namespace

template <class S>
MultiPoly<S> parse_polynomial(const std::string& text, int nvars) {
  Cursor c{text};
  MultiPoly<S> out(nvars);
  if (c.done()) c.fail("empty polynomial");
  bool first = true;
  while (!c.done()) {
    bool neg = false;
    char ch = c.peek();
    if (ch == '+' || ch == '-') {
      neg = ch == '-';
      ++c.pos;
    } else if (!first) {
      c.fail("expected '+' or '-'");
    }
    MultiPoly<S> term = parse_factor<S>(c, nvars);
    while (c.peek() == '*') {
      ++c.pos;
      term = term * parse_factor<S>(c, nvars);
    }
    if (neg) out -= term; else out += term;
    first = false;
  }
  return out;
}

template <class S>
std::string format_polynomial(const MultiPoly<S>& p) {
  if (p.is_zero()) return "0";
  std::string out;
  auto emit = [&](bool negative, const std::string& magnitude, Monomial m) {
    std::string mono;
    for (int i = 0; i < p.nvars(); ++i) {
      int e = m.exponent(i);
      if (e == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += "x" + std::to_string(i + 1);
      if (e > 1) mono += "^" + std::to_string(e);
    }
    std::string body;
    if (mono.empty()) body = magnitude;
    else if (magnitude == "1") body = mono;
    else body = magnitude + "*" + mono;
    if (out.empty()) out = negative ? "-" + body : body;
    else out += (negative ? " - " : " + ") + body;
  };
  const auto& ts = p.terms();
  for (auto it = ts.rbegin(); it != ts.rend(); ++it) {
    const auto& [m, c] = *it;
    if constexpr (std::is_same_v<S, double>) {
      emit(c < 0, format_double(std::abs(c)), m);
    } else {
      const mpq_class& a = c.rational_part();
      const mpq_class& b = c.irrational_part();
      if (sgn(a) != 0) emit(sgn(a) < 0, mpq_class(abs(a)).get_str(), m);
      if (sgn(b) != 0) {
        mpq_class ab = abs(b);
        emit(sgn(b) < 0, ab == 1 ? std::string("sqrt2") : ab.get_str() + "*sqrt2", m);
      }
    }
  }
  return out;
}

template MultiPoly<double> parse_polynomial(const std::string&, int);
template MultiPoly<QSqrt2> parse_polynomial(const std::string&, int);
template std::string format_polynomial(const MultiPoly<double>&);
template std::string format_polynomial(const MultiPoly<QSqrt2>&);

}  // namespace dunkl
