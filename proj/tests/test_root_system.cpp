#include <cmath>

#include "doctest.h"
#include "dunkl/root_system.hpp"

using namespace dunkl;

namespace {
RootSystem<QSqrt2> exact(Family f, int rank, std::vector<QSqrt2> k) { return build_standard<QSqrt2>(f, rank, k); }
}  // namespace

TEST_CASE("group orders") {
  CHECK(exact(Family::A, 1, {QSqrt2::parse("1/4")}).group_order() == 2);
  CHECK(exact(Family::A, 2, {QSqrt2::parse("1/4")}).group_order() == 6);
  CHECK(exact(Family::A, 3, {QSqrt2::parse("1/4")}).group_order() == 24);
  CHECK(exact(Family::B, 2, {QSqrt2(1), QSqrt2(2)}).group_order() == 8);
  CHECK(exact(Family::D, 4, {QSqrt2(1)}).group_order() == 192);
}

TEST_CASE("positive root counts, norms and gamma") {
  struct Case {
    Family f;
    int rank;
    std::size_t positive;
    std::vector<QSqrt2> k;
    QSqrt2 gamma;
  };
  const QSqrt2 q = QSqrt2::parse("1/4");
  for (const auto& c : {Case{Family::A, 1, 1, {q}, q}, Case{Family::A, 2, 3, {q}, QSqrt2::parse("3/4")},
                        Case{Family::A, 3, 6, {q}, QSqrt2::parse("3/2")}, Case{Family::D, 4, 12, {q}, QSqrt2(3)},
                        Case{Family::B, 2, 4, {q, QSqrt2::parse("1/2")}, QSqrt2::parse("3/2")}}) {
    const auto rs = exact(c.f, c.rank, c.k);
    CHECK(rs.num_positive() == c.positive);
    CHECK(rs.gamma == c.gamma);
    for (const auto& a : rs.roots) CHECK(dot(a, a) == QSqrt2(2));
    validate(rs);
  }
}

TEST_CASE("reflections are involutions fixing their wall") {
  const auto rs = exact(Family::B, 2, {QSqrt2(1), QSqrt2(1)});
  for (const auto& a : rs.positive) {
    CHECK(reflect(a, a) == Vec<QSqrt2>{-a[0], -a[1]});
    const Vec<QSqrt2> w{a[1], -a[0]};
    CHECK(reflect(a, w) == w);
    CHECK(reflect(a, reflect(a, Vec<QSqrt2>{QSqrt2(3), QSqrt2::parse("1/7")})) ==
          Vec<QSqrt2>{QSqrt2(3), QSqrt2::parse("1/7")});
  }
}

TEST_CASE("A_n restricted to the span of its roots") {
  const auto a2 = to_floating(exact(Family::A, 2, {QSqrt2::parse("1/4")}));
  CHECK(a2.dim == 3);
  const auto p = restrict_to_span(a2);
  CHECK(p.dim == 2);
  CHECK(p.group_order() == 6);
  for (const auto& a : p.roots) CHECK(a[0] * a[0] + a[1] * a[1] == doctest::Approx(2.0));
  CHECK(p.gamma == doctest::Approx(0.75));
}

TEST_CASE("group table is a group") {
  const auto rs = to_floating(exact(Family::B, 2, {QSqrt2(1), QSqrt2(1)}));
  const GroupTable t = build_group_table(rs);
  const std::size_t n = rs.group_order();
  for (std::size_t j = 0; j < rs.num_positive(); ++j)
    for (std::size_t g = 0; g < n; ++g) {
      // reflections are involutions on both sides
      CHECK(t.right_mult[j][t.right_mult[j][g]] == static_cast<int>(g));
      CHECK(t.left_mult[j][t.left_mult[j][g]] == static_cast<int>(g));
    }
  for (std::size_t g = 0; g < n; ++g) CHECK(t.inverse[t.inverse[g]] == static_cast<int>(g));
}

TEST_CASE("bad multiplicities are rejected") {
  CHECK_THROWS_AS(exact(Family::B, 2, {QSqrt2(1), QSqrt2(1), QSqrt2(1)}), RootSystemError);
  CHECK_THROWS_AS(exact(Family::A, 1, {QSqrt2(-1)}), RootSystemError);
  CHECK_THROWS(parse_family("Z"));
}
