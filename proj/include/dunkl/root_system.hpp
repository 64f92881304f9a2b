#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dunkl/linalg.hpp"

namespace dunkl {

enum class Family { A, B, D, I2, Explicit };

struct RootSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kGroupCap = 10000;
inline constexpr int kMaxDim = 8;

// A root system normalised to |alpha|^2 = 2, with a positive subsystem, its
// reflection group (identity first) and a multiplicity function constant on
// orbits.
template <class S>
struct RootSystem {
  Family family = Family::Explicit;
  int rank = 0;
  int dim = 0;
  std::string name;
  std::vector<Vec<S>> roots;
  std::vector<Vec<S>> positive;
  std::vector<Matrix<S>> reflections;  // one per positive root
  std::vector<int> orbit;              // orbit index per positive root
  std::vector<S> orbit_k;
  std::vector<S> k;                    // per positive root
  std::vector<Matrix<S>> group;
  S gamma{0};

  std::size_t num_positive() const { return positive.size(); }
  std::size_t group_order() const { return group.size(); }
};

template <class S>
Vec<S> reflect(const Vec<S>& alpha, const Vec<S>& x) {
  // sigma_alpha x = x - <alpha,x> alpha, valid because |alpha|^2 = 2.
  S s = dot(alpha, x);
  Vec<S> y = x;
  for (std::size_t i = 0; i < x.size(); ++i) y[i] -= s * alpha[i];
  return y;
}

// Closure of the generators under multiplication, identity first, BFS order.
// Throws RootSystemError when the cap is exceeded.
template <class S>
std::vector<Matrix<S>> generate_group(const std::vector<Matrix<S>>& generators, int dim,
                                      std::size_t cap = kGroupCap);

// k: one value per orbit (orbits ordered by first positive root); a single
// value is broadcast. For I2 the rank argument is m.
template <class S>
RootSystem<S> build_standard(Family family, int rank, const std::vector<S>& k);

// roots: either the full set or one root per +-pair; the negatives are added.
template <class S>
RootSystem<S> build_explicit(const std::vector<Vec<S>>& roots, const std::vector<S>& k);

// Re-checks every structural property; throws RootSystemError with the first
// failing item.
template <class S>
void validate(const RootSystem<S>& rs);

RootSystem<double> to_floating(const RootSystem<QSqrt2>& rs);

// Coordinates in an orthonormal basis of the span of the roots, so A_n
// becomes an n-dimensional system. Orbits, k and group order are kept.
RootSystem<double> restrict_to_span(const RootSystem<double>& rs);

Family parse_family(const std::string& name);
std::string family_name(Family f);

// Floating-point view used by the pointwise and Monte Carlo code.
struct GroupTable {
  // right_mult[j][g] = index of g * sigma_j
  std::vector<std::vector<int>> right_mult;
  // left_mult[j][g] = index of sigma_j * g
  std::vector<std::vector<int>> left_mult;
  std::vector<int> inverse;
};

GroupTable build_group_table(const RootSystem<double>& rs);

}  // namespace dunkl
