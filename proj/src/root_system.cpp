#include "dunkl/root_system.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace dunkl {

namespace {

template <class S>
bool near_equal(const S& a, const S& b) {
  if constexpr (ScalarTraits<S>::kExact) {
    return a == b;
  } else {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  }
}

template <class S>
bool vec_equal(const Vec<S>& a, const Vec<S>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!near_equal(a[i], b[i])) return false;
  return true;
}

template <class S>
bool mat_equal(const Matrix<S>& a, const Matrix<S>& b) {
  if constexpr (ScalarTraits<S>::kExact) {
    return a == b;
  } else {
    for (std::size_t i = 0; i < a.entries().size(); ++i)
      if (!near_equal(a.entries()[i], b.entries()[i])) return false;
    return true;
  }
}

// Hash on entries rounded to ~9 significant places; equality is confirmed
// exactly (or with tolerance in floating mode).
template <class S>
std::uint64_t mat_hash(const Matrix<S>& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (const S& e : m.entries()) {
    auto q = static_cast<std::int64_t>(std::llround(ScalarTraits<S>::to_double(e) * 1e8));
    h ^= static_cast<std::uint64_t>(q) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

template <class S>
int find_root(const std::vector<Vec<S>>& roots, const Vec<S>& v) {
  for (std::size_t i = 0; i < roots.size(); ++i)
    if (vec_equal(roots[i], v)) return static_cast<int>(i);
  return -1;
}

template <class S>
Vec<S> negated(const Vec<S>& v) {
  Vec<S> r = v;
  for (auto& e : r) e = -e;
  return r;
}

template <class S>
Vec<S> basis_combo(int dim, std::initializer_list<std::pair<int, S>> parts) {
  Vec<S> v(dim, S(0));
  for (const auto& [i, c] : parts) v[i] += c;
  return v;
}

// Positive roots via a generic direction; negatives are discarded.
template <class S>
void select_positive(RootSystem<S>& rs) {
  rs.positive.clear();
  for (const auto& a : rs.roots) {
    double s = 0.0;
    for (int i = 0; i < rs.dim; ++i) s += ScalarTraits<S>::to_double(a[i]) * (1.0 - 1e-3 * i);
    if (std::abs(s) < 1e-9) throw RootSystemError("positive-root direction is not generic");
    if (s > 0) rs.positive.push_back(a);
  }
}

template <class S>
void assign_orbits(RootSystem<S>& rs, const std::vector<S>& k) {
  const std::size_t p = rs.positive.size();
  std::vector<int> parent(p);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  // Reflections generate the group, so orbits are already connected by them.
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < p; ++i) {
      Vec<S> img = reflect(rs.positive[j], rs.positive[i]);
      int t = find_root(rs.positive, img);
      if (t < 0) t = find_root(rs.positive, negated(img));
      if (t < 0) throw RootSystemError("root set is not closed under its reflections");
      int a = find(static_cast<int>(i)), b = find(t);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  rs.orbit.assign(p, -1);
  std::vector<int> label(p, -1);
  int next = 0;
  for (std::size_t i = 0; i < p; ++i) {
    int r = find(static_cast<int>(i));
    if (label[r] < 0) label[r] = next++;
    rs.orbit[i] = label[r];
  }
  if (k.size() != 1 && static_cast<int>(k.size()) != next)
    throw RootSystemError("expected " + std::to_string(next) + " multiplicity value(s), got " +
                          std::to_string(k.size()));
  rs.orbit_k.assign(next, k.front());
  if (k.size() > 1) rs.orbit_k = k;
  rs.k.resize(p);
  rs.gamma = S(0);
  for (std::size_t i = 0; i < p; ++i) {
    rs.k[i] = rs.orbit_k[rs.orbit[i]];
    if (ScalarTraits<S>::to_double(rs.k[i]) < 0) throw RootSystemError("multiplicities must be nonnegative");
    rs.gamma += rs.k[i];
  }
}

template <class S>
void finish(RootSystem<S>& rs, const std::vector<S>& k) {
  if (rs.dim < 1 || rs.dim > kMaxDim)
    throw RootSystemError("ambient dimension must be in [1," + std::to_string(kMaxDim) + "]");
  if (k.empty()) throw RootSystemError("multiplicity list is empty");
  select_positive(rs);
  rs.reflections.clear();
  for (const auto& a : rs.positive) rs.reflections.push_back(reflection_matrix(a));
  rs.group = generate_group(rs.reflections, rs.dim);
  assign_orbits(rs, k);
  validate(rs);
}

}  // namespace

template <class S>
std::vector<Matrix<S>> generate_group(const std::vector<Matrix<S>>& generators, int dim, std::size_t cap) {
  std::vector<Matrix<S>> elems{Matrix<S>::identity(dim)};
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> index;
  index[mat_hash(elems[0])].push_back(0);
  for (std::size_t head = 0; head < elems.size(); ++head) {
    for (const auto& g : generators) {
      Matrix<S> h = g * elems[head];
      auto& bucket = index[mat_hash(h)];
      bool seen = false;
      for (std::size_t idx : bucket)
        if (mat_equal(elems[idx], h)) {
          seen = true;
          break;
        }
      if (seen) continue;
      if (elems.size() >= cap)
        throw RootSystemError("reflection group exceeds cap of " + std::to_string(cap) + " elements");
      bucket.push_back(elems.size());
      elems.push_back(std::move(h));
    }
  }
  return elems;
}

template <class S>
RootSystem<S> build_standard(Family family, int rank, const std::vector<S>& k) {
  RootSystem<S> rs;
  rs.family = family;
  rs.rank = rank;
  if (rank < 1) throw RootSystemError("rank must be positive");
  switch (family) {
    case Family::A: {
      rs.name = "A_" + std::to_string(rank);
      if (rank == 1) {
        // A_1 lives on the line: roots +-sqrt2.
        rs.dim = 1;
        if constexpr (ScalarTraits<S>::kExact) {
          rs.roots = {{QSqrt2::sqrt2()}, {-QSqrt2::sqrt2()}};
        } else {
          rs.roots = {{std::numbers::sqrt2}, {-std::numbers::sqrt2}};
        }
        break;
      }
      rs.dim = rank + 1;
      for (int i = 0; i < rs.dim; ++i)
        for (int j = 0; j < rs.dim; ++j)
          if (i != j) rs.roots.push_back(basis_combo<S>(rs.dim, {{i, S(1)}, {j, S(-1)}}));
      break;
    }
    case Family::B:
    case Family::D: {
      if (rank < 2) throw RootSystemError("B_n and D_n need n >= 2");
      rs.name = std::string(family == Family::B ? "B_" : "D_") + std::to_string(rank);
      rs.dim = rank;
      for (int i = 0; i < rank; ++i)
        for (int j = i + 1; j < rank; ++j)
          for (int si : {1, -1})
            for (int sj : {1, -1}) rs.roots.push_back(basis_combo<S>(rank, {{i, S(si)}, {j, S(sj)}}));
      if (family == Family::B) {
        S r2;
        if constexpr (ScalarTraits<S>::kExact) {
          r2 = QSqrt2::sqrt2();
        } else {
          r2 = std::numbers::sqrt2;
        }
        for (int i = 0; i < rank; ++i) {
          rs.roots.push_back(basis_combo<S>(rank, {{i, r2}}));
          rs.roots.push_back(basis_combo<S>(rank, {{i, -r2}}));
        }
      }
      break;
    }
    case Family::I2: {
      if constexpr (ScalarTraits<S>::kExact) {
        throw RootSystemError("I2(m) is only available in floating mode");
      } else {
        rs.name = "I2(" + std::to_string(rank) + ")";
        rs.dim = 2;
        const int m = rank;
        for (int j = 0; j < 2 * m; ++j) {
          double th = std::numbers::pi * j / m;
          rs.roots.push_back({std::numbers::sqrt2 * std::cos(th), std::numbers::sqrt2 * std::sin(th)});
        }
      }
      break;
    }
    case Family::Explicit:
      throw RootSystemError("use build_explicit for explicit root lists");
  }
  finish(rs, k);
  return rs;
}

template <class S>
RootSystem<S> build_explicit(const std::vector<Vec<S>>& roots, const std::vector<S>& k) {
  if (roots.empty()) throw RootSystemError("empty root list");
  RootSystem<S> rs;
  rs.family = Family::Explicit;
  rs.name = "explicit";
  rs.dim = static_cast<int>(roots.front().size());
  for (const auto& a : roots) {
    if (static_cast<int>(a.size()) != rs.dim) throw RootSystemError("roots have inconsistent dimensions");
    if (find_root(rs.roots, a) < 0) rs.roots.push_back(a);
    Vec<S> na = negated(a);
    if (find_root(rs.roots, na) < 0) rs.roots.push_back(na);
  }
  rs.rank = rs.dim;
  finish(rs, k);
  return rs;
}

template <class S>
void validate(const RootSystem<S>& rs) {
  for (const auto& a : rs.roots) {
    if (!near_equal(dot(a, a), S(2))) throw RootSystemError("root with |alpha|^2 != 2");
    for (const auto& b : rs.roots) {
      if (vec_equal(a, b) || vec_equal(negated(a), b)) continue;
      // proportional to alpha? then <a,b>^2 == |a|^2 |b|^2 = 4
      S ab = dot(a, b);
      if (near_equal(ab * ab, S(4))) throw RootSystemError("root set contains a non-reduced multiple");
    }
    for (const auto& b : rs.roots)
      if (find_root(rs.roots, reflect(a, b)) < 0) throw RootSystemError("sigma_alpha(R) != R");
  }
  if (rs.positive.size() * 2 != rs.roots.size()) throw RootSystemError("positive subsystem is not half of R");
  for (const auto& g : rs.group)
    for (std::size_t i = 0; i < rs.positive.size(); ++i) {
      Vec<S> img = g.apply(rs.positive[i]);
      int j = find_root(rs.positive, img);
      if (j < 0) j = find_root(rs.positive, negated(img));
      if (j < 0) throw RootSystemError("group does not preserve R");
      if (!near_equal(rs.k[i], rs.k[j])) throw RootSystemError("multiplicity is not G-invariant");
    }
}

RootSystem<double> to_floating(const RootSystem<QSqrt2>& rs) {
  RootSystem<double> r;
  r.family = rs.family;
  r.rank = rs.rank;
  r.dim = rs.dim;
  r.name = rs.name;
  for (const auto& a : rs.roots) r.roots.push_back(to_double(a));
  for (const auto& a : rs.positive) r.positive.push_back(to_double(a));
  for (const auto& m : rs.reflections) r.reflections.push_back(to_double(m));
  r.orbit = rs.orbit;
  for (const auto& v : rs.orbit_k) r.orbit_k.push_back(v.to_double());
  for (const auto& v : rs.k) r.k.push_back(v.to_double());
  for (const auto& g : rs.group) r.group.push_back(to_double(g));
  r.gamma = rs.gamma.to_double();
  return r;
}

RootSystem<double> restrict_to_span(const RootSystem<double>& rs) {
  // Gram-Schmidt on the positive roots.
  std::vector<Vec<double>> basis;
  for (const auto& a : rs.positive) {
    Vec<double> v = a;
    for (const auto& b : basis) {
      const double s = dot(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= s * b[i];
    }
    const double n = std::sqrt(dot(v, v));
    if (n < 1e-9) continue;
    for (auto& e : v) e /= n;
    basis.push_back(v);
  }
  const int m = static_cast<int>(basis.size());
  auto proj = [&](const Vec<double>& x) {
    Vec<double> y(m);
    for (int i = 0; i < m; ++i) y[i] = dot(basis[i], x);
    return y;
  };
  auto conj = [&](const Matrix<double>& g) {
    Matrix<double> r(m);
    for (int j = 0; j < m; ++j) {
      Vec<double> col = proj(g.apply(basis[j]));
      for (int i = 0; i < m; ++i) r(i, j) = col[i];
    }
    return r;
  };
  RootSystem<double> r;
  r.family = rs.family;
  r.rank = rs.rank;
  r.dim = m;
  r.name = rs.dim == m ? rs.name : rs.name + "(span)";
  for (const auto& a : rs.roots) r.roots.push_back(proj(a));
  for (const auto& a : rs.positive) r.positive.push_back(proj(a));
  for (const auto& g : rs.reflections) r.reflections.push_back(conj(g));
  for (const auto& g : rs.group) r.group.push_back(conj(g));
  r.orbit = rs.orbit;
  r.orbit_k = rs.orbit_k;
  r.k = rs.k;
  r.gamma = rs.gamma;
  return r;
}

Family parse_family(const std::string& name) {
  if (name == "A") return Family::A;
  if (name == "B") return Family::B;
  if (name == "D") return Family::D;
  if (name == "I2" || name == "I") return Family::I2;
  throw RootSystemError("unknown root-system family '" + name + "'");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::A: return "A";
    case Family::B: return "B";
    case Family::D: return "D";
    case Family::I2: return "I2";
    case Family::Explicit: return "explicit";
  }
  return "?";
}

GroupTable build_group_table(const RootSystem<double>& rs) {
  GroupTable t;
  const std::size_t n = rs.group.size();
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> index;
  for (std::size_t i = 0; i < n; ++i) index[mat_hash(rs.group[i])].push_back(i);
  auto lookup = [&](const Matrix<double>& m) -> int {
    auto it = index.find(mat_hash(m));
    if (it != index.end())
      for (std::size_t i : it->second)
        if (mat_equal(rs.group[i], m)) return static_cast<int>(i);
    // bucket boundary miss: fall back to a scan
    for (std::size_t i = 0; i < n; ++i)
      if (mat_equal(rs.group[i], m)) return static_cast<int>(i);
    throw RootSystemError("group table lookup failed");
  };
  for (const auto& s : rs.reflections) {
    std::vector<int> right(n), left(n);
    for (std::size_t g = 0; g < n; ++g) {
      right[g] = lookup(rs.group[g] * s);
      left[g] = lookup(s * rs.group[g]);
    }
    t.right_mult.push_back(std::move(right));
    t.left_mult.push_back(std::move(left));
  }
  t.inverse.resize(n);
  for (std::size_t g = 0; g < n; ++g) t.inverse[g] = lookup(rs.group[g].transpose());
  return t;
}

template std::vector<Matrix<double>> generate_group(const std::vector<Matrix<double>>&, int, std::size_t);
template std::vector<Matrix<QSqrt2>> generate_group(const std::vector<Matrix<QSqrt2>>&, int, std::size_t);
template RootSystem<double> build_standard(Family, int, const std::vector<double>&);
template RootSystem<QSqrt2> build_standard(Family, int, const std::vector<QSqrt2>&);
template RootSystem<double> build_explicit(const std::vector<Vec<double>>&, const std::vector<double>&);
template RootSystem<QSqrt2> build_explicit(const std::vector<Vec<QSqrt2>>&, const std::vector<QSqrt2>&);
template void validate(const RootSystem<double>&);
template void validate(const RootSystem<QSqrt2>&);

}  // namespace dunkl
