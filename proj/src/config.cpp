#include "dunkl/config.hpp"

#include <fstream>

namespace dunkl {

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config " + path);
  try {
    Json j = Json::parse(in);
    if (!j.is_object()) throw SchemaError("config must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
}

void require_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw SchemaError(where + ": unknown key \"" + k + "\"");
}

namespace {

const Json* find(const Json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

[[noreturn]] void missing(const std::string& key, const std::string& where) {
  throw SchemaError(where + ": missing key \"" + key + "\"");
}

double as_number(const Json& v, const std::string& what) {
  if (!v.is_number()) throw SchemaError(what + ": expected a number");
  return v.get<double>();
}

}  // namespace

double get_number(const Json& obj, const std::string& key, const std::string& where, std::optional<double> fallback) {
  const Json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    missing(key, where);
  }
  return as_number(*v, where + "." + key);
}

int get_int(const Json& obj, const std::string& key, const std::string& where, std::optional<int> fallback) {
  const Json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    missing(key, where);
  }
  if (!v->is_number_integer()) throw SchemaError(where + "." + key + ": expected an integer");
  return v->get<int>();
}

std::string get_string(const Json& obj, const std::string& key, const std::string& where,
                       std::optional<std::string> fallback) {
  const Json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    missing(key, where);
  }
  if (!v->is_string()) throw SchemaError(where + "." + key + ": expected a string");
  return v->get<std::string>();
}

std::vector<double> get_vector(const Json& obj, const std::string& key, const std::string& where,
                               std::optional<std::vector<double>> fallback) {
  const Json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    missing(key, where);
  }
  if (!v->is_array()) throw SchemaError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) out.push_back(as_number(e, where + "." + key));
  return out;
}

std::vector<std::vector<double>> get_points(const Json& obj, const std::string& key, const std::string& where) {
  const Json* v = find(obj, key);
  if (!v) missing(key, where);
  if (!v->is_array()) throw SchemaError(where + "." + key + ": expected an array of points");
  std::vector<std::vector<double>> out;
  for (const auto& p : *v) {
    if (!p.is_array()) throw SchemaError(where + "." + key + ": expected an array of points");
    std::vector<double> x;
    for (const auto& e : p) x.push_back(as_number(e, where + "." + key));
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<std::string> get_strings(const Json& obj, const std::string& key, const std::string& where,
                                     std::optional<std::vector<std::string>> fallback) {
  const Json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    missing(key, where);
  }
  if (!v->is_array()) throw SchemaError(where + "." + key + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : *v) {
    if (!e.is_string()) throw SchemaError(where + "." + key + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

QSqrt2 get_exact(const Json& v, const std::string& where) {
  if (v.is_number_integer()) return QSqrt2(v.get<long>());
  if (v.is_number()) return QSqrt2::from_double(v.get<double>());
  if (v.is_string()) {
    try {
      return QSqrt2::parse(v.get<std::string>());
    } catch (const std::exception& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  throw SchemaError(where + ": expected a number or a numeric string");
}

namespace {

std::vector<QSqrt2> parse_k(const Json& j, const std::string& where) {
  if (j.is_array()) {
    std::vector<QSqrt2> out;
    for (const auto& e : j) out.push_back(get_exact(e, where));
    if (out.empty()) throw SchemaError(where + ": empty multiplicity list");
    return out;
  }
  return {get_exact(j, where)};
}

std::vector<double> to_doubles(const std::vector<QSqrt2>& v) {
  std::vector<double> out;
  for (const auto& e : v) out.push_back(e.to_double());
  return out;
}

SystemConfig build_system(const Json& j, const std::string& where) {
  const Json* kj = find(j, "k");
  if (!kj) missing("k", where);
  const std::vector<QSqrt2> k = parse_k(*kj, where + ".k");
  for (const auto& v : k)
    if (v.sign() < 0) throw SchemaError(where + ".k: multiplicities must be nonnegative");
  SystemConfig sc;
  try {
    if (find(j, "roots")) {
      const Json& rj = j.at("roots");
      if (!rj.is_array() || rj.empty()) throw SchemaError(where + ".roots: expected a nonempty array");
      std::vector<Vec<QSqrt2>> roots;
      std::vector<Vec<double>> froots;
      for (const auto& r : rj) {
        if (!r.is_array()) throw SchemaError(where + ".roots: expected arrays of coordinates");
        Vec<QSqrt2> v;
        Vec<double> fv;
        for (const auto& e : r) {
          v.push_back(get_exact(e, where + ".roots"));
          fv.push_back(v.back().to_double());
        }
        roots.push_back(v);
        froots.push_back(fv);
      }
      try {
        sc.exact = build_explicit<QSqrt2>(roots, k);
        sc.rs = to_floating(*sc.exact);
      } catch (const RootSystemError&) {
        // entries that are not exact in Q(sqrt2): floating mode
        sc.exact.reset();
        sc.rs = build_explicit<double>(froots, to_doubles(k));
      }
    } else {
      const Family fam = parse_family(get_string(j, "family", where));
      const int rank = get_int(j, "rank", where);
      if (fam == Family::I2) {
        sc.rs = build_standard<double>(fam, rank, to_doubles(k));
      } else {
        sc.exact = build_standard<QSqrt2>(fam, rank, k);
        sc.rs = to_floating(*sc.exact);
      }
    }
  } catch (const RootSystemError& e) {
    throw SchemaError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where + ": " + e.what());
  }
  return sc;
}

}  // namespace

SystemConfig parse_root_system(const Json& j) {
  require_keys(j, {"family", "rank", "roots", "k"}, "root_system");
  if (find(j, "roots") && (find(j, "family") || find(j, "rank")))
    throw SchemaError("root_system: give either family/rank or roots");
  return build_system(j, "root_system");
}

DriftSpec parse_drift(const Json& j, int dim) {
  if (!j.is_object()) throw SchemaError("drift: expected an object");
  const std::string kind = get_string(j, "kind", "drift");
  if (kind == "linear") {
    require_keys(j, {"kind", "c"}, "drift");
    const double c = get_number(j, "c", "drift");
    if (!(c > 0.0)) throw SchemaError("drift.c must be positive");
    return DriftSpec::linear(c);
  }
  if (kind == "custom") {
    require_keys(j, {"kind", "components", "bounds"}, "drift");
    const auto comps = get_strings(j, "components", "drift");
    if (static_cast<int>(comps.size()) != dim) throw SchemaError("drift.components: one polynomial per coordinate");
    std::vector<MultiPoly<double>> polys;
    for (const auto& s : comps) {
      try {
        polys.push_back(parse_polynomial<double>(s, dim));
      } catch (const std::exception& e) {
        throw SchemaError(std::string("drift.components: ") + e.what());
      }
    }
    if (!find(j, "bounds")) missing("bounds", "drift");
    const Json& b = j.at("bounds");
    require_keys(b, {"sup_diag", "max_offdiag", "max_a_alpha"}, "drift.bounds");
    DriftBounds db;
    db.sup_diag = get_number(b, "sup_diag", "drift.bounds");
    db.max_offdiag = get_number(b, "max_offdiag", "drift.bounds");
    db.max_a_alpha = get_number(b, "max_a_alpha", "drift.bounds");
    return DriftSpec::polynomial(std::move(polys), db);
  }
  throw SchemaError("drift.kind must be \"linear\" or \"custom\"");
}

RunConfig parse_sim(const Json& j, std::uint64_t seed, double* t_final) {
  RunConfig rc;
  rc.seed = seed;
  if (j.is_null()) return rc;
  require_keys(j,
               {"dt", "t_final", "n_replicas", "taming_cap", "jump_prob_cap", "hyperplane_guard", "max_substep_depth",
                "jump_mode", "execution"},
               "sim");
  SimParams& p = rc.params;
  p.dt = get_number(j, "dt", "sim", p.dt);
  p.taming_cap = get_number(j, "taming_cap", "sim", p.taming_cap);
  p.jump_prob_cap = get_number(j, "jump_prob_cap", "sim", p.jump_prob_cap);
  p.hyperplane_guard = get_number(j, "hyperplane_guard", "sim", p.hyperplane_guard);
  p.max_substep_depth = get_int(j, "max_substep_depth", "sim", p.max_substep_depth);
  if (!(p.dt > 0.0)) throw SchemaError("sim.dt must be positive");
  if (!(p.jump_prob_cap > 0.0 && p.jump_prob_cap <= 0.5)) throw SchemaError("sim.jump_prob_cap must lie in (0, 0.5]");
  if (!(p.taming_cap > 0.0)) throw SchemaError("sim.taming_cap must be positive");
  if (!(p.hyperplane_guard >= 0.0)) throw SchemaError("sim.hyperplane_guard must be nonnegative");
  const int n = get_int(j, "n_replicas", "sim", static_cast<int>(rc.n_replicas));
  if (n < 2) throw SchemaError("sim.n_replicas must be at least 2");
  rc.n_replicas = static_cast<std::size_t>(n);
  const std::string mode = get_string(j, "jump_mode", "sim", "averaged");
  if (mode == "averaged") {
    p.jump_mode = JumpMode::Averaged;
  } else if (mode == "sampled") {
    p.jump_mode = JumpMode::Sampled;
  } else {
    throw SchemaError("sim.jump_mode must be \"averaged\" or \"sampled\"");
  }
  const std::string ex = get_string(j, "execution", "sim", "parallel");
  if (ex == "parallel") {
    rc.execution = Execution::Parallel;
  } else if (ex == "serial") {
    rc.execution = Execution::Serial;
  } else {
    throw SchemaError("sim.execution must be \"parallel\" or \"serial\"");
  }
  if (t_final) {
    *t_final = get_number(j, "t_final", "sim", *t_final);
    if (!(*t_final >= 0.0)) throw SchemaError("sim.t_final must be nonnegative");
  }
  return rc;
}

LatticeConfig parse_lattice(const Json& j) {
  const std::string w = "lattice";
  require_keys(j,
               {"d", "N", "family", "rank", "roots", "k", "c", "eps0", "decay", "range", "box_radius", "window_radius",
                "allow_uniform"},
               w);
  LatticeConfig lc;
  const int d = get_int(j, "d", w);
  if (d < 1 || d > kMaxLatticeDim) throw SchemaError("lattice.d must be 1, 2 or 3");
  const SystemConfig sc = build_system(j, w);
  lc.N = get_int(j, "N", w, sc.rs.dim);
  if (lc.N != sc.rs.dim)
    throw SchemaError("lattice.N = " + std::to_string(lc.N) + " does not match the root system dimension " +
                      std::to_string(sc.rs.dim));
  const double c = get_number(j, "c", w);
  if (!(c > 0.0)) throw SchemaError("lattice.c must be positive");
  const double eps0 = get_number(j, "eps0", w);
  if (!(eps0 >= 0.0)) throw SchemaError("lattice.eps0 must be nonnegative");
  DecayType decay = DecayType::Summable;
  double delta = 1.0;
  if (find(j, "decay")) {
    const Json& dj = j.at("decay");
    require_keys(dj, {"type", "delta"}, "lattice.decay");
    const std::string type = get_string(dj, "type", "lattice.decay");
    if (type == "summable") {
      delta = get_number(dj, "delta", "lattice.decay", 1.0);
      if (!(delta > 0.0)) throw SchemaError("lattice.decay.delta must be positive");
    } else if (type == "uniform") {
      decay = DecayType::Uniform;
    } else {
      throw SchemaError("lattice.decay.type must be \"summable\" or \"uniform\"");
    }
  }
  const int range = get_int(j, "range", w, 2);
  if (range < 1) throw SchemaError("lattice.range must be >= 1");
  const int box = get_int(j, "box_radius", w, 6);
  if (box < 0) throw SchemaError("lattice.box_radius must be >= 0");
  const int win = get_int(j, "window_radius", w, box + range - 1);
  if (win < box + range - 1)
    throw SchemaError("lattice.window_radius must be >= box_radius + range - 1 = " + std::to_string(box + range - 1));
  bool allow_uniform = false;
  if (find(j, "allow_uniform")) {
    if (!j.at("allow_uniform").is_boolean()) throw SchemaError("lattice.allow_uniform: expected a boolean");
    allow_uniform = j.at("allow_uniform").get<bool>();
  }
  // Remaining rejections (eps0 > c, non-summable amplitudes) are hypothesis
  // failures and surface as LatticeError.
  lc.spec = build_default_model(d, sc.rs, sc.exact, c, eps0, decay, delta, range, box, win, allow_uniform);
  return lc;
}

Site parse_site(const Json& j, int d, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw SchemaError(where + ": a site is an array of " + std::to_string(d) + " integers");
  Site s{};
  for (int a = 0; a < d; ++a) {
    if (!j[a].is_number_integer()) throw SchemaError(where + ": site coordinates must be integers");
    s[a] = j[a].get<int>();
  }
  return s;
}

}  // namespace dunkl
