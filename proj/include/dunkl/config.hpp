#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dunkl/drift.hpp"
#include "dunkl/ensemble.hpp"
#include "dunkl/lattice.hpp"
#include "dunkl/report.hpp"

namespace dunkl {

// Config files that do not match the schema (exit code 2).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json load_config(const std::string& path);

// Unknown keys are schema errors; `where` names the block in messages.
void require_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where);

double get_number(const Json& obj, const std::string& key, const std::string& where, std::optional<double> fallback = {});
int get_int(const Json& obj, const std::string& key, const std::string& where, std::optional<int> fallback = {});
std::string get_string(const Json& obj, const std::string& key, const std::string& where,
                       std::optional<std::string> fallback = {});
std::vector<double> get_vector(const Json& obj, const std::string& key, const std::string& where,
                               std::optional<std::vector<double>> fallback = {});
std::vector<std::vector<double>> get_points(const Json& obj, const std::string& key, const std::string& where);
std::vector<std::string> get_strings(const Json& obj, const std::string& key, const std::string& where,
                                     std::optional<std::vector<std::string>> fallback = {});

// A number or a string such as "1/3" or "sqrt2".
QSqrt2 get_exact(const Json& v, const std::string& where);

struct SystemConfig {
  RootSystem<double> rs;
  std::optional<RootSystem<QSqrt2>> exact;
};
// {"family":"A","rank":2,"k":[...]} or {"roots":[[...]],"k":...}
SystemConfig parse_root_system(const Json& j);
// {"kind":"linear","c":1.0} or {"kind":"custom","components":["-x1", ...],
// "bounds":{"sup_diag":..,"max_offdiag":..,"max_a_alpha":..}}
DriftSpec parse_drift(const Json& j, int dim);
// SimConfig keys: dt, t_final, n_replicas, taming_cap, jump_prob_cap,
// hyperplane_guard, max_substep_depth, jump_mode, execution.
RunConfig parse_sim(const Json& j, std::uint64_t seed, double* t_final = nullptr);

struct LatticeConfig {
  LatticeSpec spec;
  int N = 1;
};
// {"d","N","family","rank","k","c","eps0","decay":{"type","delta"},"range",
//  "box_radius","window_radius"}
LatticeConfig parse_lattice(const Json& j);
Site parse_site(const Json& j, int d, const std::string& where);

}  // namespace dunkl
