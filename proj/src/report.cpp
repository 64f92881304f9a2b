#include "dunkl/report.hpp"

#include <boost/version.hpp>
#include <cmath>
#include <fstream>
#include <gmp.h>
#include <limits>

namespace dunkl {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    default:
      return "inconclusive";
  }
}

void write_table_csv(const std::filesystem::path& path, const Table& t) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << csv_field(t.header[i]);
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(r[i]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_results_csv(const std::filesystem::path& path, const std::vector<CheckRow>& rows) {
  Table t;
  t.header = {"experiment", "system", "k", "c", "t", "x", "quantity", "estimate", "std_error", "bound", "margin",
              "pass"};
  for (const auto& r : rows) {
    std::string x;
    for (std::size_t i = 0; i < r.x.size(); ++i) x += (i ? ";" : "") + format_double(r.x[i]);
    t.rows.push_back({r.experiment, r.system, r.k, format_double(r.c), format_double(r.t), x, r.quantity,
                      format_double(r.estimate), format_double(r.std_error), format_double(r.bound),
                      format_double(r.margin), r.pass ? "true" : "false"});
  }
  write_table_csv(path, t);
}

Json json_number(double v) {
  if (!std::isfinite(v)) return format_double(v);
  return v;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Json checklist_json(const std::vector<ChecklistItem>& items) {
  Json a = Json::array();
  for (const auto& it : items) a.push_back({{"item", it.item}, {"status", it.status}, {"detail", it.detail}});
  return a;
}

bool checklist_failed(const std::vector<ChecklistItem>& items) {
  for (const auto& it : items)
    if (it.status == "fail") return true;
  return false;
}

std::vector<ChecklistItem> drift_checklist(const RootSystem<double>& rs, const DriftSpec& b, std::size_t n_probes) {
  std::vector<ChecklistItem> out;
  const HypothesisAudit audit = audit_drift(rs, b, n_probes);
  for (const auto& a : audit.items) {
    std::string name = a.name;
    if (a.name == "nonnegative jump rates") name = "gamma_tilde_condition";
    if (a.name == "drift G-equivariance") name = "g_condition";
    if (a.name == "drift derivative bounds") name = "drift_bounds";
    out.push_back({name, a.passed ? "pass" : "fail", a.detail});
  }
  const double eta = eta_constant(rs, b);
  out.push_back({"eta_negative", eta < 0.0 ? "pass" : "warn",
                 "eta = " + format_double(eta) + (eta < 0.0 ? "" : "; outside the coercive regime, exploratory")});
  out.push_back({"gamma_below_half", rs.gamma < 0.5 ? "pass" : "warn",
                 "gamma = " + format_double(rs.gamma) + (rs.gamma < 0.5 ? "" : "; exploratory")});
  return out;
}

Json versions_json() {
  Json v;
  v["dunkl_lab"] = "1.0.0";
  v["gmp"] = gmp_version;
  v["boost"] = BOOST_LIB_VERSION;
  v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
              std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  v["compiler"] = __VERSION__;
  return v;
}

Verdict rows_verdict(const std::vector<CheckRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return Verdict::Fail;
  return Verdict::Pass;
}

double min_margin(const std::vector<CheckRow>& rows) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (std::isfinite(r.margin)) m = std::min(m, r.margin);
  return m;
}

}  // namespace dunkl
