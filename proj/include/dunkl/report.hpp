#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dunkl/drift.hpp"
#include "dunkl/verify.hpp"

namespace dunkl {

using Json = nlohmann::json;  // std::map objects: keys are written sorted

enum class Verdict { Pass, Fail, Inconclusive };
std::string verdict_name(Verdict v);

// Results table with the fixed column set; x is written as "x1;x2;...".
void write_results_csv(const std::filesystem::path& path, const std::vector<CheckRow>& rows);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
void write_table_csv(const std::filesystem::path& path, const Table& t);

// Floats go through format_double; non-finite values become strings.
Json json_number(double v);
void write_json(const std::filesystem::path& path, const Json& j);

// Hypothesis checklist entry: status is pass, fail, warn or not_applicable.
struct ChecklistItem {
  std::string item;
  std::string status;
  std::string detail;
};
Json checklist_json(const std::vector<ChecklistItem>& items);
bool checklist_failed(const std::vector<ChecklistItem>& items);

// Gamma~-condition, g-condition and declared bounds from the drift audit,
// then the eta sign and gamma < 1/2 (warnings: exploratory regime).
std::vector<ChecklistItem> drift_checklist(const RootSystem<double>& rs, const DriftSpec& b, std::size_t n_probes);

Json versions_json();

// Worst margin over rows, verdict from the pass flags.
Verdict rows_verdict(const std::vector<CheckRow>& rows);
double min_margin(const std::vector<CheckRow>& rows);

}  // namespace dunkl
