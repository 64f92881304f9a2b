#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dunkl/report.hpp"

namespace dunkl {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitSchema = 2, kExitAudit = 3 };

const std::vector<std::string>& subcommand_names();

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  std::filesystem::path out = "out";
};

// Runs one subcommand on a parsed config and writes results.csv,
// summary.json and the subcommand's own tables into opt.out. Schema errors
// and audit failures map to their exit codes; messages go to stderr.
int run_subcommand(const std::string& name, const Json& config, const RunOptions& opt);

}  // namespace dunkl
