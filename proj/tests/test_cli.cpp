#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dunkl/config.hpp"
#include "dunkl/experiments.hpp"

using namespace dunkl;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dunkl_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& cmd, const char* json, const fs::path& out, std::optional<std::uint64_t> seed = {}) {
  RunOptions opt;
  opt.out = out;
  opt.seed = seed;
  return run_subcommand(cmd, Json::parse(json), opt);
}

const char* kLattice =
    R"j("lattice":{"d":1,"N":1,"family":"A","rank":1,"k":0.25,"c":1.0,"eps0":0.1,"decay":{"type":"summable","delta":1.0},"range":2,"box_radius":3,"window_radius":4})j";
}  // namespace

TEST_CASE("results header is written even without rows") {
  const fs::path p = scratch("empty") / "results.csv";
  write_results_csv(p, {});
  CHECK(slurp(p) == "experiment,system,k,c,t,x,quantity,estimate,std_error,bound,margin,pass\n");
}

TEST_CASE("reruns are byte-identical") {
  const char* cfg =
      R"j({"root_system":{"family":"A","rank":1,"k":0.25},"sim":{"n_replicas":200,"t_final":0.5},"times":[0.25,0.5],"functions":["tanh(x1)"]})j";
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  CHECK(run("fd-sim", cfg, a) == kExitPass);
  CHECK(run("fd-sim", cfg, b) == kExitPass);
  for (const char* f : {"results.csv", "summary.json"}) CHECK(slurp(a / f) == slurp(b / f));
  const auto c = scratch("rerun_c");
  run("fd-sim", cfg, c, 99);
  CHECK(slurp(a / "results.csv") != slurp(c / "results.csv"));
  const Json s = Json::parse(slurp(c / "summary.json"));
  CHECK(s.at("seeds").at("seed") == 99);
  CHECK(s.at("status") == "pass");
}

TEST_CASE("summary keys are sorted") {
  const auto o = scratch("sorted");
  run("calculus-check", R"j({"root_system":{"family":"A","rank":1,"k":0.25},"n_cases":5})j", o);
  const std::string text = slurp(o / "summary.json");
  CHECK(text.find("\"config\"") < text.find("\"experiment\""));
  CHECK(text.find("\"experiment\"") < text.find("\"versions\""));
  const Json ids = Json::parse(slurp(o / "identities.json"));
  CHECK(ids.size() == 6);
  for (const auto& r : ids) CHECK(r.at("max_abs_residual") == 0.0);
}

TEST_CASE("schema violations exit with 2") {
  const auto o = scratch("schema");
  CHECK(run("fd-sim", R"j({"root_system":{"family":"A","rank":1,"k":0.25},"bogus":1})j", o) == kExitSchema);
  CHECK(run("fd-sim", R"j({"root_system":{"family":"Q","rank":1,"k":0.25}})j", o) == kExitSchema);
  CHECK(run("fd-sim", R"j({"root_system":{"family":"A","rank":1,"k":0.25},"sim":{"dt":-1}})j", o) == kExitSchema);
  CHECK(run("lyapunov", R"j({"root_system":{"family":"A","rank":1,"k":0.25},"starts":[[1,2]]})j", o) == kExitSchema);
  CHECK(run("cauchy", R"j({"sim":{}})j", o) == kExitSchema);
  CHECK(run("fd-sim", R"j({"root_system":{"family":"A","rank":1,"k":0.25},"seed":-3})j", o) == kExitSchema);
}

TEST_CASE("hypothesis failures exit with 3 and still report") {
  const auto o = scratch("audit");
  const std::string cfg = std::string("{") + kLattice + "}";
  std::string bad = cfg;
  bad.replace(bad.find("\"eps0\":0.1"), 10, "\"eps0\":5.0");
  CHECK(run("lattice-sim", bad.c_str(), o) == kExitAudit);
  const Json s = Json::parse(slurp(o / "summary.json"));
  CHECK(s.at("status") == "fail");
  CHECK(s.at("hypotheses").at(0).at("status") == "fail");
  CHECK(slurp(o / "results.csv") == "experiment,system,k,c,t,x,quantity,estimate,std_error,bound,margin,pass\n");
}

TEST_CASE("lattice subcommands write their tables") {
  const auto o = scratch("lattice");
  const std::string cfg = std::string("{") + kLattice +
                          R"j(,"sim":{"n_replicas":40},"omega":{"fill":[0.5]},"omega_prime":{"fill":[-1.0]},"times":[0,0.5]})j";
  const int rc = run("ergodicity", cfg.c_str(), o);
  CHECK(rc != kExitSchema);
  CHECK(rc != kExitAudit);
  CHECK(slurp(o / "ergodicity.csv").rfind("t,delta,std_error\n", 0) == 0);
}

TEST_CASE("coercivity outside the regime is reported as exploratory") {
  const auto o = scratch("exploratory");
  const int rc = run("gradient-bound",
                     R"j({"root_system":{"family":"A","rank":1,"k":0.75},"sim":{"n_replicas":100},"times":[0,0.25],"probe_count":1})j",
                     o);
  CHECK(rc == kExitPass);
  const Json s = Json::parse(slurp(o / "summary.json"));
  CHECK(s.at("status") == "inconclusive");
  CHECK(s.at("exploratory") == true);
}
