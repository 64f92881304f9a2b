// Serial reference path against the OpenMP path on the same workloads.
// Both must agree bit for bit; only the wall time may differ.
#include <chrono>
#include <cstdio>
#include <functional>
#include <omp.h>

#include "dunkl/config.hpp"
#include "dunkl/lattice.hpp"

using namespace dunkl;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same(const std::vector<EnsembleEstimate>& a, const std::vector<EnsembleEstimate>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].mean != b[i].mean || a[i].std_error != b[i].std_error) return false;
  return a.size() == b.size();
}

bool same(const std::vector<LatticeSimRow>& a, const std::vector<LatticeSimRow>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].estimate != b[i].estimate || a[i].std_error != b[i].std_error) return false;
  return a.size() == b.size();
}

template <class Run>
bool compare(const char* name, Run run) {
  decltype(run(Execution::Serial)) serial, parallel;
  const double ts = seconds([&] { serial = run(Execution::Serial); });
  const double tp = seconds([&] { parallel = run(Execution::Parallel); });
  const bool ok = same(serial, parallel);
  std::printf("%-28s serial %8.3f s  parallel %8.3f s  speedup %5.2f  %s\n", name, ts, tp, ts / tp,
              ok ? "bit-identical" : "MISMATCH");
  return ok;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  bool ok = true;

  const auto sys = parse_root_system(Json{{"family", "A"}, {"rank", 2}, {"k", 0.25}});
  const ProcessModel a2(restrict_to_span(sys.rs), DriftSpec::linear(1.0));
  ok &= compare("A_2 plane, 20000 replicas", [&](Execution e) {
    RunConfig rc;
    rc.n_replicas = 20000;
    rc.execution = e;
    return estimate_Pt(a2, rc, parse_observable("x1^2", 2), {1.0, 0.5}, {0.5, 1.0});
  });

  const LatticeConfig lc = parse_lattice(Json::parse(
      R"({"d":1,"N":1,"family":"A","rank":1,"k":0.25,"c":1.0,"eps0":0.1,"decay":{"type":"summable","delta":1.0},"range":2,"box_radius":6,"window_radius":7})"));
  const ProcessModel a1(lc.spec.rs, DriftSpec::linear(lc.spec.c));
  const Window w = make_window(lc.spec, lc.spec.box_radius, lc.spec.window_radius);
  const auto start = window_config(lc.spec, w, {}, {0.7});
  const auto f = site_observable("tanh(x1)", 1, Site{});
  ok &= compare("lattice d=1, 500 replicas", [&](Execution e) {
    RunConfig rc;
    rc.n_replicas = 500;
    rc.execution = e;
    return lattice_estimate(lc.spec, a1, rc, f, start, {0.5, 1.0});
  });
  return ok ? 0 : 1;
}
