#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dunkl/process.hpp"
#include "dunkl/stats.hpp"

namespace dunkl {

enum class Execution { Serial, Parallel };

// Replicas started from several points with common random numbers: for a
// given replica every start uses the same noise.
struct BundleSpec {
  std::vector<std::vector<double>> starts;
  std::vector<double> times;  // snapped to the dt grid
  std::size_t n_outputs = 1;
};

struct BundleData {
  std::size_t n_replicas = 0, n_starts = 0, n_times = 0, n_outputs = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> flagged;  // per replica, any start
  std::uint64_t substeps = 0;

  double& at(std::size_t r, std::size_t s, std::size_t t, std::size_t o) {
    return values[((r * n_starts + s) * n_times + t) * n_outputs + o];
  }
  double at(std::size_t r, std::size_t s, std::size_t t, std::size_t o) const {
    return values[((r * n_starts + s) * n_times + t) * n_outputs + o];
  }
  std::size_t n_flagged() const;
  bool reliable() const { return n_flagged() * 100 <= n_replicas; }
  // Per-replica values of one quantity over unflagged replicas.
  std::vector<double> column(std::size_t s, std::size_t t, std::size_t o) const;
};

using Observer = std::function<void(const ReplicaState&, std::size_t start, std::size_t time, double* out)>;

struct RunConfig {
  SimParams params;
  std::size_t n_replicas = 10000;
  std::uint64_t seed = 1;
  std::uint32_t stream = 0;
  Execution execution = Execution::Parallel;
};

BundleData simulate_bundle(const ProcessModel& m, const RunConfig& rc, const BundleSpec& spec, const Observer& obs);

struct EnsembleEstimate {
  double t = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_used = 0;
  std::size_t n_flagged = 0;
  bool reliable = true;
};

// P_t f(x) at each requested time.
std::vector<EnsembleEstimate> estimate_Pt(const ProcessModel& m, const RunConfig& rc, const SmoothFunction& f,
                                          const std::vector<double>& x, const std::vector<double>& times);

std::size_t grid_steps(double t, double dt);

}  // namespace dunkl
