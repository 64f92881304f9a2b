#include "dunkl/ensemble.hpp"

#include <cmath>
#include <stdexcept>

namespace dunkl {

std::size_t grid_steps(double t, double dt) {
  if (t < 0.0) throw std::invalid_argument("negative time");
  return static_cast<std::size_t>(std::llround(t / dt));
}

std::size_t BundleData::n_flagged() const {
  std::size_t n = 0;
  for (auto f : flagged) n += f;
  return n;
}

std::vector<double> BundleData::column(std::size_t s, std::size_t t, std::size_t o) const {
  std::vector<double> out;
  out.reserve(n_replicas);
  for (std::size_t r = 0; r < n_replicas; ++r)
    if (!flagged[r]) out.push_back(at(r, s, t, o));
  return out;
}

namespace {

std::uint64_t run_replica(const ProcessModel& m, const RunConfig& rc, const BundleSpec& spec,
                          const std::vector<std::size_t>& steps, const Observer& obs, BundleData& data,
                          std::size_t r) {
  ReplicaState st;
  std::uint64_t sub = 0;
  for (std::size_t s = 0; s < spec.starts.size(); ++s) {
    CounterStream rng(rc.seed, static_cast<std::uint32_t>(r), rc.stream);
    st.reset(m, spec.starts[s].data(), rc.params.jump_mode);
    std::size_t done = 0;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      for (; done < steps[t]; ++done) advance(m, rc.params, st, nullptr, rng, static_cast<std::uint32_t>(done));
      if (st.flagged) break;
      obs(st, s, t, &data.at(r, s, t, 0));
    }
    if (st.flagged) data.flagged[r] = 1;
    sub += st.substeps;
  }
  return sub;
}

}  // namespace

BundleData simulate_bundle(const ProcessModel& m, const RunConfig& rc, const BundleSpec& spec, const Observer& obs) {
  for (const auto& x : spec.starts)
    if (static_cast<int>(x.size()) != m.dim()) throw std::invalid_argument("start point has wrong dimension");
  std::vector<std::size_t> steps;
  for (double t : spec.times) {
    steps.push_back(grid_steps(t, rc.params.dt));
    if (!steps.empty() && steps.size() > 1 && steps.back() < steps[steps.size() - 2])
      throw std::invalid_argument("times must be nondecreasing");
  }
  BundleData data;
  data.n_replicas = rc.n_replicas;
  data.n_starts = spec.starts.size();
  data.n_times = spec.times.size();
  data.n_outputs = spec.n_outputs;
  data.values.assign(data.n_replicas * data.n_starts * data.n_times * data.n_outputs, 0.0);
  data.flagged.assign(data.n_replicas, 0);
  const auto n = static_cast<std::int64_t>(rc.n_replicas);
  std::uint64_t sub = 0;
  if (rc.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : sub)
    for (std::int64_t r = 0; r < n; ++r) sub += run_replica(m, rc, spec, steps, obs, data, static_cast<std::size_t>(r));
  } else {
    for (std::int64_t r = 0; r < n; ++r) sub += run_replica(m, rc, spec, steps, obs, data, static_cast<std::size_t>(r));
  }
  data.substeps = sub;
  return data;
}

std::vector<EnsembleEstimate> estimate_Pt(const ProcessModel& m, const RunConfig& rc, const SmoothFunction& f,
                                          const std::vector<double>& x, const std::vector<double>& times) {
  BundleSpec spec{{x}, times, 1};
  BundleData d = simulate_bundle(m, rc, spec, [&](const ReplicaState& s, std::size_t, std::size_t, double* out) {
    out[0] = conditional_expectation(m, s, f);
  });
  std::vector<EnsembleEstimate> out;
  for (std::size_t t = 0; t < times.size(); ++t) {
    MeanSe ms = mean_se(d.column(0, t, 0));
    EnsembleEstimate e;
    e.t = times[t];
    e.mean = ms.mean;
    e.std_error = ms.std_error;
    e.n_used = ms.n;
    e.n_flagged = d.n_flagged();
    e.reliable = d.reliable();
    out.push_back(e);
  }
  return out;
}

}  // namespace dunkl
