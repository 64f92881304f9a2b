#pragma once

#include <array>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "dunkl/drift.hpp"
#include "dunkl/dual.hpp"
#include "dunkl/pointwise.hpp"
#include "dunkl/rng.hpp"
#include "dunkl/root_system.hpp"

namespace dunkl {

using Point = std::array<double, kMaxDim>;

// Averaged: the chamber path is simulated and the law of the reflection
// count (an element of G) is propagated exactly along it. Sampled: the
// reflections are drawn, giving genuine point trajectories.
enum class JumpMode { Averaged, Sampled };

struct SimParams {
  double dt = 1e-3;
  double taming_cap = 1.0;       // max explicit drift displacement per step
  double jump_prob_cap = 0.1;    // non-nearest walls: substep when rate*dt exceeds this
  double hyperplane_guard = 1e-6;
  int max_substep_depth = 12;
  JumpMode jump_mode = JumpMode::Averaged;
};

// Immutable description of the Dunkl process with drift b.
class ProcessModel {
 public:
  ProcessModel(RootSystem<double> rs, DriftSpec drift);

  const RootSystem<double>& system() const { return rs_; }
  const DriftSpec& drift() const { return drift_; }
  const GroupTable& table() const { return table_; }
  int dim() const { return rs_.dim; }
  std::size_t group_order() const { return rs_.group.size(); }
  std::size_t num_active() const { return active_.size(); }

  // Roots with k > 0, stored flat.
  struct ActiveRoot {
    Point alpha{};
    double k = 0.0;
    int index = 0;  // into system().positive
  };
  const std::vector<ActiveRoot>& active() const { return active_; }
  // g x for group element g
  void act(std::size_t g, const double* x, double* out) const;

 private:
  RootSystem<double> rs_;
  DriftSpec drift_;
  GroupTable table_;
  std::vector<ActiveRoot> active_;
  std::vector<double> group_flat_;
};

// State of one replica: the chamber point x (never reflected) and either a
// probability vector over G or one sampled group element. The physical
// position is g x. With T = Dual the state carries a tangent direction.
template <class T>
struct BasicReplicaState {
  std::array<T, kMaxDim> x{};
  std::vector<T> weights;
  int element = 0;
  bool flagged = false;
  std::uint32_t substeps = 0;

  void reset(const ProcessModel& m, const double* start, JumpMode mode) {
    x.fill(T(0.0));
    for (int i = 0; i < m.dim(); ++i) x[i] = T(start[i]);
    element = 0;
    flagged = false;
    substeps = 0;
    if (mode == JumpMode::Averaged) {
      weights.assign(m.group_order(), T(0.0));
      weights[0] = T(1.0);
    } else {
      weights.clear();
    }
  }
};
using ReplicaState = BasicReplicaState<double>;
using TangentState = BasicReplicaState<Dual>;

// Advances one grid step. extra_drift (may be null) is added to b and held
// fixed over the step. The stream is positioned by the step index. The Dual
// instantiation differentiates the step pathwise at fixed random numbers and
// needs a linear drift.
template <class T>
void advance(const ProcessModel& m, const SimParams& p, BasicReplicaState<T>& s,
             const std::type_identity_t<T>* extra_drift, CounterStream& rng, std::uint32_t step);
extern template void advance<double>(const ProcessModel&, const SimParams&, ReplicaState&, const double*,
                                     CounterStream&, std::uint32_t);
extern template void advance<Dual>(const ProcessModel&, const SimParams&, TangentState&, const Dual*, CounterStream&,
                                   std::uint32_t);

// Stateless step on points: start from x as its own chamber point, return
// the physical position after one step with sampled reflections.
std::vector<double> step_point(const ProcessModel& m, const SimParams& p, const std::vector<double>& x,
                               CounterStream& rng, std::uint32_t step);

// Conditional expectation of f at the current state given the chamber path.
double conditional_expectation(const ProcessModel& m, const ReplicaState& s, const SmoothFunction& f);
// Physical position for a sampled state.
void physical_position(const ProcessModel& m, const ReplicaState& s, double* out);

}  // namespace dunkl
