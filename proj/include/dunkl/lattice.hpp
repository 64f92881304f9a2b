#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dunkl/drift.hpp"
#include "dunkl/ensemble.hpp"
#include "dunkl/verify.hpp"

namespace dunkl {

inline constexpr int kMaxLatticeDim = 3;
using Site = std::array<int, kMaxLatticeDim>;

int l1_distance(const Site& a, const Site& b);
int l1_norm(const Site& a);
// Sites of the cube {|l|_inf <= r} in Z^d, lexicographic order.
std::vector<Site> cube(int d, int r);
// Counter-stream id of a site; site 0 maps to stream 0.
std::uint32_t site_stream(const Site& s);
std::string site_label(const Site& s, int d);

struct LatticeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DecayType { Summable, Uniform };

// Default coupled model: b^(l)(w) = -c w_l and
// e^(l)(w) = eps_l u(w_l) mean_{0<d(j,l)<R} v(|w_j|^2), u(x) = x/(1+|x|^2),
// v(s) = 1/(1+s), eps_l = eps0 (1+|l|)^{-(d+delta)} or eps0.
struct LatticeSpec {
  int d = 1;
  RootSystem<double> rs;
  std::optional<RootSystem<QSqrt2>> exact;  // for the exact audits
  double c = 1.0;
  double eps0 = 0.0;
  DecayType decay = DecayType::Summable;
  double delta = 1.0;
  int range = 2;
  int box_radius = 6;
  int window_radius = 10;
  bool allow_uniform = false;

  double eps(const Site& l) const;
  int n_neighbours() const;  // #{j : 0 < d(j,l) < R}
  std::vector<Site> neighbour_offsets() const;
  // d(l, Lambda) < R for the cube Lambda of the given radius
  int min_window(int box) const { return box + range - 1; }
};

LatticeSpec build_default_model(int d, RootSystem<double> rs, std::optional<RootSystem<QSqrt2>> exact, double c,
                                double eps0, DecayType decay, double delta, int range, int box_radius,
                                int window_radius, bool allow_uniform = false);

// e^(l) for a configuration given as a map site -> point. Works for any
// scalar with + - * / (double or QSqrt2).
template <class S, class Lookup>
Vec<S> default_interaction(const LatticeSpec& spec, const Site& l, const S& eps_l, const Lookup& omega) {
  const Vec<S>& x = omega(l);
  S r2(0);
  for (const auto& v : x) r2 += v * v;
  const auto offs = spec.neighbour_offsets();
  S mean(1);
  if (!offs.empty()) {
    S acc(0);
    for (const auto& o : offs) {
      Site j = l;
      for (int a = 0; a < spec.d; ++a) j[a] += o[a];
      const Vec<S>& y = omega(j);
      S s(0);
      for (const auto& v : y) s += v * v;
      acc += S(1) / (S(1) + s);
    }
    mean = acc / S(static_cast<int>(offs.size()));
  }
  const S scale = eps_l * mean / (S(1) + r2);
  Vec<S> e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) e[i] = scale * x[i];
  return e;
}

// Exact audits on the default family: stencil (e^(l) ignores sites at
// distance >= R), equivariance e^(l) o g^(l) = g e^(l) and locality
// e^(lbar) o g^(l) = e^(lbar). Rational probes and exact group elements.
HypothesisAudit audit_lattice_exact(const LatticeSpec& spec, std::size_t n_probes = 200, std::uint64_t seed = 7);
// Floating probes: the same three items plus nonnegative site jump rates
// with b + e.
HypothesisAudit audit_lattice_probes(const LatticeSpec& spec, std::size_t n_probes = 1000, std::uint64_t seed = 7);

// Propagation constants for the truncation Lambda = cube(box_radius).
struct PropagationConstants {
  double eta = 0.0;            // per-site drift constant (same at every site)
  double young = 0.0;          // free parameter of 2xy <= e x^2 + y^2/e
  double sum_e_max = 0.0;      // max_l sum_j E_{l,j}
  double eta_tilde = 0.0;      // sup_l
  double c_tilde = 0.0;        // sup_l C_l
  double tau = 1.0;
  double sigma = 0.0;          // +inf when C = 0
  bool coercive = false;       // eta < 0
  bool ergodic_regime = false; // eta_tilde < 0 and C_tilde <= -2 eta_tilde
  double zeta = 0.0;           // sum over the window of ||e^(l)||_inf
};

// E_{l,j}: sup of the first derivatives and difference quotients in w_l of e^(j).
double interaction_bound(const LatticeSpec& spec, const Site& l, const Site& j);

enum class YoungChoice { FiniteSpeed, Ergodicity };
// FiniteSpeed: young close to the largest value keeping eta_tilde < 0, tau
// = max(1, n_min / s). Ergodicity: young maximising -2 eta_tilde - C_tilde.
PropagationConstants compute_constants(const LatticeSpec& spec, YoungChoice choice, double n_min = 1.0,
                                       double s = 1.0);
double sigma_from_tau(double c_tilde, double tau);
int propagation_count(const LatticeSpec& spec, const Site& l, const std::vector<Site>& support);

// Configurations are stored per window site, N coordinates each.
struct Window {
  int d = 1;
  int box_radius = 0;
  int radius = 0;
  std::vector<Site> sites;
  std::vector<std::uint8_t> in_box;
  std::vector<std::vector<int>> neighbours;  // window indices
  int index(const Site& s) const;            // -1 when outside
};
Window make_window(const LatticeSpec& spec, int box_radius, int window_radius);

// A cylinder function: f reads the listed sites, coordinates concatenated.
struct LatticeObservable {
  std::vector<Site> sites;
  SmoothFunction f;
};
LatticeObservable site_observable(const std::string& text, int N, const Site& site = Site{});

using LatticeObserver = std::function<void(const std::vector<ReplicaState>&, std::size_t start, std::size_t time,
                                           double* out)>;
// Replicas of the truncated dynamics on the window; site l uses the counter
// stream site_stream(l), so with eps0 = 0 each site reproduces a single-site
// run exactly. starts: window configurations (|W| * N values).
BundleData simulate_window(const LatticeSpec& spec, const ProcessModel& m, const Window& w, const RunConfig& rc,
                           const std::vector<std::vector<double>>& starts, const std::vector<double>& times,
                           std::size_t n_outputs, const LatticeObserver& obs);
// E[f | chamber paths] using the product of the per-site reflection laws.
double lattice_expectation(const ProcessModel& m, const Window& w, const std::vector<ReplicaState>& states,
                           const LatticeObservable& f);

// Quasi-random window configurations with |w_l| <= radius, off the walls.
std::vector<std::vector<double>> lattice_probes(const LatticeSpec& spec, const Window& w, std::size_t count,
                                                double radius, std::uint64_t seed = 11);

struct LatticeSimRow {
  double t;
  double estimate;
  double std_error;
};
std::vector<LatticeSimRow> lattice_estimate(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                                            const LatticeObservable& f, const std::vector<double>& start,
                                            const std::vector<double>& times);

struct FiniteSpeedRow {
  Site site{};
  int distance = 0;
  int n_l = 0;
  double gamma_tilde = 0.0;  // bias-corrected, probe-sup
  double std_error = 0.0;
  double envelope = 0.0;
  bool significant = false;  // above 3 std errors and the roundoff floor
  double floor = 0.0;        // finite-difference roundoff floor
  double upper = 0.0;        // reported bound when not significant
};
struct FiniteSpeedReport {
  std::vector<FiniteSpeedRow> rows;
  PropagationConstants constants;
  double source_sup = 0.0;  // sum_j ||Gamma~^(j) f||_probe-sup
  double ratio = 0.0;       // fitted geometric ratio per unit N_l
  double ratio_upper = 0.0; // ratio at +3 sigma
  bool decreasing = false;
  bool below_envelope = false;
  bool conclusive = false;
  bool pass = false;
};
FiniteSpeedReport finite_speed_test(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                                    const LatticeObservable& f, const std::vector<Site>& sites, double s,
                                    const std::vector<std::vector<double>>& probes, double fd_step,
                                    std::size_t n_envelope_probes = 32);

struct CauchyRow {
  int radius_from = 0, radius_to = 0;
  int n_tilde = 0;
  double difference = 0.0;  // D_n, max over probes
  double std_error = 0.0;
  bool exact_zero = false;
};
struct CauchyReport {
  std::vector<CauchyRow> rows;
  double slope = 0.0, slope_se = 0.0;
  bool decreasing = false;
  bool conclusive = false;
  bool pass = false;
};
// D_n from the pathwise tangent of switching on the shell between
// consecutive boxes (common random numbers, midpoint in the switch).
CauchyReport cauchy_test(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                         const LatticeObservable& f, double t, const std::vector<int>& radii,
                         const std::vector<std::vector<double>>& probes_by_site);

struct ErgodicityRow {
  double t;
  double delta;
  double std_error;
};
struct ErgodicityReport {
  std::vector<ErgodicityRow> rows;
  PropagationConstants constants;
  double rate = 0.0, rate_se = 0.0;
  bool identical = false;
  bool conclusive = false;
  bool pass = false;
};
// starts are full windows for the box of spec.box_radius.
ErgodicityReport ergodicity_test(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                                 const LatticeObservable& f, const std::vector<double>& omega,
                                 const std::vector<double>& omega_prime, const std::vector<double>& times);

struct InfiniteLyapunovReport {
  LyapunovConstants constants;
  double weight_sum = 0.0;
  HypothesisAudit audit;
  std::vector<CheckRow> rows;
};
// rho = sum_l a_l rho_l with a_l = (1+|l|)^{-(d+1)} over the window.
InfiniteLyapunovReport infinite_lyapunov_check(const LatticeSpec& spec, const ProcessModel& m, const RunConfig& rc,
                                               const std::vector<std::vector<double>>& starts,
                                               const std::vector<double>& times, std::size_t n_audit_probes = 1000);

// Window configuration from sparse site values; other sites get `fill`.
std::vector<double> window_config(const LatticeSpec& spec, const Window& w,
                                  const std::vector<std::pair<Site, std::vector<double>>>& values,
                                  const std::vector<double>& fill);

}  // namespace dunkl
