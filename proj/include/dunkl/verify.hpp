#pragma once

#include <string>
#include <vector>

#include "dunkl/ensemble.hpp"
#include "dunkl/multipoly.hpp"

namespace dunkl {

// One line of a results table.
struct CheckRow {
  std::string experiment;
  std::string system;
  std::string k;
  double c = 0.0;
  double t = 0.0;
  std::vector<double> x;
  std::string quantity;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool pass = true;
};

std::string k_label(const RootSystem<double>& rs);

// Gamma~(P_t f)(x) = sum_g |grad_k P_t (f o g)(x)|^2 by common-random-number
// central differences plus exact difference quotients of the replica values.
struct GradientEstimate {
  double t = 0.0;
  double lhs = 0.0;        // bias-corrected Gamma~(P_t f)(x)
  double rhs = 0.0;        // e^{2 eta t} P_t(Gamma~ f)(x)
  double std_error = 0.0;  // of lhs - rhs
  double lhs_std_error = 0.0;
  std::size_t n_used = 0;
  bool reliable = true;
};

// One simulated bundle serves all functions; result[f][t].
std::vector<std::vector<GradientEstimate>> estimate_gradient_bound(const ProcessModel& m, const RunConfig& rc,
                                                                   const std::vector<SmoothFunction>& fs,
                                                                   const std::vector<double>& x,
                                                                   const std::vector<double>& times, double fd_step);

struct GradientBoundOptions {
  std::vector<double> times{0.0, 0.25, 0.5, 1.0};
  double fd_step = 1e-3;
  double fd_tolerance = 1e-4;  // relative slack for the finite-difference error
};

std::vector<CheckRow> verify_gradient_bound(const ProcessModel& m, const RunConfig& rc,
                                            const std::vector<SmoothFunction>& fs,
                                            const std::vector<std::vector<double>>& probes,
                                            const GradientBoundOptions& opt);

// Closed forms for b = -c x: E X_t = exp(-c M t) x with M = I + sum k alpha
// alpha^T, and E|X_t|^2 solving m' = 2N + 4 gamma - 2 c m.
std::vector<double> mean_oracle(const RootSystem<double>& rs, double c, const std::vector<double>& x, double t);
double second_moment_oracle(const RootSystem<double>& rs, double c, const std::vector<double>& x, double t);
// Coordinate means and the second moment against the closed forms (3 sigma).
std::vector<CheckRow> verify_moments(const ProcessModel& m, const RunConfig& rc, const std::vector<double>& x,
                                     const std::vector<double>& times);

// rho(x) = |x| chi(|x|), chi smooth, 0 on [0,1], 1 on [2,inf).
struct Cutoff {
  static double chi(double r);
  static double d1(double r);
  static double d2(double r);
};
double rho(const double* x, int n);
// L rho for the linear drift -c x, radial closed form.
double generator_rho(const RootSystem<double>& rs, double c, const double* x);

struct LyapunovConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};
// C2 = c; C1 = sup (L rho + C2 rho) from a dense radial scan on [1,2] and the
// exact tail value (N + 2 gamma - 1)/2 on [2, inf).
LyapunovConstants lyapunov_constants(const RootSystem<double>& rs, double c);

// L rho <= C1 - C2 rho on a radial grid over (0, r_max); x is the worst radius.
CheckRow verify_lyapunov_pointwise(const RootSystem<double>& rs, double c, double r_max = 50.0,
                                   std::size_t n_grid = 100000);

std::vector<CheckRow> verify_lyapunov(const ProcessModel& m, const RunConfig& rc,
                                      const std::vector<std::vector<double>>& starts,
                                      const std::vector<double>& times);

// int L f dnu for polynomial f, nu = exp(-c|x|^2/2) w_k dx (N <= 2), normalised;
// scale = ||Lf|| + ||f|| in L2(nu).
struct InvariantCheck {
  std::string f;
  double integral = 0.0;
  double scale = 0.0;
  bool pass = true;
};
std::vector<InvariantCheck> check_invariance(const RootSystem<double>& rs, double c,
                                             const std::vector<std::string>& polys, double rel_tol = 1e-6);
// E_nu[f] by quadrature.
double invariant_moment(const RootSystem<double>& rs, double c, const SmoothFunction& f);

struct InvariantMeasureOptions {
  double t_final = 5.0;
  double window_start = 2.5;  // time average over [window_start, t_final]
  double window_dt = 0.25;
};
// Long-run ensemble mean and time average of each f compared with E_nu f.
std::vector<CheckRow> verify_invariant_measure(const ProcessModel& m, const RunConfig& rc,
                                               const std::vector<SmoothFunction>& fs,
                                               const std::vector<double>& start, const InvariantMeasureOptions& opt);

}  // namespace dunkl
