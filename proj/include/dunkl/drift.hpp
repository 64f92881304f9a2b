#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dunkl/multipoly.hpp"
#include "dunkl/root_system.hpp"

namespace dunkl {

// sup_x d_i b_i, max_{i!=j} sup |d_j b_i|, max_alpha sup |A_alpha b|
struct DriftBounds {
  double sup_diag = 0.0;
  double max_offdiag = 0.0;
  double max_a_alpha = 0.0;
};

enum class DriftKind { Linear, Polynomial };

class DriftSpec {
 public:
  static DriftSpec linear(double c);
  // Custom drift given by polynomial components; bounds are declared by the
  // caller and audited on probes.
  static DriftSpec polynomial(std::vector<MultiPoly<double>> components, DriftBounds declared);

  DriftKind kind() const { return kind_; }
  double c() const { return c_; }
  const std::vector<MultiPoly<double>>& components() const { return comps_; }
  std::string describe() const;

  void eval(const double* x, double* out, int dim) const;
  std::vector<double> eval(const std::vector<double>& x) const;
  double partial(int i, int j, const double* x) const;  // d_j b_i
  // Analytic for the linear drift; declared for custom drifts.
  DriftBounds bounds(const RootSystem<double>& rs) const;

 private:
  DriftKind kind_ = DriftKind::Linear;
  double c_ = 0.0;
  std::vector<MultiPoly<double>> comps_;
  std::vector<std::vector<MultiPoly<double>>> jac_;
  DriftBounds declared_;
};

// eta = sup d_i b_i + (N-1) max |d_j b_i| + sqrt2 gamma max |A_alpha b|
double eta_constant(const RootSystem<double>& rs, const DriftSpec& b);

struct AuditItem {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct HypothesisAudit {
  std::vector<AuditItem> items;
  bool ok() const;
  const AuditItem* first_failure() const;
};

// Quasi-random points in the ball of the given radius, plus points at
// distance offset from each reflecting hyperplane.
std::vector<std::vector<double>> probe_points(const RootSystem<double>& rs, std::size_t count, double radius,
                                              double wall_offset = 1e-3);
double halton(std::uint64_t index, unsigned base);

// Declared bounds, G-equivariance b(gx) = g b(x), and nonnegative jump rates.
HypothesisAudit audit_drift(const RootSystem<double>& rs, const DriftSpec& b, std::size_t n_probes = 10000,
                            double radius = 20.0);

}  // namespace dunkl
