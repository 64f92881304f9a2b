#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dunkl {

// Pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> v);

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

MeanSe mean_se(std::span<const double> v);

// Weighted least squares y = a + b t with known standard errors.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
};

LineFit weighted_line_fit(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& se);

}  // namespace dunkl
