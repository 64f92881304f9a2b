#include "dunkl/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace dunkl {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

MeanSe mean_se(std::span<const double> v) {
  MeanSe r;
  r.n = v.size();
  if (r.n == 0) return r;
  r.mean = pairwise_sum(v) / static_cast<double>(r.n);
  if (r.n < 2) return r;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - r.mean) * (v[i] - r.mean);
  const double var = pairwise_sum(sq) / static_cast<double>(r.n - 1);
  r.std_error = std::sqrt(var / static_cast<double>(r.n));
  return r;
}

LineFit weighted_line_fit(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& se) {
  if (t.size() != y.size() || t.size() != se.size() || t.size() < 2)
    throw std::invalid_argument("line fit needs at least two matching points");
  double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = se[i] > 0.0 ? 1.0 / (se[i] * se[i]) : 1e300;
    sw += w;
    st += w * t[i];
    sy += w * y[i];
    stt += w * t[i] * t[i];
    sty += w * t[i] * y[i];
  }
  const double det = sw * stt - st * st;
  if (det <= 0.0) throw std::invalid_argument("degenerate line fit");
  LineFit f;
  f.slope = (sw * sty - st * sy) / det;
  f.intercept = (stt * sy - st * sty) / det;
  f.slope_se = std::sqrt(sw / det);
  return f;
}

}  // namespace dunkl
