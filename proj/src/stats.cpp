#include "episir/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace episir::stats {

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = double(sample.size());
  double d = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max(std::abs(f - double(i) / n),
                             std::abs(f - double(i + 1) / n)));
  }
  return d;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::abs(double(ia) / a.size() - double(ib) / b.size()));
  }
  return d;
}

double kolmogorov_tail(double x) {
  if (x <= 0) return 1.0;
  double acc = 0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    acc += (j % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * acc, 0.0, 1.0);
}

double ks_p_value(double d, std::size_t n) {
  const double rn = std::sqrt(double(n));
  return kolmogorov_tail(d * (rn + 0.12 + 0.11 / rn));
}

double ks_p_value(double d, std::size_t n, std::size_t m) {
  const double ne = double(n) * double(m) / double(n + m);
  const double rn = std::sqrt(ne);
  return kolmogorov_tail(d * (rn + 0.12 + 0.11 / rn));
}

double quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  if (p < 0 || p > 1) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(sample.begin(), sample.end());
  const double h = (sample.size() - 1) * p;
  const std::size_t lo = std::size_t(h);
  if (lo + 1 >= sample.size()) return sample.back();
  return sample[lo] + (h - lo) * (sample[lo + 1] - sample[lo]);
}

double mean(const std::vector<double>& sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  return std::accumulate(sample.begin(), sample.end(), 0.0) / sample.size();
}

}  // namespace episir::stats
