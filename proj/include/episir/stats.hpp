#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace episir::stats {

// Kolmogorov-Smirnov distance between a sample and a reference cdf, or
// between two samples.  Inputs are copied and sorted internally.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);
double ks_statistic(std::vector<double> a, std::vector<double> b);

// P(sup_t |B(t)| > x) for the Brownian bridge: 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 x^2}.
double kolmogorov_tail(double x);

// Approximate p-values via the Stephens small-sample correction
// (sqrt(n) + 0.12 + 0.11 / sqrt(n)) d.
double ks_p_value(double d, std::size_t n);
double ks_p_value(double d, std::size_t n, std::size_t m);

// Linear-interpolation quantile of an unsorted sample (type 7).
double quantile(std::vector<double> sample, double p);

double mean(const std::vector<double>& sample);

}  // namespace episir::stats
