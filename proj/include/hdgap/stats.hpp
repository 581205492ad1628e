#pragma once

#include <span>
#include <vector>

namespace hdgap::stats {

double normal_cdf(double x);
double normal_quantile(double p);

// Inverse-ECDF quantile (the order statistic at rank ceil(level * n)).
// `sorted` must be ascending and nonempty.
double order_statistic_quantile(std::span<const double> sorted, double level);

// Rank index (0-based) used by order_statistic_quantile.
std::size_t order_statistic_index(std::size_t n, double level);

// One-sample Kolmogorov-Smirnov statistic sup|F_n - F| for a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf);

// Asymptotic p-value P(sqrt(n) D > t) with the Stephens small-sample
// adjustment t = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * D.
double ks_pvalue(double statistic, std::size_t n);

}  // namespace hdgap::stats

#include <algorithm>
#include <cmath>

namespace hdgap::stats {

template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace hdgap::stats
