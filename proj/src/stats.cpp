#include "hdgap/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "hdgap/errors.hpp"

namespace hdgap::stats {

double normal_cdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal quantile requires 0 < p < 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::size_t order_statistic_index(std::size_t n, double level) {
  const auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n) - 1e-12));
  return std::clamp<std::size_t>(rank, 1, n) - 1;
}

double order_statistic_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  return sorted[order_statistic_index(sorted.size(), level)];
}

double ks_pvalue(double statistic, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double t = (sn + 0.12 + 0.11 / sn) * statistic;
  if (t < 1e-3) return 1.0;
  // Kolmogorov tail 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2)
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace hdgap::stats
