#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hdgap::report {

struct QuantileCurve {
  std::vector<double> levels;
  std::vector<double> effect;
  std::vector<double> lower;
  std::vector<double> upper;
  double share_significant_negative = 0.0;
  double share_significant_positive = 0.0;
};

// Percentiles 1..99.
std::vector<double> default_grid();

// Quantiles of the individual effects. Individuals are sorted by effect and
// each carries its own band endpoints with its rank, so the band at level q
// is the band of the order statistic reported at q.
QuantileCurve quantile_curve(const Eigen::VectorXd& effects, const Eigen::VectorXd& halfwidth,
                             const std::vector<double>& grid);

}  // namespace hdgap::report
