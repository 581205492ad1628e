#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hdgap {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LeastSquares {
  VectorXd coefficients;
  VectorXd residuals;
  Index rank = 0;
  bool rank_deficient = false;
};

// Least squares via complete orthogonal decomposition; returns the
// minimum-norm solution when `a` is rank deficient.
LeastSquares least_squares(const MatrixXd& a, const VectorXd& y);

// Greedy column screening in the given visiting order. A column is kept when
// its component orthogonal to the already-kept columns has norm above
// rel_tol times its own norm. Output lists are in visiting order.
struct ColumnScreen {
  std::vector<Index> kept;
  std::vector<Index> dropped;
};

ColumnScreen screen_collinear(const MatrixXd& a, const std::vector<Index>& order,
                              double rel_tol = 1e-8);

MatrixXd select_columns(const MatrixXd& a, const std::vector<Index>& columns);

}  // namespace hdgap
