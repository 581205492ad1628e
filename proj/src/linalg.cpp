#include "hdgap/linalg.hpp"

#include <cmath>

namespace hdgap {

LeastSquares least_squares(const MatrixXd& a, const VectorXd& y) {
  LeastSquares out;
  if (a.cols() == 0) {
    out.coefficients = VectorXd(0);
    out.residuals = y;
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(a);
  out.coefficients = cod.solve(y);
  out.residuals = y - a * out.coefficients;
  out.rank = cod.rank();
  out.rank_deficient = out.rank < a.cols();
  return out;
}

ColumnScreen screen_collinear(const MatrixXd& a, const std::vector<Index>& order,
                              double rel_tol) {
  ColumnScreen out;
  MatrixXd basis(a.rows(), static_cast<Index>(order.size()));
  Index filled = 0;
  for (Index j : order) {
    VectorXd v = a.col(j);
    const double norm0 = v.norm();
    if (norm0 == 0.0) {
      out.dropped.push_back(j);
      continue;
    }
    // two passes of modified Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < filled; ++k) v -= basis.col(k).dot(v) * basis.col(k);
    }
    const double norm1 = v.norm();
    if (norm1 <= rel_tol * norm0) {
      out.dropped.push_back(j);
      continue;
    }
    basis.col(filled++) = v / norm1;
    out.kept.push_back(j);
  }
  return out;
}

MatrixXd select_columns(const MatrixXd& a, const std::vector<Index>& columns) {
  MatrixXd out(a.rows(), static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) out.col(static_cast<Index>(k)) = a.col(columns[k]);
  return out;
}

}  // namespace hdgap
