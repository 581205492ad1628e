#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "hdgap/errors.hpp"

namespace hdgap::lasso {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Weighted lasso problem
///
///   min_b (1/n) |y - W b|^2 + (lambda/n) sum_j psi_j |b_j|
///
/// over the penalized columns. A column flagged unpenalized that is constant
/// and nonzero acts as the intercept: the solver then centers every column.
struct Problem {
  Problem(const MatrixXd& w, const VectorXd& y, std::vector<bool> penalize);
  Problem(MatrixXd&&, const VectorXd&, std::vector<bool>) = delete;
  Problem(const MatrixXd&, VectorXd&&, std::vector<bool>) = delete;

  const MatrixXd& w;
  const VectorXd& y;
  std::vector<bool> penalize;

  Index rows() const { return w.rows(); }
  Index cols() const { return w.cols(); }
  Index penalized_count() const;
  // Index of the intercept column, if any.
  std::optional<Index> intercept() const { return intercept_; }

 private:
  std::optional<Index> intercept_;
};

struct PenaltyConfig {
  double c = 1.1;
  // Tail probability; defaults to 0.1 / log(n).
  std::optional<double> gamma;
  // Fixes lambda, bypassing the rule (lambda = 0 gives least squares).
  std::optional<double> lambda;
  int refinements = 2;
  double refine_tol = 1e-4;
};

struct PenaltyLoadings {
  VectorXd psi;  // zero on unpenalized columns
  double lambda = 0.0;
  double c = 1.1;
  double gamma = 0.0;
  int iterations = 0;
  bool fallback = false;  // residuals were zero; column norms used instead
};

struct SolverOptions {
  double tol = 1e-7;
  int max_sweeps = 10000;
  bool record_objective = false;
};

struct SolverReport {
  int sweeps = 0;
  double kkt_violation = 0.0;
  Index support_size = 0;
  std::vector<double> objective_trace;
};

struct Fit {
  VectorXd coefficients;
  // Nonzero penalized coefficients plus every unpenalized column, ascending.
  std::vector<Index> support;
  double objective = 0.0;
  double lambda = 0.0;
  VectorXd psi;
  std::optional<VectorXd> post;
  SolverReport report;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(VectorXd last_iterate, double kkt, int sweeps);
  const VectorXd& last_iterate() const { return last_; }
  double kkt_violation() const { return kkt_; }

 private:
  VectorXd last_;
  double kkt_;
};

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double default_gamma(Index n);

// lambda = 2 c sqrt(n) Phi^{-1}(1 - gamma / (2p))
double compute_penalty(Index n, Index p, double c, double gamma);

// psi_j = sqrt((1/n) sum_i w_ij^2 e_i^2), evaluated on the columns as given.
VectorXd loadings_from_residuals(const MatrixXd& w, const VectorXd& residuals);

// One pass of the loading rule. Without a previous fit the residuals are
// y - mean(y) (or y when the problem has no intercept).
PenaltyLoadings estimate_loadings(const Problem& prob, const PenaltyConfig& cfg,
                                  const Fit* previous = nullptr);

Fit fit_lasso(const Problem& prob, const PenaltyLoadings& loads,
              const SolverOptions& opts = {});

// Loadings from the initial residuals, then `cfg.refinements` refits with
// loadings re-estimated from lasso residuals.
Fit fit_with_iterated_loadings(const Problem& prob, const PenaltyConfig& cfg,
                               const SolverOptions& opts = {},
                               PenaltyLoadings* final_loads = nullptr);

// Least squares restricted to fit.support; result stored in `post`.
Fit post_lasso_refit(const Problem& prob, const Fit& fit);

double objective(const Problem& prob, const VectorXd& coef, double lambda,
                 const VectorXd& psi);

// Largest violation of the optimality conditions, on the (1/n) gradient scale.
double kkt_violation(const Problem& prob, const VectorXd& coef, double lambda,
                     const VectorXd& psi);

}  // namespace hdgap::lasso
