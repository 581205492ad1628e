#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hdgap/bootstrap.hpp"
#include "hdgap/dataprep.hpp"
#include "hdgap/lasso.hpp"
#include "hdgap/quantile_curve.hpp"

namespace hdgap::dsinfer {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DoubleSelectionConfig {
  lasso::PenaltyConfig penalty;
  lasso::SolverOptions solver;
  // The target d * 1 (treatment main effect) is a candidate control in the
  // auxiliary regressions; it is unpenalized there unless this is set.
  bool penalize_treatment_main_effect = false;
  double collinearity_tol = 1e-8;
  int threads = 1;
};

struct RegressionDiagnostics {
  std::string name;
  double lambda = 0.0;
  int sweeps = 0;
  double kkt_violation = 0.0;
  Index support_size = 0;
};

struct RobustCovariance {
  MatrixXd omega;          // asymptotic covariance of sqrt(n)(beta - beta0), target block
  MatrixXd bread_inverse;  // (G'G / n)^{-1}
  double condition_number = 0.0;
  double dof_scale = 1.0;  // HC1 factor n / (n - k)
};

// HC1 sandwich M^{-1} S M^{-1} * n/(n-k) over design G, restricted to `targets`.
RobustCovariance robust_vcov(const MatrixXd& design, const VectorXd& residuals,
                             const std::vector<Index>& targets);

struct DoubleSelectionFit {
  std::size_t n = 0;
  VectorXd beta;                        // p1 targets
  MatrixXd omega;                       // asymptotic covariance (Omega)
  MatrixXd vcov;                        // Omega / n on the coefficient scale
  VectorXd se;                          // sqrt(diag(vcov))
  std::vector<Index> outcome_support;   // into Z
  std::vector<std::vector<Index>> per_target_supports;  // into Z
  std::vector<Index> union_support;     // into Z, ascending
  std::vector<Index> dropped_controls;  // collinear at refit
  std::vector<Index> refit_controls;    // into Z
  VectorXd control_coefficients;        // delta on refit_controls
  Index refit_n_params = 0;
  MatrixXd scores;                      // n x p1 influence rows
  VectorXd residuals;
  std::vector<RegressionDiagnostics> diagnostics;
};

// Outcome lasso of y on Z, one auxiliary lasso of each d*x_j on Z and the
// other targets, then least squares of y on all targets plus the union of
// selected controls.
DoubleSelectionFit double_selection(const dataprep::ModelFrame& frame,
                                    const DoubleSelectionConfig& cfg);

// Outcome lasso only (no auxiliary regressions); the naive comparator.
DoubleSelectionFit single_selection(const dataprep::ModelFrame& frame,
                                    const DoubleSelectionConfig& cfg);

// Refit of y on all targets plus the given controls (Z indices).
DoubleSelectionFit refit_on_controls(const dataprep::ModelFrame& frame,
                                     std::vector<Index> controls, double collinearity_tol = 1e-8);

struct EffectProfile {
  VectorXd effects;             // x_i' beta
  VectorXd se_pointwise;        // sqrt(x_i' vcov x_i)
  VectorXd band_halfwidth;      // cv * se
  VectorXd pointwise_halfwidth; // z_{(1+level)/2} * se
  double critical_value = 0.0;  // cv actually applied
  std::vector<bool> significant_negative;
  std::vector<bool> significant_positive;
  report::QuantileCurve quantiles;
};

// `cv` is floored at the pointwise normal quantile so the simultaneous band
// always contains the pointwise band.
EffectProfile effect_profile(const DoubleSelectionFit& fit, const MatrixXd& x, double cv,
                             double level = 0.95,
                             const std::vector<double>& grid = report::default_grid());

struct EffectRow {
  std::string label;
  double estimate = 0.0;
  double se = 0.0;
  double pointwise_low = 0.0;
  double pointwise_high = 0.0;
  double simultaneous_low = 0.0;
  double simultaneous_high = 0.0;
  bool significant = false;  // simultaneous interval excludes zero
};

std::vector<EffectRow> marginal_effects_table(const DoubleSelectionFit& fit,
                                              const std::vector<std::string>& labels,
                                              double cv_coefficients, double level = 0.95);

}  // namespace hdgap::dsinfer
