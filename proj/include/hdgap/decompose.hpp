#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hdgap/dataprep.hpp"
#include "hdgap/dsinfer.hpp"

namespace hdgap::decompose {

using Eigen::VectorXd;

// Moderator variables entering the group regressions. An empty list is the
// unconditional specification; {"*"} selects every moderator column.
struct CovariateSet {
  std::string name;
  std::vector<std::string> variables;
};

CovariateSet unconditional();
CovariateSet full();

enum class Reference { male, female };

// Separate least-squares fits for the control group (d = 0, "m") and the
// treated group (d = 1, "f") on intercept plus the selected columns.
struct GroupRegression {
  std::vector<std::string> labels;
  VectorXd gamma_m;
  VectorXd gamma_f;
  VectorXd xbar_m;
  VectorXd xbar_f;
  std::size_t n_m = 0;
  std::size_t n_f = 0;
  std::vector<std::string> dropped_m;  // collinear columns, coefficient fixed at 0
  std::vector<std::string> dropped_f;
};

GroupRegression group_regressions(const dataprep::ModelFrame& frame, const CovariateSet& set);

struct DecompositionResult {
  std::string spec;
  Reference reference = Reference::male;
  double total_gap = 0.0;    // mean log wage of m minus f
  double explained = 0.0;    // (xbar_m - xbar_f)' gamma_ref
  double unexplained = 0.0;  // xbar_f'(gamma_m - gamma_f) for the male reference
  double ratio_conditional = 1.0;    // exp(xbar_f' gamma_f) / exp(xbar_f' gamma_m)
  double ratio_unconditional = 1.0;  // exp(mean log w_f) / exp(mean log w_m)
  GroupRegression groups;
};

DecompositionResult oaxaca_blinder(const dataprep::ModelFrame& frame, const CovariateSet& set,
                                   Reference reference = Reference::male);

double wage_ratio(const dataprep::ModelFrame& frame, const CovariateSet& set);
double unconditional_wage_ratio(const dataprep::ModelFrame& frame);

struct ReconciliationReport {
  double mean_effect_all = 0.0;     // (1/n) sum over every row of x_i' beta
  double mean_effect_treated = 0.0; // mean over treated rows only
  double negative_unexplained = 0.0;  // -xbar_f'(gamma_m - gamma_f)
  double difference_all = 0.0;
  double difference_treated = 0.0;
  bool exact_regime = false;
};

// Compares the mean heterogeneous effect with the negative unexplained gap.
// The fit must use exactly the moderators selected by `set`.
ReconciliationReport reconcile_mean_effect(const dsinfer::DoubleSelectionFit& fit,
                                           const dataprep::ModelFrame& frame,
                                           const CovariateSet& set, bool exact_regime);

}  // namespace hdgap::decompose
