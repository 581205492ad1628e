#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace hdgap::bootstrap {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Multiplier { normal, mammen };

struct BootstrapConfig {
  int replications = 1000;
  std::uint64_t seed = 20160101;
  double level = 0.95;
  Multiplier multiplier = Multiplier::normal;
  int threads = 1;
};

void validate(const BootstrapConfig& cfg);

struct JointTestResult {
  double statistic = 0.0;       // sup_j sqrt(n) |beta_j| / sigma_j
  double critical_value = 0.0;  // level-quantile of the bootstrap sup-t
  double p_value = 1.0;
  double cv_coefficients = 0.0;
  std::optional<double> cv_profile;
  std::vector<Index> excluded_targets;  // zero-variance scores
  int replications = 0;
};

// Influence rows psi_i = sqrt(dof_scale) * [M^{-1} g_i e_i]_targets with
// M = G'G / n, so that (1/n) sum psi_i psi_i' is the robust covariance block.
MatrixXd score_matrix(const MatrixXd& design, const VectorXd& residuals,
                      const MatrixXd& bread_inverse, const std::vector<Index>& targets,
                      double dof_scale = 1.0);

// Sup-t multiplier bootstrap for the joint test over the score columns.
// When `profile_x` is given the same draws also calibrate the sup over
// individual effects x_i' beta (cv_profile).
JointTestResult multiplier_bootstrap(const MatrixXd& scores, const VectorXd& estimates,
                                     const BootstrapConfig& cfg,
                                     const MatrixXd* profile_x = nullptr);

double simultaneous_profile_cv(const MatrixXd& scores, const MatrixXd& x,
                               const BootstrapConfig& cfg);

// Raw draws of the coefficient sup-t statistic, in replication order.
std::vector<double> sup_t_draws(const MatrixXd& scores, const BootstrapConfig& cfg);

}  // namespace hdgap::bootstrap
