#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hdgap/bootstrap.hpp"
#include "hdgap/dataprep.hpp"
#include "hdgap/dsinfer.hpp"
#include "hdgap/lasso.hpp"

namespace hdgap::synth {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class NoiseKind { homoscedastic, heteroscedastic };

/// Linear DGP  y = z'delta + (x'beta) d + eps  with
///   z = (1, g_1, ..., g_{p2-1}),  g ~ N(0, Toeplitz(rho^|j-k|)),
///   x = (1, g_1, ..., g_{p1-1}),
///   d ~ Bernoulli(logistic(propensity_intercept + z'propensity)),
///   eps ~ N(0, sigma^2) or N(0, sigma^2 g_1^2) (heteroscedastic).
/// delta_true(0) is the intercept alpha.
struct DgpSpec {
  std::size_t n = 500;
  std::size_t p1 = 5;
  std::size_t p2 = 50;
  VectorXd beta_true;   // length p1 (zero if empty)
  VectorXd delta_true;  // length p2 (zero if empty)
  NoiseKind noise = NoiseKind::homoscedastic;
  double sigma = 1.0;
  double rho = 0.5;
  double propensity_intercept = 0.0;
  VectorXd propensity;  // length p2 (zero if empty)
  std::uint64_t seed = 1;
};

void validate(const DgpSpec& spec);

struct Truth {
  VectorXd beta;
  VectorXd delta;
  VectorXd effects;  // x_i' beta per row
};

struct Generated {
  dataprep::ModelFrame frame;
  Truth truth;
};

// RNG: Philox4x32-10 keyed by spec.seed, consumed row by row.
Generated generate(const DgpSpec& spec);

// Proximal-gradient minimizer of the weighted lasso objective. Test oracle
// only; `step` <= 0 selects 1/L with L the gradient Lipschitz constant.
VectorXd prox_oracle(const lasso::Problem& prob, const lasso::PenaltyLoadings& loads,
                     long iterations, double step = 0.0);

enum class Estimator { double_selection, single_selection };

struct MonteCarloSpec {
  DgpSpec dgp;
  int replications = 200;
  Estimator estimator = Estimator::double_selection;
  dsinfer::DoubleSelectionConfig fit;
  bootstrap::BootstrapConfig bootstrap;
  bool profile_bands = true;
  int threads = 1;
};

struct MonteCarloTable {
  int replications = 0;
  int failures = 0;
  std::vector<double> coverage;  // pointwise intervals, per target
  std::vector<double> coverage_se;
  double joint_rejection = 0.0;
  double joint_rejection_se = 0.0;
  double profile_coverage = 0.0;  // simultaneous band covers every x_i' beta
  double profile_coverage_se = 0.0;
  std::vector<double> p_values;                // per successful replication
  std::vector<std::vector<double>> t_stats;    // [target][replication]
  std::vector<double> mean_union_size;
};

// Replication r uses DGP seed derive_seed(dgp.seed, r) and bootstrap seed
// derive_seed(bootstrap.seed, r); results do not depend on `threads`.
MonteCarloTable monte_carlo(const MonteCarloSpec& spec);

double binomial_se(double rate, int count);

// ACS-shaped sample with 16 substantive variables plus filter metadata.
std::string acs_like_csv(std::size_t rows, std::uint64_t seed);

// Schema for acs_like_csv with 19 moderator columns that, together with
// exper_sq from acs_like_derived, encode to 20 initial regressors.
std::vector<dataprep::ColumnSchema> acs_like_schema();
std::vector<dataprep::DerivedRule> acs_like_derived();

}  // namespace hdgap::synth
