#include <cmath>

#include "doctest.h"
#include "hdgap/bootstrap.hpp"
#include "hdgap/dsinfer.hpp"
#include "hdgap/errors.hpp"
#include "hdgap/stats.hpp"
#include "hdgap/synth.hpp"
#include "test_util.hpp"

using namespace hdgap;
using namespace hdgap::bootstrap;
using hdgap::testing::gaussian_matrix;
using hdgap::testing::phi;

namespace {

BootstrapConfig config(int reps, std::uint64_t seed = 42) {
  BootstrapConfig c;
  c.replications = reps;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("score identities on a double-selection refit") {
  synth::DgpSpec spec;
  spec.n = 400;
  spec.p1 = 3;
  spec.p2 = 30;
  spec.noise = synth::NoiseKind::heteroscedastic;
  spec.seed = 5;
  const auto gen = synth::generate(spec);
  const auto fit = dsinfer::double_selection(gen.frame, dsinfer::DoubleSelectionConfig{});
  const double n = static_cast<double>(fit.n);
  const MatrixXd cov = fit.scores.transpose() * fit.scores / n;
  CHECK((cov - fit.omega).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.scores.colwise().sum().cwiseAbs().maxCoeff() < 1e-8 * n);
}

TEST_CASE("scalar least-squares scores") {
  const Index n = 50;
  const MatrixXd x = gaussian_matrix(n, 1, 7);
  const VectorXd y = 2.0 * x.col(0) + hdgap::testing::gaussian_vector(n, 8);
  const double b = x.col(0).dot(y) / x.col(0).squaredNorm();
  const VectorXd e = y - b * x.col(0);
  const MatrixXd bread = MatrixXd::Constant(1, 1, 1.0 / (x.col(0).squaredNorm() / n));
  const MatrixXd psi = score_matrix(x, e, bread, {0});
  const double mean_sq = x.col(0).squaredNorm() / n;
  for (Index i = 0; i < n; ++i) CHECK(psi(i, 0) == doctest::Approx(x(i, 0) * e(i) / mean_sq).epsilon(1e-12));
}

TEST_CASE("critical value for one target approaches the normal quantile") {
  const MatrixXd scores = gaussian_matrix(500, 1, 9);
  const auto res = multiplier_bootstrap(scores, VectorXd::Zero(1), config(10000));
  CHECK(std::abs(res.cv_coefficients - 1.959963984540054) < 0.05);
  CHECK(res.p_value == 1.0);
}

TEST_CASE("critical value for two independent targets") {
  // (2 Phi(c) - 1)^2 = 0.95, solved by bisection
  double lo = 1.0, hi = 4.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = std::pow(2.0 * phi(mid) - 1.0, 2.0);
    (f < 0.95 ? lo : hi) = mid;
  }
  CHECK(lo == doctest::Approx(2.2364766445575874).epsilon(1e-9));
  const MatrixXd scores = gaussian_matrix(5000, 2, 10);
  const auto res = multiplier_bootstrap(scores, VectorXd::Zero(2), config(10000));
  CHECK(std::abs(res.cv_coefficients - lo) < 0.05);
}

TEST_CASE("mammen multipliers give the same scalar limit") {
  const MatrixXd scores = gaussian_matrix(2000, 1, 12);
  auto cfg = config(10000);
  cfg.multiplier = Multiplier::mammen;
  const auto res = multiplier_bootstrap(scores, VectorXd::Zero(1), cfg);
  CHECK(std::abs(res.cv_coefficients - 1.96) < 0.08);
}

TEST_CASE("determinism") {
  const MatrixXd scores = gaussian_matrix(300, 4, 13);
  const VectorXd est = VectorXd::LinSpaced(4, -0.1, 0.1);
  const MatrixXd x = gaussian_matrix(300, 4, 14);
  auto cfg = config(1000, 777);
  const auto a = multiplier_bootstrap(scores, est, cfg, &x);
  const auto b = multiplier_bootstrap(scores, est, cfg, &x);
  cfg.threads = 4;
  const auto c = multiplier_bootstrap(scores, est, cfg, &x);
  CHECK(a.cv_coefficients == b.cv_coefficients);
  CHECK(a.cv_coefficients == c.cv_coefficients);
  CHECK(a.p_value == c.p_value);
  CHECK(*a.cv_profile == *c.cv_profile);
  CHECK(sup_t_draws(scores, config(300, 1)) == sup_t_draws(scores, [] { auto k = config(300, 1); k.threads = 3; return k; }()));
  const auto other = multiplier_bootstrap(scores, est, config(1000, 778));
  CHECK(other.cv_coefficients != a.cv_coefficients);
}

TEST_CASE("critical value is monotone in the level") {
  const MatrixXd scores = gaussian_matrix(300, 5, 15);
  auto cfg = config(2000);
  const double cv95 = multiplier_bootstrap(scores, VectorXd::Zero(5), cfg).cv_coefficients;
  cfg.level = 0.99;
  const double cv99 = multiplier_bootstrap(scores, VectorXd::Zero(5), cfg).cv_coefficients;
  CHECK(cv99 >= cv95);
}

TEST_CASE("rescaling the scores leaves the inference unchanged") {
  const MatrixXd scores = gaussian_matrix(300, 3, 16);
  const VectorXd est(Eigen::Vector3d(0.02, -0.15, 0.05));
  const auto a = multiplier_bootstrap(scores, est, config(1000));
  // estimates scale with the scores so the studentized statistic is unchanged
  const auto b = multiplier_bootstrap(8.0 * scores, 8.0 * est, config(1000));
  CHECK(b.cv_coefficients == doctest::Approx(a.cv_coefficients).epsilon(1e-12));
  CHECK(b.p_value == a.p_value);
  CHECK(b.statistic == doctest::Approx(a.statistic).epsilon(1e-12));
  CHECK(a.p_value >= 0.0);
  CHECK(a.p_value <= 1.0);
}

TEST_CASE("zero-variance targets are excluded from the sup") {
  MatrixXd scores = gaussian_matrix(200, 3, 17);
  scores.col(1).setZero();
  const auto res = multiplier_bootstrap(scores, VectorXd::Ones(3), config(500));
  CHECK(res.excluded_targets == std::vector<Index>{1});
  CHECK(std::isfinite(res.statistic));
  CHECK(res.cv_coefficients > 0.0);
}

TEST_CASE("profile critical values") {
  const MatrixXd scores = gaussian_matrix(400, 3, 18);
  SUBCASE("identical rows reduce to one point") {
    const MatrixXd x = Eigen::RowVector3d(1.0, 0.5, -0.25).replicate(400, 1);
    const double cv = simultaneous_profile_cv(scores, x, config(10000));
    CHECK(std::abs(cv - 1.96) < 0.05);
  }
  SUBCASE("superset of rows never lowers the critical value") {
    const MatrixXd x = gaussian_matrix(400, 3, 19);
    const double all = simultaneous_profile_cv(scores, x, config(2000));
    const double some = simultaneous_profile_cv(scores, x.topRows(50), config(2000));
    CHECK(all >= some);
    const auto joint = multiplier_bootstrap(scores, VectorXd::Zero(3), config(2000), &x);
    CHECK(*joint.cv_profile == all);
  }
  SUBCASE("zero rows are skipped") {
    MatrixXd x = gaussian_matrix(20, 3, 20);
    x.row(3).setZero();
    CHECK(std::isfinite(simultaneous_profile_cv(scores, x, config(200))));
  }
}

TEST_CASE("configuration validation") {
  auto cfg = config(0);
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = config(100);
  cfg.level = 1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}
