#include "hdgap/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "hdgap/errors.hpp"
#include "hdgap/log.hpp"
#include "hdgap/parallel.hpp"
#include "hdgap/random.hpp"
#include "hdgap/stats.hpp"

namespace hdgap::bootstrap {
namespace {

// Replications are processed in fixed-size blocks so that the arithmetic
// (and hence every statistic) is independent of the thread count.
constexpr int kBlock = 64;

void fill_multipliers(Eigen::Ref<VectorXd> xi, std::uint64_t seed, std::uint64_t rep,
                      Multiplier law) {
  Philox rng(derive_seed(seed, rep));
  if (law == Multiplier::normal) {
    for (Index i = 0; i < xi.size(); ++i) xi(i) = rng.normal();
    return;
  }
  const double s5 = std::sqrt(5.0);
  const double low = -(s5 - 1.0) / 2.0;
  const double high = (s5 + 1.0) / 2.0;
  const double p_low = (s5 + 1.0) / (2.0 * s5);
  for (Index i = 0; i < xi.size(); ++i) xi(i) = rng.uniform() < p_low ? low : high;
}

struct Draws {
  std::vector<double> coef;
  std::vector<double> profile;
};

Draws draw(const MatrixXd& scores, const VectorXd& sigma, const std::vector<bool>& use,
           const BootstrapConfig& cfg, const MatrixXd* profile_x, const VectorXd* profile_sd) {
  const Index n = scores.rows();
  const double root_n = std::sqrt(static_cast<double>(n));
  const int reps = cfg.replications;
  const int blocks = (reps + kBlock - 1) / kBlock;
  Draws out;
  out.coef.assign(static_cast<std::size_t>(reps), 0.0);
  if (profile_x) out.profile.assign(static_cast<std::size_t>(reps), 0.0);

  parallel_for(static_cast<std::size_t>(blocks), cfg.threads, [&](std::size_t blk) {
    const int first = static_cast<int>(blk) * kBlock;
    const int m = std::min(kBlock, reps - first);
    MatrixXd xi(n, m);
    for (int c = 0; c < m; ++c)
      fill_multipliers(xi.col(c), cfg.seed, static_cast<std::uint64_t>(first + c), cfg.multiplier);
    const MatrixXd u = (scores.transpose() * xi) / root_n;
    for (int c = 0; c < m; ++c) {
      double t = 0.0;
      for (Index j = 0; j < u.rows(); ++j)
        if (use[static_cast<std::size_t>(j)]) t = std::max(t, std::abs(u(j, c)) / sigma(j));
      out.coef[static_cast<std::size_t>(first + c)] = t;
    }
    if (profile_x) {
      const MatrixXd proj = *profile_x * u;
      for (int c = 0; c < m; ++c) {
        double t = 0.0;
        for (Index i = 0; i < proj.rows(); ++i)
          if ((*profile_sd)(i) > 0.0) t = std::max(t, std::abs(proj(i, c)) / (*profile_sd)(i));
        out.profile[static_cast<std::size_t>(first + c)] = t;
      }
    }
  });
  return out;
}

double quantile_of(std::vector<double> draws, double level) {
  std::sort(draws.begin(), draws.end());
  return stats::order_statistic_quantile(draws, level);
}

VectorXd profile_sd(const MatrixXd& scores, const MatrixXd& x) {
  if (x.cols() != scores.cols())
    throw NumericalError("profile design has " + std::to_string(x.cols()) +
                         " columns but scores have " + std::to_string(scores.cols()));
  const MatrixXd omega = scores.transpose() * scores / static_cast<double>(scores.rows());
  VectorXd sd = ((x * omega).cwiseProduct(x)).rowwise().sum().cwiseMax(0.0).cwiseSqrt();
  Index zero = 0;
  for (Index i = 0; i < sd.size(); ++i) zero += sd(i) == 0.0;
  if (zero > 0)
    log::warn(std::to_string(zero) + " profile row(s) with zero variance excluded from the sup");
  return sd;
}

}  // namespace

void validate(const BootstrapConfig& cfg) {
  if (cfg.replications < 1) throw ConfigError("bootstrap.replications must be positive");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw ConfigError("bootstrap.level must lie in (0, 1)");
  if (cfg.replications < 100)
    log::warn("fewer than 100 bootstrap replications; critical values are unreliable");
}

MatrixXd score_matrix(const MatrixXd& design, const VectorXd& residuals,
                      const MatrixXd& bread_inverse, const std::vector<Index>& targets,
                      double dof_scale) {
  if (design.rows() != residuals.size() || bread_inverse.rows() != design.cols() ||
      bread_inverse.cols() != design.cols())
    throw NumericalError("score matrix: inconsistent dimensions");
  MatrixXd cols(bread_inverse.rows(), static_cast<Index>(targets.size()));
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (targets[k] < 0 || targets[k] >= design.cols())
      throw NumericalError("score matrix: target index out of range");
    cols.col(static_cast<Index>(k)) = bread_inverse.col(targets[k]);
  }
  MatrixXd psi = design * cols;
  psi.array().colwise() *= residuals.array();
  psi *= std::sqrt(dof_scale);
  return psi;
}

std::vector<double> sup_t_draws(const MatrixXd& scores, const BootstrapConfig& cfg) {
  validate(cfg);
  const VectorXd sigma = (scores.colwise().squaredNorm() / static_cast<double>(scores.rows())).cwiseSqrt();
  std::vector<bool> use(static_cast<std::size_t>(scores.cols()));
  for (Index j = 0; j < scores.cols(); ++j) use[static_cast<std::size_t>(j)] = sigma(j) > 0.0;
  return draw(scores, sigma, use, cfg, nullptr, nullptr).coef;
}

JointTestResult multiplier_bootstrap(const MatrixXd& scores, const VectorXd& estimates,
                                     const BootstrapConfig& cfg, const MatrixXd* profile_x) {
  validate(cfg);
  if (estimates.size() != scores.cols())
    throw NumericalError("bootstrap: estimate count does not match score columns");
  const Index n = scores.rows();
  const VectorXd sigma = (scores.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt();

  JointTestResult res;
  res.replications = cfg.replications;
  std::vector<bool> use(static_cast<std::size_t>(scores.cols()));
  for (Index j = 0; j < scores.cols(); ++j) {
    use[static_cast<std::size_t>(j)] = sigma(j) > 0.0;
    if (sigma(j) > 0.0) {
      res.statistic = std::max(res.statistic,
                               std::sqrt(static_cast<double>(n)) * std::abs(estimates(j)) / sigma(j));
    } else {
      res.excluded_targets.push_back(j);
      log::warn("target " + std::to_string(j) + " has zero score variance; excluded from the sup-t");
    }
  }

  VectorXd sd;
  if (profile_x) sd = profile_sd(scores, *profile_x);
  const Draws d = draw(scores, sigma, use, cfg, profile_x, profile_x ? &sd : nullptr);

  res.cv_coefficients = quantile_of(d.coef, cfg.level);
  res.critical_value = res.cv_coefficients;
  const auto exceed = std::count_if(d.coef.begin(), d.coef.end(),
                                    [&](double t) { return t >= res.statistic; });
  res.p_value = static_cast<double>(exceed) / static_cast<double>(cfg.replications);
  if (profile_x) res.cv_profile = quantile_of(d.profile, cfg.level);
  return res;
}

double simultaneous_profile_cv(const MatrixXd& scores, const MatrixXd& x,
                               const BootstrapConfig& cfg) {
  validate(cfg);
  const VectorXd sigma = (scores.colwise().squaredNorm() / static_cast<double>(scores.rows())).cwiseSqrt();
  std::vector<bool> use(static_cast<std::size_t>(scores.cols()));
  for (Index j = 0; j < scores.cols(); ++j) use[static_cast<std::size_t>(j)] = sigma(j) > 0.0;
  const VectorXd sd = profile_sd(scores, x);
  const Draws d = draw(scores, sigma, use, cfg, &x, &sd);
  return quantile_of(d.profile, cfg.level);
}

}  // namespace hdgap::bootstrap
