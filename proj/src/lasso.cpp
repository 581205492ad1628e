#include "hdgap/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hdgap/linalg.hpp"
#include "hdgap/log.hpp"
#include "hdgap/stats.hpp"

namespace hdgap::lasso {
namespace {

bool is_constant_nonzero(const Eigen::Ref<const VectorXd>& col) {
  const double first = col(0);
  if (first == 0.0) return false;
  return (col.array() == first).all();
}

// Centered (when an intercept is present) and unit-norm copy of the design.
struct Standardized {
  MatrixXd w;       // n x p, intercept column left as zeros
  VectorXd mean;    // column means subtracted (zero without intercept)
  VectorXd scale;   // column norms after centering
  VectorXd y;       // centered response when an intercept is present
  double y_mean = 0.0;
};

Standardized standardize(const Problem& prob) {
  const Index n = prob.rows();
  const Index p = prob.cols();
  Standardized s;
  s.w.resize(n, p);
  s.mean = VectorXd::Zero(p);
  s.scale = VectorXd::Zero(p);
  const auto icpt = prob.intercept();
  if (icpt) {
    s.y_mean = prob.y.mean();
    s.y = prob.y.array() - s.y_mean;
  } else {
    s.y = prob.y;
  }
  for (Index j = 0; j < p; ++j) {
    if (icpt && j == *icpt) {
      s.w.col(j).setZero();
      continue;
    }
    if (icpt) {
      s.mean(j) = prob.w.col(j).mean();
      s.w.col(j) = prob.w.col(j).array() - s.mean(j);
    } else {
      s.w.col(j) = prob.w.col(j);
    }
    const double norm = s.w.col(j).norm();
    if (norm == 0.0) {
      std::ostringstream msg;
      msg << "lasso column " << j << " has no variation"
          << (prob.penalize[static_cast<std::size_t>(j)] ? "" : " (unpenalized)");
      throw DataError(msg.str());
    }
    s.scale(j) = norm;
    s.w.col(j) /= norm;
  }
  return s;
}

VectorXd initial_residuals(const Problem& prob) {
  if (prob.intercept()) return prob.y.array() - prob.y.mean();
  return prob.y;
}

// Columns used for loading estimation: centered when there is an intercept.
MatrixXd loading_design(const Problem& prob) {
  if (!prob.intercept()) return prob.w;
  MatrixXd centered = prob.w.rowwise() - prob.w.colwise().mean();
  return centered;
}

std::vector<Index> support_of(const Problem& prob, const VectorXd& coef) {
  std::vector<Index> out;
  for (Index j = 0; j < prob.cols(); ++j) {
    if (!prob.penalize[static_cast<std::size_t>(j)] || coef(j) != 0.0) out.push_back(j);
  }
  return out;
}

}  // namespace

Problem::Problem(const MatrixXd& w_, const VectorXd& y_, std::vector<bool> penalize_)
    : w(w_), y(y_), penalize(std::move(penalize_)) {
  if (w.rows() < 2) throw DataError("lasso problem needs at least two observations");
  if (w.cols() < 1) throw DataError("lasso problem needs at least one column");
  if (y.size() != w.rows()) throw DataError("lasso response length does not match design rows");
  if (static_cast<Index>(penalize.size()) != w.cols())
    throw DataError("penalty mask length does not match design columns");
  for (Index j = 0; j < w.cols(); ++j) {
    if (!penalize[static_cast<std::size_t>(j)] && is_constant_nonzero(w.col(j))) {
      intercept_ = j;
      break;
    }
  }
  for (Index j = 0; j < w.cols(); ++j) {
    if (penalize[static_cast<std::size_t>(j)] && w.col(j).isZero(0.0))
      throw DataError("penalized lasso column " + std::to_string(j) + " is all zero");
  }
}

Index Problem::penalized_count() const {
  return static_cast<Index>(std::count(penalize.begin(), penalize.end(), true));
}

NonConvergence::NonConvergence(VectorXd last_iterate, double kkt, int sweeps)
    : NumericalError("lasso did not converge after " + std::to_string(sweeps) +
                     " sweeps (KKT violation " + std::to_string(kkt) + ")"),
      last_(std::move(last_iterate)),
      kkt_(kkt) {}

double default_gamma(Index n) { return 0.1 / std::log(static_cast<double>(n)); }

double compute_penalty(Index n, Index p, double c, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("penalty gamma must lie in (0, 1)");
  if (!(c > 0.0)) throw ConfigError("penalty constant c must be positive");
  if (n < 2 || p < 1) throw ConfigError("penalty rule needs n >= 2 and p >= 1");
  const double q = 1.0 - gamma / (2.0 * static_cast<double>(p));
  return 2.0 * c * std::sqrt(static_cast<double>(n)) * stats::normal_quantile(q);
}

VectorXd loadings_from_residuals(const MatrixXd& w, const VectorXd& residuals) {
  const double n = static_cast<double>(w.rows());
  const VectorXd e2 = residuals.array().square();
  return ((w.array().square().colwise() * e2.array()).colwise().sum() / n).sqrt().transpose();
}

PenaltyLoadings estimate_loadings(const Problem& prob, const PenaltyConfig& cfg,
                                  const Fit* previous) {
  PenaltyLoadings out;
  const Index n = prob.rows();
  out.c = cfg.c;
  out.gamma = cfg.gamma.value_or(default_gamma(n));
  const Index p_pen = prob.penalized_count();
  if (cfg.lambda) {
    if (*cfg.lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    out.lambda = *cfg.lambda;
  } else {
    out.lambda = p_pen > 0 ? compute_penalty(n, p_pen, out.c, out.gamma) : 0.0;
  }

  VectorXd resid = previous ? VectorXd(prob.y - prob.w * previous->coefficients)
                            : initial_residuals(prob);
  const MatrixXd design = loading_design(prob);
  if (resid.squaredNorm() == 0.0) {
    log::warn("residuals are identically zero; penalty loadings fall back to column norms");
    out.fallback = true;
    resid = VectorXd::Ones(n);
  }
  out.psi = loadings_from_residuals(design, resid);
  for (Index j = 0; j < prob.cols(); ++j) {
    if (!prob.penalize[static_cast<std::size_t>(j)]) out.psi(j) = 0.0;
  }
  out.iterations = previous ? 1 : 0;
  return out;
}

double objective(const Problem& prob, const VectorXd& coef, double lambda, const VectorXd& psi) {
  const double n = static_cast<double>(prob.rows());
  const VectorXd r = prob.y - prob.w * coef;
  double pen = 0.0;
  for (Index j = 0; j < prob.cols(); ++j) {
    if (prob.penalize[static_cast<std::size_t>(j)]) pen += psi(j) * std::abs(coef(j));
  }
  return r.squaredNorm() / n + lambda / n * pen;
}

double kkt_violation(const Problem& prob, const VectorXd& coef, double lambda,
                     const VectorXd& psi) {
  const double n = static_cast<double>(prob.rows());
  const VectorXd r = prob.y - prob.w * coef;
  const VectorXd grad = 2.0 / n * (prob.w.transpose() * r);
  double worst = 0.0;
  for (Index j = 0; j < prob.cols(); ++j) {
    double v;
    if (!prob.penalize[static_cast<std::size_t>(j)]) {
      v = std::abs(grad(j));
    } else {
      const double bound = lambda / n * psi(j);
      if (coef(j) == 0.0) {
        v = std::max(std::abs(grad(j)) - bound, 0.0);
      } else {
        v = std::abs(grad(j) - (coef(j) > 0.0 ? bound : -bound));
      }
    }
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

struct CoordinateDescent {
  const Standardized& s;
  VectorXd thresholds;
  VectorXd beta;  // standardized scale
  VectorXd resid;
  std::vector<Index> free_columns;

  // One pass over `cols`; returns the largest absolute coefficient change.
  double sweep(const std::vector<Index>& cols) {
    double max_change = 0.0;
    for (Index j : cols) {
      const double old = beta(j);
      const double z = s.w.col(j).dot(resid) + old;
      const double updated = soft_threshold(z, thresholds(j));
      const double delta = updated - old;
      if (delta != 0.0) {
        resid.noalias() -= delta * s.w.col(j);
        beta(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    return max_change;
  }

  std::vector<Index> active() const {
    std::vector<Index> out;
    for (Index j : free_columns)
      if (beta(j) != 0.0) out.push_back(j);
    return out;
  }

  double standardized_objective(const VectorXd& psi, const VectorXd& scale, double lambda) const {
    const double n = static_cast<double>(resid.size());
    double pen = 0.0;
    for (Index j : free_columns) {
      if (scale(j) > 0.0) pen += psi(j) * std::abs(beta(j)) / scale(j);
    }
    return resid.squaredNorm() / n + lambda / n * pen;
  }
};

}  // namespace

Fit fit_lasso(const Problem& prob, const PenaltyLoadings& loads, const SolverOptions& opts) {
  const Index p = prob.cols();
  for (Index j = 0; j < p; ++j) {
    if (prob.penalize[static_cast<std::size_t>(j)] && !(loads.psi(j) > 0.0))
      throw NumericalError("penalty loading for column " + std::to_string(j) +
                           " is not strictly positive");
  }
  const Standardized s = standardize(prob);
  const auto icpt = prob.intercept();

  CoordinateDescent cd{s, VectorXd::Zero(p), VectorXd::Zero(p), s.y, {}};
  for (Index j = 0; j < p; ++j) {
    if (icpt && j == *icpt) continue;
    cd.free_columns.push_back(j);
    if (prob.penalize[static_cast<std::size_t>(j)])
      cd.thresholds(j) = loads.lambda * loads.psi(j) / (2.0 * s.scale(j));
  }

  Fit fit;
  int sweeps = 0;
  bool converged = false;
  auto record = [&] {
    if (opts.record_objective)
      fit.report.objective_trace.push_back(cd.standardized_objective(loads.psi, s.scale, loads.lambda));
  };
  record();
  while (sweeps < opts.max_sweeps) {
    const double full_change = cd.sweep(cd.free_columns);
    ++sweeps;
    record();
    if (full_change < opts.tol) {
      converged = true;
      break;
    }
    // iterate on the active set until it settles, then re-check all columns
    const std::vector<Index> act = cd.active();
    while (sweeps < opts.max_sweeps) {
      const double change = cd.sweep(act);
      ++sweeps;
      record();
      if (change < opts.tol) break;
    }
  }

  VectorXd coef = VectorXd::Zero(p);
  for (Index j : cd.free_columns) coef(j) = cd.beta(j) / s.scale(j);
  if (icpt) {
    const double c0 = prob.w(0, *icpt);
    coef(*icpt) = (s.y_mean - s.mean.dot(coef)) / c0;
  }

  const double kkt = kkt_violation(prob, coef, loads.lambda, loads.psi);
  if (!converged) throw NonConvergence(coef, kkt, sweeps);

  fit.coefficients = std::move(coef);
  fit.support = support_of(prob, fit.coefficients);
  fit.lambda = loads.lambda;
  fit.psi = loads.psi;
  fit.objective = objective(prob, fit.coefficients, loads.lambda, loads.psi);
  fit.report.sweeps = sweeps;
  fit.report.kkt_violation = kkt;
  fit.report.support_size = static_cast<Index>(fit.support.size());
  return fit;
}

Fit fit_with_iterated_loadings(const Problem& prob, const PenaltyConfig& cfg,
                               const SolverOptions& opts, PenaltyLoadings* final_loads) {
  PenaltyLoadings loads = estimate_loadings(prob, cfg);
  Fit fit = fit_lasso(prob, loads, opts);
  for (int k = 0; k < cfg.refinements; ++k) {
    PenaltyLoadings next = estimate_loadings(prob, cfg, &fit);
    next.iterations = loads.iterations + 1;
    double rel_change = 0.0;
    for (Index j = 0; j < prob.cols(); ++j) {
      if (loads.psi(j) > 0.0)
        rel_change = std::max(rel_change, std::abs(next.psi(j) - loads.psi(j)) / loads.psi(j));
    }
    loads = std::move(next);
    fit = fit_lasso(prob, loads, opts);
    if (rel_change < cfg.refine_tol) break;
  }
  if (final_loads) *final_loads = loads;
  return fit;
}

Fit post_lasso_refit(const Problem& prob, const Fit& fit) {
  Fit out = fit;
  VectorXd post = VectorXd::Zero(prob.cols());
  if (!fit.support.empty()) {
    const auto n = static_cast<std::size_t>(prob.rows());
    if (fit.support.size() > n)
      log::warn("post-lasso support exceeds the sample size; using the minimum-norm solution");
    const MatrixXd design = select_columns(prob.w, fit.support);
    const LeastSquares ls = least_squares(design, prob.y);
    if (ls.rank_deficient)
      log::warn("post-lasso design is rank deficient (rank " + std::to_string(ls.rank) + " of " +
                std::to_string(design.cols()) + "); using the minimum-norm solution");
    for (std::size_t k = 0; k < fit.support.size(); ++k)
      post(fit.support[k]) = ls.coefficients(static_cast<Index>(k));
  }
  out.post = std::move(post);
  return out;
}

}  // namespace hdgap::lasso
