#include "hdgap/dsinfer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hdgap/errors.hpp"
#include "hdgap/linalg.hpp"
#include "hdgap/log.hpp"
#include "hdgap/parallel.hpp"
#include "hdgap/stats.hpp"

namespace hdgap::dsinfer {
namespace {

bool constant_nonzero(const Eigen::Ref<const VectorXd>& col) {
  return col.size() > 0 && col(0) != 0.0 && (col.array() == col(0)).all();
}

std::vector<bool> control_penalties(const MatrixXd& z) {
  std::vector<bool> pen(static_cast<std::size_t>(z.cols()), true);
  for (Index j = 0; j < z.cols(); ++j) {
    if (constant_nonzero(z.col(j))) {
      pen[static_cast<std::size_t>(j)] = false;
      break;
    }
  }
  return pen;
}

RegressionDiagnostics diagnose(std::string name, const lasso::Fit& fit) {
  RegressionDiagnostics d;
  d.name = std::move(name);
  d.lambda = fit.lambda;
  d.sweeps = fit.report.sweeps;
  d.kkt_violation = fit.report.kkt_violation;
  d.support_size = fit.report.support_size;
  return d;
}

std::vector<Index> supported_controls(const lasso::Fit& fit, Index p2) {
  std::vector<Index> out;
  for (Index j : fit.support)
    if (j < p2) out.push_back(j);
  return out;
}

void check_targets(const dataprep::ModelFrame& frame, const MatrixXd& targets) {
  if (frame.x.rows() != frame.z.rows() || frame.y.size() != frame.z.rows() ||
      frame.d.size() != frame.z.rows())
    throw DataError("model frame blocks have inconsistent row counts");
  for (Index j = 0; j < targets.cols(); ++j) {
    if (targets.col(j).isZero(0.0)) {
      const std::string label = static_cast<std::size_t>(j) < frame.x_labels.size()
                                    ? frame.x_labels[static_cast<std::size_t>(j)]
                                    : std::to_string(j);
      throw NumericalError("target regressor for '" + label + "' is identically zero among treated rows");
    }
  }
}

lasso::Fit outcome_lasso(const dataprep::ModelFrame& frame, const DoubleSelectionConfig& cfg) {
  const lasso::Problem prob(frame.z, frame.y, control_penalties(frame.z));
  return lasso::fit_with_iterated_loadings(prob, cfg.penalty, cfg.solver);
}

}  // namespace

RobustCovariance robust_vcov(const MatrixXd& design, const VectorXd& residuals,
                             const std::vector<Index>& targets) {
  const Index n = design.rows();
  const Index k = design.cols();
  if (residuals.size() != n) throw NumericalError("robust covariance: residual length mismatch");
  if (n <= k)
    throw NumericalError("robust covariance needs n > k (n = " + std::to_string(n) +
                         ", k = " + std::to_string(k) + ")");
  const double nd = static_cast<double>(n);
  const MatrixXd m = design.transpose() * design / nd;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  RobustCovariance out;
  out.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || out.condition_number > 1e12) {
    std::ostringstream msg;
    msg << "refit Gram matrix is singular (condition number " << out.condition_number << ")";
    throw NumericalError(msg.str());
  }
  out.bread_inverse = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                      eig.eigenvectors().transpose();
  out.dof_scale = nd / static_cast<double>(n - k);

  MatrixXd bread_t(k, static_cast<Index>(targets.size()));
  for (std::size_t t = 0; t < targets.size(); ++t) bread_t.col(static_cast<Index>(t)) = out.bread_inverse.col(targets[t]);
  // rows g_i' M^{-1}_{.,T} e_i; their scaled cross product is the target block
  MatrixXd infl = design * bread_t;
  infl.array().colwise() *= residuals.array();
  MatrixXd omega = out.dof_scale * infl.transpose() * infl / nd;
  out.omega = (omega + omega.transpose()) / 2.0;
  return out;
}

DoubleSelectionFit refit_on_controls(const dataprep::ModelFrame& frame, std::vector<Index> controls,
                                     double collinearity_tol) {
  const MatrixXd targets = frame.targets();
  const Index n = frame.z.rows();
  const Index p1 = targets.cols();
  std::sort(controls.begin(), controls.end());
  controls.erase(std::unique(controls.begin(), controls.end()), controls.end());

  const auto nc = static_cast<Index>(controls.size());
  MatrixXd candidate(n, p1 + nc);
  candidate.leftCols(p1) = targets;
  for (Index c = 0; c < nc; ++c) candidate.col(p1 + c) = frame.z.col(controls[static_cast<std::size_t>(c)]);

  // controls first (ascending), then the targets; targets are never dropped
  std::vector<Index> order;
  for (Index c = 0; c < nc; ++c) order.push_back(p1 + c);
  for (Index j = 0; j < p1; ++j) order.push_back(j);
  const ColumnScreen screen = screen_collinear(candidate, order, collinearity_tol);

  DoubleSelectionFit fit;
  for (Index j : screen.dropped) {
    if (j < p1) {
      const std::string label = static_cast<std::size_t>(j) < frame.x_labels.size()
                                    ? frame.x_labels[static_cast<std::size_t>(j)]
                                    : std::to_string(j);
      throw NumericalError("target column '" + label + "' is collinear with the selected controls");
    }
    fit.dropped_controls.push_back(controls[static_cast<std::size_t>(j - p1)]);
  }
  if (!fit.dropped_controls.empty()) {
    std::ostringstream msg;
    msg << "dropped " << fit.dropped_controls.size() << " collinear control(s) at refit:";
    for (Index j : fit.dropped_controls)
      msg << ' ' << (static_cast<std::size_t>(j) < frame.z_labels.size() ? frame.z_labels[static_cast<std::size_t>(j)] : std::to_string(j));
    log::info(msg.str());
  }

  std::vector<Index> columns;
  for (Index j = 0; j < p1; ++j) columns.push_back(j);
  for (Index c = 0; c < nc; ++c) {
    if (std::find(screen.kept.begin(), screen.kept.end(), p1 + c) != screen.kept.end()) {
      columns.push_back(p1 + c);
      fit.refit_controls.push_back(controls[static_cast<std::size_t>(c)]);
    }
  }
  const MatrixXd design = select_columns(candidate, columns);
  const Index k = design.cols();
  if (n <= k)
    throw NumericalError("refit has " + std::to_string(k) + " parameters but only " +
                         std::to_string(n) + " observations");

  const LeastSquares ls = least_squares(design, frame.y);
  std::vector<Index> target_idx(static_cast<std::size_t>(p1));
  for (Index j = 0; j < p1; ++j) target_idx[static_cast<std::size_t>(j)] = j;
  const RobustCovariance cov = robust_vcov(design, ls.residuals, target_idx);

  fit.n = static_cast<std::size_t>(n);
  fit.beta = ls.coefficients.head(p1);
  fit.control_coefficients = ls.coefficients.tail(k - p1);
  fit.omega = cov.omega;
  fit.vcov = cov.omega / static_cast<double>(n);
  fit.se = fit.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.refit_n_params = k;
  fit.residuals = ls.residuals;
  fit.scores = bootstrap::score_matrix(design, ls.residuals, cov.bread_inverse, target_idx, cov.dof_scale);
  fit.union_support = controls;
  return fit;
}

DoubleSelectionFit single_selection(const dataprep::ModelFrame& frame,
                                    const DoubleSelectionConfig& cfg) {
  check_targets(frame, frame.targets());
  const lasso::Fit outcome = outcome_lasso(frame, cfg);
  const std::vector<Index> support = supported_controls(outcome, frame.z.cols());
  DoubleSelectionFit fit = refit_on_controls(frame, support, cfg.collinearity_tol);
  fit.outcome_support = support;
  fit.diagnostics.push_back(diagnose("outcome", outcome));
  return fit;
}

DoubleSelectionFit double_selection(const dataprep::ModelFrame& frame,
                                    const DoubleSelectionConfig& cfg) {
  const MatrixXd targets = frame.targets();
  check_targets(frame, targets);
  const Index n = frame.z.rows();
  const Index p1 = targets.cols();
  const Index p2 = frame.z.cols();

  const lasso::Fit outcome = outcome_lasso(frame, cfg);
  const std::vector<Index> outcome_support = supported_controls(outcome, p2);

  const std::vector<bool> z_pen = control_penalties(frame.z);
  std::vector<bool> target_is_main_effect(static_cast<std::size_t>(p1), false);
  for (Index j = 0; j < p1; ++j)
    target_is_main_effect[static_cast<std::size_t>(j)] = constant_nonzero(frame.x.col(j));

  std::vector<lasso::Fit> aux(static_cast<std::size_t>(p1));
  parallel_for(static_cast<std::size_t>(p1), cfg.threads, [&](std::size_t j) {
    MatrixXd w(n, p2 + p1 - 1);
    w.leftCols(p2) = frame.z;
    std::vector<bool> pen = z_pen;
    Index col = p2;
    for (Index k = 0; k < p1; ++k) {
      if (k == static_cast<Index>(j)) continue;
      w.col(col++) = targets.col(k);
      pen.push_back(cfg.penalize_treatment_main_effect || !target_is_main_effect[static_cast<std::size_t>(k)]);
    }
    const VectorXd response = targets.col(static_cast<Index>(j));
    const lasso::Problem prob(w, response, std::move(pen));
    aux[j] = lasso::fit_with_iterated_loadings(prob, cfg.penalty, cfg.solver);
  });

  std::set<Index> uni(outcome_support.begin(), outcome_support.end());
  std::vector<std::vector<Index>> per_target;
  per_target.reserve(aux.size());
  for (const auto& f : aux) {
    per_target.push_back(supported_controls(f, p2));
    uni.insert(per_target.back().begin(), per_target.back().end());
  }

  DoubleSelectionFit fit =
      refit_on_controls(frame, std::vector<Index>(uni.begin(), uni.end()), cfg.collinearity_tol);
  fit.outcome_support = outcome_support;
  fit.per_target_supports = std::move(per_target);
  fit.diagnostics.push_back(diagnose("outcome", outcome));
  for (std::size_t j = 0; j < aux.size(); ++j) {
    const std::string label = j < frame.x_labels.size() ? frame.x_labels[j] : std::to_string(j);
    fit.diagnostics.push_back(diagnose("auxiliary:" + label, aux[j]));
  }
  return fit;
}

EffectProfile effect_profile(const DoubleSelectionFit& fit, const MatrixXd& x, double cv,
                             double level, const std::vector<double>& grid) {
  if (x.cols() != fit.beta.size())
    throw NumericalError("effect profile: moderator matrix has " + std::to_string(x.cols()) +
                         " columns, fit has " + std::to_string(fit.beta.size()) + " targets");
  if (cv < 0.0) throw NumericalError("effect profile: critical value must be nonnegative");
  EffectProfile prof;
  prof.effects = x * fit.beta;
  prof.se_pointwise = ((x * fit.vcov).cwiseProduct(x)).rowwise().sum().cwiseMax(0.0).cwiseSqrt();
  const double z = stats::normal_quantile((1.0 + level) / 2.0);
  prof.critical_value = std::max(cv, z);
  prof.band_halfwidth = prof.critical_value * prof.se_pointwise;
  prof.pointwise_halfwidth = z * prof.se_pointwise;
  const Index n = prof.effects.size();
  prof.significant_negative.resize(static_cast<std::size_t>(n));
  prof.significant_positive.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    prof.significant_negative[static_cast<std::size_t>(i)] = prof.effects(i) + prof.band_halfwidth(i) < 0.0;
    prof.significant_positive[static_cast<std::size_t>(i)] = prof.effects(i) - prof.band_halfwidth(i) > 0.0;
  }
  prof.quantiles = report::quantile_curve(prof.effects, prof.band_halfwidth, grid);
  return prof;
}

std::vector<EffectRow> marginal_effects_table(const DoubleSelectionFit& fit,
                                              const std::vector<std::string>& labels,
                                              double cv_coefficients, double level) {
  if (labels.size() != static_cast<std::size_t>(fit.beta.size()))
    throw DataError("marginal effects: label count does not match targets");
  const double z = stats::normal_quantile((1.0 + level) / 2.0);
  const double cv = std::max(cv_coefficients, z);
  std::vector<EffectRow> rows;
  for (Index j = 0; j < fit.beta.size(); ++j) {
    EffectRow r;
    r.label = labels[static_cast<std::size_t>(j)];
    r.estimate = fit.beta(j);
    r.se = fit.se(j);
    r.pointwise_low = r.estimate - z * r.se;
    r.pointwise_high = r.estimate + z * r.se;
    r.simultaneous_low = r.estimate - cv * r.se;
    r.simultaneous_high = r.estimate + cv * r.se;
    r.significant = r.simultaneous_low > 0.0 || r.simultaneous_high < 0.0;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace hdgap::dsinfer
