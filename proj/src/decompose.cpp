#include "hdgap/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hdgap/errors.hpp"
#include "hdgap/linalg.hpp"
#include "hdgap/log.hpp"

namespace hdgap::decompose {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

std::vector<Index> select_moderators(const dataprep::ModelFrame& frame, const CovariateSet& set) {
  const bool all = set.variables.size() == 1 && set.variables[0] == "*";
  std::set<std::string> wanted(set.variables.begin(), set.variables.end());
  std::set<std::string> seen;
  std::vector<Index> cols;
  for (std::size_t j = 0; j < frame.x_labels.size(); ++j) {
    const std::string& label = frame.x_labels[j];
    if (label == dataprep::kInterceptLabel) continue;
    const auto terms = dataprep::parse_label(label);
    if (terms.size() != 1) continue;
    if (all || wanted.count(terms[0].variable)) {
      cols.push_back(static_cast<Index>(j));
      seen.insert(terms[0].variable);
    }
  }
  if (!all) {
    for (const auto& v : wanted)
      if (!seen.count(v))
        throw ConfigError("covariate set '" + set.name + "' names unknown moderator '" + v + "'");
  }
  return cols;
}

struct GroupFit {
  VectorXd gamma;
  VectorXd xbar;
  std::size_t n = 0;
  std::vector<std::string> dropped;
};

GroupFit fit_group(const MatrixXd& design, const VectorXd& y, const std::vector<std::string>& labels,
                   const std::string& group) {
  GroupFit g;
  g.n = static_cast<std::size_t>(design.rows());
  if (g.n == 0) throw DataError("group '" + group + "' is empty");
  std::vector<Index> order(static_cast<std::size_t>(design.cols()));
  for (Index j = 0; j < design.cols(); ++j) order[static_cast<std::size_t>(j)] = j;
  const ColumnScreen screen = screen_collinear(design, order);
  for (Index j : screen.dropped) {
    g.dropped.push_back(labels[static_cast<std::size_t>(j)]);
    log::warn("group '" + group + "': dropped collinear column '" + labels[static_cast<std::size_t>(j)] + "'");
  }
  if (g.n < screen.kept.size())
    throw DataError("group '" + group + "' has fewer rows than retained columns");
  const LeastSquares ls = least_squares(select_columns(design, screen.kept), y);
  g.gamma = VectorXd::Zero(design.cols());
  for (std::size_t k = 0; k < screen.kept.size(); ++k) g.gamma(screen.kept[k]) = ls.coefficients(static_cast<Index>(k));
  g.xbar = design.colwise().mean().transpose();
  return g;
}

}  // namespace

CovariateSet unconditional() { return {"unconditional", {}}; }
CovariateSet full() { return {"full", {"*"}}; }

GroupRegression group_regressions(const dataprep::ModelFrame& frame, const CovariateSet& set) {
  const std::vector<Index> cols = select_moderators(frame, set);
  const Index n = frame.x.rows();
  GroupRegression out;
  out.labels.emplace_back(dataprep::kInterceptLabel);
  for (Index j : cols) out.labels.push_back(frame.x_labels[static_cast<std::size_t>(j)]);

  std::vector<Index> rows_m, rows_f;
  for (Index i = 0; i < n; ++i) (frame.d(i) == 1.0 ? rows_f : rows_m).push_back(i);

  auto build = [&](const std::vector<Index>& rows, MatrixXd& design, VectorXd& y) {
    design.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()) + 1);
    y.resize(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto rr = static_cast<Index>(r);
      design(rr, 0) = 1.0;
      for (std::size_t c = 0; c < cols.size(); ++c) design(rr, static_cast<Index>(c) + 1) = frame.x(rows[r], cols[c]);
      y(rr) = frame.y(rows[r]);
    }
  };
  MatrixXd xm, xf;
  VectorXd ym, yf;
  build(rows_m, xm, ym);
  build(rows_f, xf, yf);
  const GroupFit gm = fit_group(xm, ym, out.labels, "control (d = 0)");
  const GroupFit gf = fit_group(xf, yf, out.labels, "treated (d = 1)");
  out.gamma_m = gm.gamma;
  out.gamma_f = gf.gamma;
  out.xbar_m = gm.xbar;
  out.xbar_f = gf.xbar;
  out.n_m = gm.n;
  out.n_f = gf.n;
  out.dropped_m = gm.dropped;
  out.dropped_f = gf.dropped;
  return out;
}

DecompositionResult oaxaca_blinder(const dataprep::ModelFrame& frame, const CovariateSet& set,
                                   Reference reference) {
  DecompositionResult res;
  res.spec = set.name;
  res.reference = reference;
  res.groups = group_regressions(frame, set);
  const auto& g = res.groups;

  double sum_m = 0.0, sum_f = 0.0;
  for (Eigen::Index i = 0; i < frame.y.size(); ++i) (frame.d(i) == 1.0 ? sum_f : sum_m) += frame.y(i);
  const double mean_m = sum_m / static_cast<double>(g.n_m);
  const double mean_f = sum_f / static_cast<double>(g.n_f);
  res.total_gap = mean_m - mean_f;

  if (reference == Reference::male) {
    res.explained = (g.xbar_m - g.xbar_f).dot(g.gamma_m);
    res.unexplained = g.xbar_f.dot(g.gamma_m - g.gamma_f);
  } else {
    res.explained = (g.xbar_m - g.xbar_f).dot(g.gamma_f);
    res.unexplained = g.xbar_m.dot(g.gamma_m - g.gamma_f);
  }
  res.ratio_conditional = std::exp(g.xbar_f.dot(g.gamma_f) - g.xbar_f.dot(g.gamma_m));
  res.ratio_unconditional = std::exp(mean_f - mean_m);
  return res;
}

double wage_ratio(const dataprep::ModelFrame& frame, const CovariateSet& set) {
  const GroupRegression g = group_regressions(frame, set);
  return std::exp(g.xbar_f.dot(g.gamma_f)) / std::exp(g.xbar_f.dot(g.gamma_m));
}

double unconditional_wage_ratio(const dataprep::ModelFrame& frame) {
  return oaxaca_blinder(frame, unconditional()).ratio_unconditional;
}

ReconciliationReport reconcile_mean_effect(const dsinfer::DoubleSelectionFit& fit,
                                           const dataprep::ModelFrame& frame,
                                           const CovariateSet& set, bool exact_regime) {
  const std::vector<Index> cols = select_moderators(frame, set);
  std::vector<std::string> expected{dataprep::kInterceptLabel};
  for (Index j : cols) expected.push_back(frame.x_labels[static_cast<std::size_t>(j)]);
  if (expected != frame.x_labels || fit.beta.size() != frame.x.cols())
    throw ConfigError("covariate set '" + set.name +
                      "' does not match the moderators of the heterogeneous fit");

  const GroupRegression g = group_regressions(frame, set);
  const VectorXd effects = frame.x * fit.beta;
  ReconciliationReport rep;
  rep.exact_regime = exact_regime;
  rep.mean_effect_all = effects.mean();
  double sum_f = 0.0;
  for (Index i = 0; i < effects.size(); ++i)
    if (frame.d(i) == 1.0) sum_f += effects(i);
  rep.mean_effect_treated = sum_f / static_cast<double>(g.n_f);
  rep.negative_unexplained = -g.xbar_f.dot(g.gamma_m - g.gamma_f);
  rep.difference_all = rep.mean_effect_all - rep.negative_unexplained;
  rep.difference_treated = rep.mean_effect_treated - rep.negative_unexplained;
  return rep;
}

}  // namespace hdgap::decompose
