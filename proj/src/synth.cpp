#include "hdgap/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "hdgap/csv.hpp"
#include "hdgap/errors.hpp"
#include "hdgap/parallel.hpp"
#include "hdgap/random.hpp"
#include "hdgap/stats.hpp"

namespace hdgap::synth {
namespace {

VectorXd or_zero(const VectorXd& v, std::size_t size) {
  return v.size() == 0 ? VectorXd::Zero(static_cast<Index>(size)) : v;
}

}  // namespace

void validate(const DgpSpec& s) {
  if (s.n < 2 || s.p1 < 1 || s.p2 < 1) throw ConfigError("DGP dimensions must be positive (n >= 2)");
  if (s.p1 > s.p2) throw ConfigError("DGP needs p1 <= p2 (moderators are drawn from the control block)");
  if (s.beta_true.size() != 0 && static_cast<std::size_t>(s.beta_true.size()) != s.p1)
    throw ConfigError("beta_true must have length p1");
  if (s.delta_true.size() != 0 && static_cast<std::size_t>(s.delta_true.size()) != s.p2)
    throw ConfigError("delta_true must have length p2");
  if (s.propensity.size() != 0 && static_cast<std::size_t>(s.propensity.size()) != s.p2)
    throw ConfigError("propensity must have length p2");
  if (!(s.rho > -1.0 && s.rho < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
  if (s.sigma < 0.0) throw ConfigError("sigma must be nonnegative");
}

Generated generate(const DgpSpec& spec) {
  validate(spec);
  const auto n = static_cast<Index>(spec.n);
  const auto p1 = static_cast<Index>(spec.p1);
  const auto p2 = static_cast<Index>(spec.p2);
  const VectorXd beta = or_zero(spec.beta_true, spec.p1);
  const VectorXd delta = or_zero(spec.delta_true, spec.p2);
  const VectorXd prop = or_zero(spec.propensity, spec.p2);

  Philox rng(spec.seed);
  Generated g;
  auto& f = g.frame;
  f.z.resize(n, p2);
  f.d.resize(n);
  f.y.resize(n);
  const double innov = std::sqrt(1.0 - spec.rho * spec.rho);
  for (Index i = 0; i < n; ++i) {
    f.z(i, 0) = 1.0;
    double prev = 0.0;
    for (Index k = 1; k < p2; ++k) {
      const double e = rng.normal();
      prev = k == 1 ? e : spec.rho * prev + innov * e;
      f.z(i, k) = prev;
    }
  }
  f.x = f.z.leftCols(p1);
  for (Index i = 0; i < n; ++i) {
    const double index = spec.propensity_intercept + f.z.row(i).dot(prop);
    const double prob = 1.0 / (1.0 + std::exp(-index));
    f.d(i) = rng.uniform() < prob ? 1.0 : 0.0;
  }
  g.truth.beta = beta;
  g.truth.delta = delta;
  g.truth.effects = f.x * beta;
  for (Index i = 0; i < n; ++i) {
    double sd = spec.sigma;
    if (spec.noise == NoiseKind::heteroscedastic) sd *= p2 > 1 ? std::abs(f.z(i, 1)) : 1.0;
    f.y(i) = f.z.row(i).dot(delta) + g.truth.effects(i) * f.d(i) + sd * rng.normal();
  }

  f.outcome_name = "y";
  f.treatment_name = "d";
  f.z_labels.emplace_back(dataprep::kConstantLabel);
  for (Index k = 1; k < p2; ++k) f.z_labels.push_back("g" + std::to_string(k));
  f.x_labels.emplace_back(dataprep::kInterceptLabel);
  for (Index k = 1; k < p1; ++k) f.x_labels.push_back("g" + std::to_string(k));
  f.dims.n = spec.n;
  f.dims.p1 = spec.p1;
  f.dims.p2 = spec.p2;
  f.dims.p = spec.p1 + spec.p2 + 1;
  return g;
}

VectorXd prox_oracle(const lasso::Problem& prob, const lasso::PenaltyLoadings& loads,
                     long iterations, double step) {
  const double n = static_cast<double>(prob.rows());
  if (step <= 0.0) {
    Eigen::JacobiSVD<MatrixXd> svd(prob.w);
    const double smax = svd.singularValues()(0);
    step = n / (2.0 * smax * smax);
  }
  VectorXd b = VectorXd::Zero(prob.cols());
  const MatrixXd gram = prob.w.transpose() * prob.w;
  const VectorXd wty = prob.w.transpose() * prob.y;
  for (long it = 0; it < iterations; ++it) {
    const VectorXd grad = 2.0 / n * (gram * b - wty);
    b -= step * grad;
    for (Index j = 0; j < b.size(); ++j) {
      if (prob.penalize[static_cast<std::size_t>(j)])
        b(j) = lasso::soft_threshold(b(j), step * loads.lambda * loads.psi(j) / n);
    }
  }
  return b;
}

double binomial_se(double rate, int count) {
  if (count <= 0) return 0.0;
  return std::sqrt(rate * (1.0 - rate) / count);
}

MonteCarloTable monte_carlo(const MonteCarloSpec& spec) {
  validate(spec.dgp);
  bootstrap::validate(spec.bootstrap);
  const int reps = spec.replications;
  const auto p1 = static_cast<Index>(spec.dgp.p1);
  const double z = stats::normal_quantile((1.0 + spec.bootstrap.level) / 2.0);

  struct Rep {
    bool ok = false;
    std::vector<bool> covered;
    std::vector<double> t;
    double p_value = 1.0;
    bool band_covers = false;
    double union_size = 0.0;
  };
  std::vector<Rep> results(static_cast<std::size_t>(reps));

  parallel_for(static_cast<std::size_t>(reps), spec.threads, [&](std::size_t r) {
    DgpSpec dgp = spec.dgp;
    dgp.seed = derive_seed(spec.dgp.seed, r);
    const Generated gen = generate(dgp);
    dsinfer::DoubleSelectionConfig fit_cfg = spec.fit;
    fit_cfg.threads = 1;
    Rep& out = results[r];
    dsinfer::DoubleSelectionFit fit;
    try {
      fit = spec.estimator == Estimator::double_selection ? dsinfer::double_selection(gen.frame, fit_cfg)
                                                          : dsinfer::single_selection(gen.frame, fit_cfg);
    } catch (const NumericalError&) {
      return;
    }
    bootstrap::BootstrapConfig boot = spec.bootstrap;
    boot.seed = derive_seed(spec.bootstrap.seed, r);
    boot.threads = 1;
    const auto joint = bootstrap::multiplier_bootstrap(fit.scores, fit.beta, boot,
                                                       spec.profile_bands ? &gen.frame.x : nullptr);
    out.ok = true;
    out.p_value = joint.p_value;
    out.union_size = static_cast<double>(fit.union_support.size());
    for (Index j = 0; j < p1; ++j) {
      const double err = fit.beta(j) - gen.truth.beta(j);
      out.covered.push_back(std::abs(err) <= z * fit.se(j));
      out.t.push_back(fit.se(j) > 0.0 ? err / fit.se(j) : 0.0);
    }
    if (spec.profile_bands) {
      const auto prof = dsinfer::effect_profile(fit, gen.frame.x, *joint.cv_profile, boot.level, {0.5});
      const VectorXd err = (prof.effects - gen.truth.effects).cwiseAbs();
      out.band_covers = (err.array() <= prof.band_halfwidth.array()).all();
    }
  });

  MonteCarloTable table;
  table.replications = reps;
  table.coverage.assign(static_cast<std::size_t>(p1), 0.0);
  table.t_stats.assign(static_cast<std::size_t>(p1), {});
  table.mean_union_size.assign(1, 0.0);
  int ok = 0;
  int rejections = 0;
  int band_hits = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++table.failures;
      continue;
    }
    ++ok;
    table.p_values.push_back(r.p_value);
    rejections += r.p_value <= 1.0 - spec.bootstrap.level;
    band_hits += r.band_covers;
    table.mean_union_size[0] += r.union_size;
    for (Index j = 0; j < p1; ++j) {
      table.coverage[static_cast<std::size_t>(j)] += r.covered[static_cast<std::size_t>(j)];
      table.t_stats[static_cast<std::size_t>(j)].push_back(r.t[static_cast<std::size_t>(j)]);
    }
  }
  if (ok > 0) {
    for (auto& c : table.coverage) c /= ok;
    table.joint_rejection = static_cast<double>(rejections) / ok;
    table.profile_coverage = static_cast<double>(band_hits) / ok;
    table.mean_union_size[0] /= ok;
  }
  for (double c : table.coverage) table.coverage_se.push_back(binomial_se(c, ok));
  table.joint_rejection_se = binomial_se(table.joint_rejection, ok);
  table.profile_coverage_se = binomial_se(table.profile_coverage, ok);
  return table;
}

// --- ACS-shaped sample ------------------------------------------------------

namespace {

struct Categorical {
  const char* name;
  std::vector<const char*> levels;  // first level is the baseline
  std::vector<double> weights;
};

std::size_t draw_category(Philox& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (u < weights[k]) return k;
    u -= weights[k];
  }
  return weights.size() - 1;
}

}  // namespace

std::string acs_like_csv(std::size_t rows, std::uint64_t seed) {
  const Categorical marital{"marital",
                            {"never_married", "married_spouse_present", "married_spouse_absent",
                             "separated", "divorced", "widowed"},
                            {0.28, 0.42, 0.06, 0.06, 0.13, 0.05}};
  const Categorical race{"race", {"white", "black", "asian", "other"}, {0.62, 0.16, 0.11, 0.11}};
  const Categorical english{"english", {"only_english", "very_well", "limited"}, {0.72, 0.16, 0.12}};
  const Categorical industry{"industry",
                             {"wholesale", "manufacturing", "retail", "health", "education", "finance"},
                             {0.14, 0.18, 0.17, 0.19, 0.16, 0.16}};
  const Categorical occupation{"occupation",
                               {"management", "office_admin", "sales", "service", "production", "professional"},
                               {0.18, 0.17, 0.15, 0.17, 0.15, 0.18}};
  const Categorical hours{"hours", {"h35_40", "h41_49", "h50_59", "h60plus"}, {0.55, 0.2, 0.15, 0.1}};
  const Categorical region{"region", {"new_england", "middle_atlantic", "south_atlantic", "pacific"},
                           {0.22, 0.26, 0.27, 0.25}};

  Philox rng(seed);
  std::ostringstream out;
  csv::write_row(out, {"incwage", "female", "marital", "child4", "child18", "race", "hispanic",
                       "english", "exper", "educ_years", "veteran", "industry", "occupation", "hours",
                       "region", "msa", "age", "wkswork", "uhrswork"});
  auto fmt2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  for (std::size_t r = 0; r < rows; ++r) {
    const bool female = rng.bernoulli(0.46);
    const bool bachelor = rng.bernoulli(0.45);
    const std::array<int, 3> hs_years{10, 11, 12};
    const std::array<int, 3> ba_years{16, 18, 20};
    const int educ = bachelor ? ba_years[draw_category(rng, {0.7, 0.22, 0.08})]
                              : hs_years[draw_category(rng, {0.08, 0.12, 0.8})];
    // ages 22..67 so the age filter has work to do
    const int age = 22 + static_cast<int>(rng.below(46));
    const int exper = std::max(0, age - educ - 6);
    const std::size_t mar = draw_category(rng, marital.weights);
    const bool married = mar == 1;
    const bool child18 = rng.bernoulli(married ? 0.55 : 0.25);
    const bool child4 = child18 && rng.bernoulli(0.35);
    const std::size_t rc = draw_category(rng, race.weights);
    const bool hispanic = rng.bernoulli(0.17);
    const std::size_t eng = draw_category(rng, hispanic ? std::vector<double>{0.35, 0.35, 0.3} : english.weights);
    const bool veteran = rng.bernoulli(female ? 0.08 : 0.14);
    const std::size_t ind = draw_category(rng, industry.weights);
    const std::size_t occ = draw_category(rng, occupation.weights);
    const std::size_t hrs = draw_category(rng, female ? std::vector<double>{0.66, 0.17, 0.11, 0.06} : hours.weights);
    const std::size_t reg = draw_category(rng, region.weights);
    const bool msa = rng.bernoulli(bachelor ? 0.9 : 0.78);
    const int weeks = rng.bernoulli(0.95) ? 50 + static_cast<int>(rng.below(3)) : 30 + static_cast<int>(rng.below(20));
    const std::array<int, 4> hour_mid{40, 45, 52, 62};
    const int uhrs = rng.bernoulli(0.96) ? hour_mid[hrs] : 20 + static_cast<int>(rng.below(15));

    double gap = -0.24 + (bachelor ? 0.10 : 0.0) - (married ? 0.07 : 0.0) - (child18 ? 0.05 : 0.0) +
                 (rc == 1 ? 0.06 : 0.0) + (occ == 5 ? 0.04 : 0.0) - (occ == 2 ? 0.05 : 0.0);
    double log_weekly = 5.55 + 0.07 * educ + 0.028 * exper - 0.0005 * exper * exper +
                        (married ? 0.06 : 0.0) + (occ == 0 ? 0.15 : 0.0) + (occ == 5 ? 0.12 : 0.0) -
                        (occ == 3 ? 0.2 : 0.0) + (ind == 5 ? 0.1 : 0.0) - (ind == 2 ? 0.12 : 0.0) +
                        0.06 * static_cast<double>(hrs) + (msa ? 0.08 : 0.0) - (rc == 1 ? 0.08 : 0.0) -
                        (eng == 2 ? 0.1 : 0.0) + (female ? gap : 0.0) + 0.42 * rng.normal();
    // a few very low earners fall under the minimum-wage rule
    if (rng.bernoulli(0.02)) log_weekly = std::log(120.0 + 100.0 * rng.uniform());
    const double annual = std::exp(log_weekly) * 52.0;

    csv::write_row(out, {fmt2(annual), female ? "1" : "0", marital.levels[mar], child4 ? "1" : "0",
                         child18 ? "1" : "0", race.levels[rc], hispanic ? "1" : "0", english.levels[eng],
                         std::to_string(exper), std::to_string(educ), veteran ? "1" : "0",
                         industry.levels[ind], occupation.levels[occ], hours.levels[hrs],
                         region.levels[reg], msa ? "1" : "0", std::to_string(age), std::to_string(weeks),
                         std::to_string(uhrs)});
  }
  return out.str();
}

std::vector<dataprep::ColumnSchema> acs_like_schema() {
  using dataprep::ColumnKind;
  using dataprep::ColumnRole;
  auto col = [](std::string name, ColumnKind kind, ColumnRole role, std::optional<std::string> base = {}) {
    return dataprep::ColumnSchema{std::move(name), kind, std::move(base), role};
  };
  return {
      col("incwage", ColumnKind::continuous, ColumnRole::outcome),
      col("female", ColumnKind::binary, ColumnRole::treatment),
      col("marital", ColumnKind::categorical, ColumnRole::moderator, "never_married"),
      col("child18", ColumnKind::binary, ColumnRole::moderator),
      col("race", ColumnKind::categorical, ColumnRole::moderator, "white"),
      col("english", ColumnKind::categorical, ColumnRole::moderator, "only_english"),
      col("exper", ColumnKind::continuous, ColumnRole::moderator),
      col("veteran", ColumnKind::binary, ColumnRole::moderator),
      col("occupation", ColumnKind::categorical, ColumnRole::moderator, "management"),
      col("educ_years", ColumnKind::continuous, ColumnRole::moderator),
      col("msa", ColumnKind::binary, ColumnRole::metadata),
      col("age", ColumnKind::continuous, ColumnRole::metadata),
      col("wkswork", ColumnKind::continuous, ColumnRole::metadata),
      col("uhrswork", ColumnKind::continuous, ColumnRole::metadata),
  };
}

std::vector<dataprep::DerivedRule> acs_like_derived() {
  return {dataprep::DerivedRule::parse("exper_sq", "square(exper) / 50")};
}

}  // namespace hdgap::synth
