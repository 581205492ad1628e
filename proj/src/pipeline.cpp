#include "hdgap/pipeline.hpp"

#include <openssl/evp.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "hdgap/csv.hpp"
#include "hdgap/errors.hpp"
#include "hdgap/frame_io.hpp"
#include "hdgap/log.hpp"
#include "hdgap/random.hpp"
#include "hdgap/report.hpp"
#include "hdgap/stats.hpp"

namespace hdgap::pipeline {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr const char* kInference = "inference.json";

fs::path group_dir(const Context& ctx, const std::string& group) { return ctx.cfg.output_dir / group; }

bool wants(const Context& ctx, const char* format) { return ctx.formats.count(format) > 0; }

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw DataError("missing " + path.string() + "; " + hint);
  try {
    return json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
}

std::string config_hint(const Context& ctx, const std::string& command) {
  return "run `hdgap " + command + " --config " + ctx.cfg.source.string() + "` first";
}

dataprep::ModelFrame load_frame(const Context& ctx, const std::string& group) {
  const fs::path dir = group_dir(ctx, group) / "frame";
  if (!fs::exists(dir / "design.bin"))
    throw DataError("no prepared frame in " + dir.string() + "; " + config_hint(ctx, "prepare"));
  return io::read_frame(dir);
}

std::vector<std::string> labels_of(const std::vector<std::string>& all, const std::vector<Index>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (Index j : idx) out.push_back(all[static_cast<std::size_t>(j)]);
  return out;
}

MatrixXd treated_rows(const dataprep::ModelFrame& f) {
  std::vector<Index> rows;
  for (Index i = 0; i < f.d.size(); ++i)
    if (f.d(i) == 1.0) rows.push_back(i);
  MatrixXd out(static_cast<Index>(rows.size()), f.x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = f.x.row(rows[k]);
  return out;
}

json matrix_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  return m;
}

std::string multiplier_name(bootstrap::Multiplier m) {
  return m == bootstrap::Multiplier::normal ? "normal" : "mammen";
}

json effect_rows_json(const std::vector<dsinfer::EffectRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"label", r.label},
                   {"estimate", r.estimate},
                   {"se", r.se},
                   {"pointwise_low", r.pointwise_low},
                   {"pointwise_high", r.pointwise_high},
                   {"simultaneous_low", r.simultaneous_low},
                   {"simultaneous_high", r.simultaneous_high},
                   {"significant", r.significant}});
  }
  return out;
}

json curve_json(const report::QuantileCurve& c) {
  return {{"levels", c.levels},
          {"effect", c.effect},
          {"lower", c.lower},
          {"upper", c.upper},
          {"share_significant_negative", c.share_significant_negative},
          {"share_significant_positive", c.share_significant_positive}};
}

// Minimal fit state stored in inference.json, enough for reporting.
struct StoredFit {
  dsinfer::DoubleSelectionFit fit;
  std::vector<std::string> labels;
  double cv_coefficients = 0.0;
  double cv_profile = 0.0;
  double level = 0.95;
};

StoredFit load_fit(const Context& ctx, const std::string& group) {
  const json j = read_json(group_dir(ctx, group) / "fit" / kInference, config_hint(ctx, "fit"));
  StoredFit s;
  s.fit.n = j.at("n").get<std::size_t>();
  const auto& targets = j.at("targets");
  s.fit.beta.resize(static_cast<Index>(targets.size()));
  for (std::size_t k = 0; k < targets.size(); ++k) {
    s.labels.push_back(targets[k].at("label").get<std::string>());
    s.fit.beta(static_cast<Index>(k)) = targets[k].at("estimate").get<double>();
  }
  s.fit.vcov = matrix_from_json(j.at("vcov"));
  s.fit.omega = s.fit.vcov * static_cast<double>(s.fit.n);
  s.fit.se = s.fit.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  const auto& jt = j.at("joint_test");
  s.cv_coefficients = jt.at("cv_coefficients").get<double>();
  s.cv_profile = jt.at("cv_profile").get<double>();
  s.level = j.at("bootstrap").at("level").get<double>();
  return s;
}

void log_step(const std::string& step, const std::string& group) { log::info(step + " [" + group + "]"); }

}  // namespace

std::vector<std::string> group_names(const config::RunConfig& cfg) {
  if (cfg.subgroups.empty()) return {"all"};
  std::vector<std::string> out;
  for (const auto& s : cfg.subgroups) out.push_back(s.name);
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* md = EVP_MD_CTX_new();
  if (!md || EVP_DigestInit_ex(md, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(md);
    throw Error("sha256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(md, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(md, digest, &len);
  EVP_MD_CTX_free(md);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  return hex.str();
}

void write_manifest(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  json m;
  m["tool"] = "hdgap";
  m["versions"] = {{"hdgap", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000)},
                   {"rng", Philox::kAlgorithm}};
  m["config"] = {{"file", cfg.source.filename().string()}, {"sha256", sha256_file(cfg.source)}};
  json inputs = json::object();
  if (!cfg.data_path.empty())
    inputs["data"] = {{"file", cfg.data_path.filename().string()}, {"sha256", sha256_file(cfg.data_path)}};
  m["inputs"] = inputs;
  // thread count and output location do not affect results and are left out
  json over = json::object();
  if (ctx.overrides.seed) over["seed"] = *ctx.overrides.seed;
  if (ctx.overrides.penalty_c) over["penalty_c"] = *ctx.overrides.penalty_c;
  m["overrides"] = over;
  std::vector<std::string> fmts(ctx.formats.begin(), ctx.formats.end());
  m["formats"] = fmts;

  std::vector<std::pair<std::string, std::string>> files;
  if (fs::exists(cfg.output_dir)) {
    for (const auto& e : fs::recursive_directory_iterator(cfg.output_dir)) {
      if (!e.is_regular_file()) continue;
      const std::string rel = fs::relative(e.path(), cfg.output_dir).generic_string();
      if (rel == "manifest.json" || rel == "run.log") continue;
      files.emplace_back(rel, sha256_file(e.path()));
    }
  }
  std::sort(files.begin(), files.end());
  json outputs = json::object();
  for (const auto& [rel, hash] : files) outputs[rel] = hash;
  m["outputs"] = outputs;
  write_json(cfg.output_dir / "manifest.json", m);
}

void prepare(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.data_path.empty()) throw ConfigError("prepare needs a [data] section");
  fs::create_directories(cfg.output_dir);
  fs::copy_file(cfg.source, cfg.output_dir / "config.ini", fs::copy_options::overwrite_existing);

  const dataprep::Dataset raw = dataprep::load_csv(cfg.data_path, cfg.schema, cfg.income_form, cfg.provenance);
  dataprep::FilterReport rep;
  const dataprep::Dataset ds = dataprep::apply_filters(raw, cfg.filters, &rep);
  log::info("filters kept " + std::to_string(rep.rows_out) + " of " + std::to_string(rep.rows_in) + " rows");

  json fr;
  fr["provenance"] = raw.provenance;
  fr["rows_in"] = rep.rows_in;
  fr["rows_out"] = rep.rows_out;
  fr["dropped_missing"] = rep.dropped_missing;
  fr["missing_by_column"] = rep.missing_by_column;
  json rules = json::array();
  for (const auto& [name, count] : rep.dropped_by_rule) rules.push_back({{"rule", name}, {"dropped", count}});
  fr["dropped_by_rule"] = rules;

  std::vector<dataprep::Dataset> parts;
  const auto names = group_names(cfg);
  if (cfg.subgroups.empty()) {
    parts.push_back(ds);
  } else {
    for (const auto& idx : dataprep::partition_rows(ds, cfg.subgroups)) parts.push_back(ds.subset(idx));
  }
  json groups = json::object();
  for (std::size_t g = 0; g < parts.size(); ++g) {
    log_step("prepare", names[g]);
    const dataprep::ModelFrame frame = dataprep::build_model_frame(parts[g], cfg.frame);
    io::write_frame(group_dir(ctx, names[g]) / "frame", frame);
    groups[names[g]] = io::dimensions_json(frame.dims);
    log::info(names[g] + ": n=" + std::to_string(frame.dims.n) + " p1=" + std::to_string(frame.dims.p1) +
              " p2=" + std::to_string(frame.dims.p2) + " p=" + std::to_string(frame.dims.p));
  }
  fr["groups"] = groups;
  write_json(cfg.output_dir / "prepare.json", fr);
  write_manifest(ctx);
}

void fit(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  for (const auto& group : group_names(cfg)) {
    const dataprep::ModelFrame frame = load_frame(ctx, group);
    log_step("fit", group);
    const dsinfer::DoubleSelectionFit dsf = dsinfer::double_selection(frame, cfg.model);
    const MatrixXd xf = treated_rows(frame);
    const bootstrap::JointTestResult jt = bootstrap::multiplier_bootstrap(dsf.scores, dsf.beta, cfg.bootstrap, &xf);
    const dsinfer::EffectProfile prof =
        dsinfer::effect_profile(dsf, xf, *jt.cv_profile, cfg.bootstrap.level, cfg.grid);
    const auto table = dsinfer::marginal_effects_table(dsf, frame.x_labels, jt.cv_coefficients, cfg.bootstrap.level);

    json j;
    j["group"] = group;
    j["n"] = dsf.n;
    j["n_treated"] = xf.rows();
    j["dimensions"] = io::dimensions_json(frame.dims);
    j["penalty"] = {{"c", cfg.model.penalty.c},
                    {"gamma", cfg.model.penalty.gamma ? json(*cfg.model.penalty.gamma) : json("0.1/log(n)")},
                    {"lambda", cfg.model.penalty.lambda ? json(*cfg.model.penalty.lambda) : json("rule")},
                    {"refinements", cfg.model.penalty.refinements},
                    {"penalize_main_effect", cfg.model.penalize_treatment_main_effect}};
    j["bootstrap"] = {{"replications", cfg.bootstrap.replications},
                      {"seed", cfg.bootstrap.seed},
                      {"level", cfg.bootstrap.level},
                      {"multiplier", multiplier_name(cfg.bootstrap.multiplier)},
                      {"rng", Philox::kAlgorithm}};
    j["joint_test"] = {{"statistic", jt.statistic},
                       {"critical_value", jt.critical_value},
                       {"p_value", jt.p_value},
                       {"cv_coefficients", jt.cv_coefficients},
                       {"cv_profile", *jt.cv_profile},
                       {"excluded_targets", labels_of(frame.x_labels, jt.excluded_targets)}};
    j["targets"] = effect_rows_json(table);
    j["vcov"] = matrix_json(dsf.vcov);
    j["outcome_support"] = labels_of(frame.z_labels, dsf.outcome_support);
    json per = json::object();
    for (std::size_t k = 0; k < dsf.per_target_supports.size(); ++k)
      per[frame.x_labels[k]] = labels_of(frame.z_labels, dsf.per_target_supports[k]);
    j["per_target_supports"] = per;
    j["union_support"] = labels_of(frame.z_labels, dsf.union_support);
    j["dropped_controls"] = labels_of(frame.z_labels, dsf.dropped_controls);
    j["refit_n_params"] = dsf.refit_n_params;
    json diag = json::array();
    for (const auto& d : dsf.diagnostics)
      diag.push_back({{"regression", d.name},
                      {"lambda", d.lambda},
                      {"sweeps", d.sweeps},
                      {"kkt_violation", d.kkt_violation},
                      {"support_size", d.support_size}});
    j["diagnostics"] = diag;
    j["profile"] = {{"critical_value", prof.critical_value},
                    {"median_effect", prof.quantiles.effect[prof.quantiles.effect.size() / 2]},
                    {"mean_effect", prof.effects.mean()},
                    {"share_significant_negative", prof.quantiles.share_significant_negative},
                    {"share_significant_positive", prof.quantiles.share_significant_positive}};

    const fs::path dir = group_dir(ctx, group) / "fit";
    fs::create_directories(dir);
    write_json(dir / kInference, j);
    if (wants(ctx, "csv")) {
      io::write_text(dir / "effects.csv", report::effects_table_csv(table));
      std::ostringstream out;
      csv::write_row(out, {"individual", "effect", "se", "lower", "upper"});
      for (Index i = 0; i < prof.effects.size(); ++i) {
        csv::write_row(out, {std::to_string(i), csv::format_double(prof.effects(i)),
                             csv::format_double(prof.se_pointwise(i)),
                             csv::format_double(prof.effects(i) - prof.band_halfwidth(i)),
                             csv::format_double(prof.effects(i) + prof.band_halfwidth(i))});
      }
      io::write_text(dir / "profile.csv", out.str());
    }
    log::info(group + ": joint p-value " + csv::format_double(jt.p_value) + ", union support " +
              std::to_string(dsf.union_support.size()));
  }
  write_manifest(ctx);
}

void decompose(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  for (const auto& group : group_names(cfg)) {
    const dataprep::ModelFrame frame = load_frame(ctx, group);
    log_step("decompose", group);
    json specs = json::array();
    std::ostringstream table;
    csv::write_row(table, {"spec", "n_m", "n_f", "total_gap", "explained", "unexplained", "ratio_conditional",
                           "ratio_unconditional"});
    for (const auto& set : cfg.covariate_sets) {
      const auto r = decompose::oaxaca_blinder(frame, set);
      specs.push_back({{"spec", r.spec},
                       {"variables", set.variables},
                       {"n_m", r.groups.n_m},
                       {"n_f", r.groups.n_f},
                       {"total_gap", r.total_gap},
                       {"explained", r.explained},
                       {"unexplained", r.unexplained},
                       {"ratio_conditional", r.ratio_conditional},
                       {"ratio_unconditional", r.ratio_unconditional},
                       {"dropped_m", r.groups.dropped_m},
                       {"dropped_f", r.groups.dropped_f}});
      csv::write_row(table, {r.spec, std::to_string(r.groups.n_m), std::to_string(r.groups.n_f),
                             csv::format_double(r.total_gap), csv::format_double(r.explained),
                             csv::format_double(r.unexplained), csv::format_double(r.ratio_conditional),
                             csv::format_double(r.ratio_unconditional)});
    }
    json j;
    j["group"] = group;
    j["reference"] = "control group (d = 0)";
    j["specifications"] = specs;

    const fs::path inference = group_dir(ctx, group) / "fit" / kInference;
    if (fs::exists(inference)) {
      const StoredFit s = load_fit(ctx, group);
      const bool exact = cfg.model.penalty.lambda && *cfg.model.penalty.lambda == 0.0 &&
                         cfg.frame.controls == dataprep::ControlsPolicy::main_effects;
      const auto rec = decompose::reconcile_mean_effect(s.fit, frame, decompose::full(), exact);
      j["reconciliation"] = {{"mean_effect_treated", rec.mean_effect_treated},
                             {"mean_effect_all", rec.mean_effect_all},
                             {"negative_unexplained", rec.negative_unexplained},
                             {"difference_treated", rec.difference_treated},
                             {"difference_all", rec.difference_all},
                             {"exact_regime", rec.exact_regime}};
    }
    const fs::path dir = group_dir(ctx, group) / "decompose";
    fs::create_directories(dir);
    if (wants(ctx, "json")) write_json(dir / "decomposition.json", j);
    if (wants(ctx, "csv")) io::write_text(dir / "decomposition.csv", table.str());
  }
  write_manifest(ctx);
}

void report(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  for (const auto& group : group_names(cfg)) {
    const dataprep::ModelFrame frame = load_frame(ctx, group);
    const StoredFit s = load_fit(ctx, group);
    log_step("report", group);
    const MatrixXd xf = treated_rows(frame);
    const auto prof = dsinfer::effect_profile(s.fit, xf, s.cv_profile, s.level, cfg.grid);
    const auto table = dsinfer::marginal_effects_table(s.fit, s.labels, s.cv_coefficients, s.level);

    const fs::path dir = group_dir(ctx, group) / "report";
    fs::create_directories(dir);
    if (wants(ctx, "csv")) io::write_text(dir / "quantile_curve.csv", report::quantile_curve_csv(prof.quantiles));
    if (wants(ctx, "json")) write_json(dir / "quantile_curve.json", curve_json(prof.quantiles));
    if (wants(ctx, "svg"))
      report::write_svg(dir / "quantile_curve.svg", report::quantile_figure(prof.quantiles, "Effect quantiles: " + group));
    for (const auto& var : cfg.report_groups) {
      const auto data = report::effect_interval_plot(table, var);
      if (wants(ctx, "csv")) io::write_text(dir / ("intervals_" + var + ".csv"), report::interval_csv(data));
      if (wants(ctx, "svg")) report::write_svg(dir / ("intervals_" + var + ".svg"), report::interval_figure(data));
    }
  }
  write_manifest(ctx);
}

void simulate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (!cfg.simulate) throw ConfigError("simulate needs a [simulate] section");
  fs::create_directories(cfg.output_dir / "simulate");
  if (cfg.data_path.empty())
    fs::copy_file(cfg.source, cfg.output_dir / "config.ini", fs::copy_options::overwrite_existing);
  json results = json::array();
  std::ostringstream table;
  csv::write_row(table, {"estimator", "target", "coverage", "coverage_se", "mean_union_size"});
  for (const auto est : cfg.simulate->estimators) {
    synth::MonteCarloSpec spec = cfg.simulate->spec;
    spec.estimator = est;
    const std::string name = est == synth::Estimator::double_selection ? "double_selection" : "single_selection";
    log::info("simulate [" + name + "] " + std::to_string(spec.replications) + " replications");
    const auto t = synth::monte_carlo(spec);
    const double ks_p = t.p_values.empty()
                            ? 1.0
                            : stats::ks_pvalue(stats::ks_statistic(t.p_values, [](double u) { return std::clamp(u, 0.0, 1.0); }),
                                               t.p_values.size());
    json tks = json::array();
    for (const auto& ts : t.t_stats)
      tks.push_back(ts.empty() ? 1.0 : stats::ks_pvalue(stats::ks_statistic(ts, stats::normal_cdf), ts.size()));
    results.push_back({{"estimator", name},
                       {"replications", t.replications},
                       {"failures", t.failures},
                       {"coverage", t.coverage},
                       {"coverage_se", t.coverage_se},
                       {"joint_rejection", t.joint_rejection},
                       {"joint_rejection_se", t.joint_rejection_se},
                       {"joint_pvalue_ks_uniform", ks_p},
                       {"profile_coverage", t.profile_coverage},
                       {"profile_coverage_se", t.profile_coverage_se},
                       {"tstat_ks_normal", tks},
                       {"mean_union_size", t.mean_union_size}});
    for (std::size_t k = 0; k < t.coverage.size(); ++k)
      csv::write_row(table, {name, std::to_string(k), csv::format_double(t.coverage[k]),
                             csv::format_double(t.coverage_se[k]),
                             csv::format_double(k < t.mean_union_size.size() ? t.mean_union_size[k] : 0.0)});
  }
  const auto& dgp = cfg.simulate->spec.dgp;
  json j;
  j["dgp"] = {{"n", dgp.n}, {"p1", dgp.p1}, {"p2", dgp.p2}, {"sigma", dgp.sigma}, {"rho", dgp.rho},
              {"noise", dgp.noise == synth::NoiseKind::homoscedastic ? "homoscedastic" : "heteroscedastic"},
              {"seed", dgp.seed}};
  j["results"] = results;
  if (wants(ctx, "json")) write_json(cfg.output_dir / "simulate" / "monte_carlo.json", j);
  if (wants(ctx, "csv")) io::write_text(cfg.output_dir / "simulate" / "monte_carlo.csv", table.str());
  write_manifest(ctx);
}

void run(const Context& ctx) {
  prepare(ctx);
  fit(ctx);
  decompose(ctx);
  report(ctx);
}

std::string summary(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::ostringstream out;
  out << std::fixed;
  auto pct = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << 100.0 * v << "%";
    return s.str();
  };
  bool any = false;
  if (!cfg.data_path.empty()) {
    for (const auto& group : group_names(cfg)) {
      const fs::path dir = group_dir(ctx, group);
      if (!fs::exists(dir)) continue;
      any = true;
      out << "== " << group << " ==\n";
      if (fs::exists(dir / "frame" / "dimensions.json")) {
        const json d = json::parse(io::read_text(dir / "frame" / "dimensions.json"));
        out << "  n = " << d["n"].get<std::size_t>() << ", p1 = " << d["p1"].get<std::size_t>()
            << ", p2 = " << d["p2"].get<std::size_t>() << ", p = " << d["p"].get<std::size_t>() << "\n";
      }
      if (fs::exists(dir / "fit" / kInference)) {
        const json j = json::parse(io::read_text(dir / "fit" / kInference));
        const auto& jt = j["joint_test"];
        const auto& pr = j["profile"];
        out << std::setprecision(4) << "  joint test: sup-t " << jt["statistic"].get<double>() << ", p-value "
            << jt["p_value"].get<double>() << " (" << j["bootstrap"]["replications"].get<int>() << " draws)\n";
        out << "  median effect " << pr["median_effect"].get<double>() << ", mean effect "
            << pr["mean_effect"].get<double>() << "\n";
        out << "  significantly negative " << pct(pr["share_significant_negative"].get<double>())
            << ", significantly positive " << pct(pr["share_significant_positive"].get<double>()) << "\n";
        out << "  union support " << j["union_support"].size() << " of " << j["dimensions"]["p2"].get<std::size_t>()
            << " controls\n";
      }
      if (fs::exists(dir / "decompose" / "decomposition.json")) {
        const json j = json::parse(io::read_text(dir / "decompose" / "decomposition.json"));
        for (const auto& s : j["specifications"]) {
          out << std::setprecision(4) << "  " << std::left << std::setw(14) << s["spec"].get<std::string>()
              << std::right << " unexplained " << s["unexplained"].get<double>() << ", ratio "
              << pct(s["ratio_conditional"].get<double>()) << "\n";
        }
      }
    }
  }
  const fs::path mc = cfg.output_dir / "simulate" / "monte_carlo.json";
  if (fs::exists(mc)) {
    any = true;
    const json j = json::parse(io::read_text(mc));
    out << "== simulate ==\n";
    for (const auto& r : j["results"]) {
      double mean_cov = 0.0;
      for (const auto& c : r["coverage"]) mean_cov += c.get<double>();
      if (!r["coverage"].empty()) mean_cov /= static_cast<double>(r["coverage"].size());
      out << std::setprecision(3) << "  " << r["estimator"].get<std::string>() << ": mean coverage " << mean_cov
          << ", joint rejection " << r["joint_rejection"].get<double>() << ", profile coverage "
          << r["profile_coverage"].get<double>() << ", failures " << r["failures"].get<int>() << "\n";
    }
  }
  if (!any) throw DataError("no results under " + cfg.output_dir.string() + "; " + config_hint(ctx, "run"));
  return out.str();
}

}  // namespace hdgap::pipeline
