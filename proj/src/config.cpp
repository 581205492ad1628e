#include "hdgap/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>

#include "hdgap/errors.hpp"

namespace hdgap::config {
namespace {

namespace pt = boost::property_tree;
using dataprep::ColumnKind;
using dataprep::ColumnRole;
using dataprep::FilterKind;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item = trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Section accessor that reports the offending key.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> text(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  std::string require(const std::string& key) const {
    auto v = text(key);
    if (!v || v->empty()) throw ConfigError("[" + name_ + "] " + key + " is required");
    return *v;
  }

  std::optional<double> number(const std::string& key) const {
    const auto v = text(key);
    if (!v || v->empty()) return std::nullopt;
    double out = 0.0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size() || !std::isfinite(out))
      throw ConfigError("[" + name_ + "] " + key + " = '" + *v + "' is not a number");
    return out;
  }

  template <class Int>
  std::optional<Int> integer(const std::string& key) const {
    const auto v = text(key);
    if (!v || v->empty()) return std::nullopt;
    Int out{};
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size())
      throw ConfigError("[" + name_ + "] " + key + " = '" + *v + "' is not an integer");
    return out;
  }

  std::optional<bool> flag(const std::string& key) const {
    const auto v = text(key);
    if (!v || v->empty()) return std::nullopt;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    throw ConfigError("[" + name_ + "] " + key + " = '" + *v + "' is not a boolean");
  }

  std::vector<std::pair<std::string, std::string>> entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    if (!tree_) return out;
    for (const auto& [k, v] : *tree_) out.emplace_back(k, trim(v.data()));
    return out;
  }

  std::string error(const std::string& key, const std::string& what) const {
    return "[" + name_ + "] " + key + ": " + what;
  }

  const std::string& name() const { return name_; }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

Section section(const pt::ptree& root, const std::string& name) {
  const auto it = root.find(name);
  return Section(it == root.not_found() ? nullptr : &it->second, name);
}

ColumnKind parse_kind(const Section& s, const std::string& key, const std::string& v) {
  if (v == "continuous") return ColumnKind::continuous;
  if (v == "binary") return ColumnKind::binary;
  if (v == "categorical") return ColumnKind::categorical;
  throw ConfigError(s.error(key, "unknown column kind '" + v + "'"));
}

ColumnRole parse_role(const Section& s, const std::string& key, const std::string& v) {
  if (v == "outcome") return ColumnRole::outcome;
  if (v == "treatment") return ColumnRole::treatment;
  if (v == "moderator") return ColumnRole::moderator;
  if (v == "metadata") return ColumnRole::metadata;
  throw ConfigError(s.error(key, "unknown column role '" + v + "'"));
}

Eigen::VectorXd leading(const Section& s, const std::string& key, std::size_t size) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  const auto v = s.text(key);
  if (!v) return out;
  const auto items = split_list(*v);
  if (items.size() > size)
    throw ConfigError(s.error(key, "has " + std::to_string(items.size()) + " entries, dimension is " +
                                       std::to_string(size)));
  for (std::size_t k = 0; k < items.size(); ++k) {
    try {
      std::size_t used = 0;
      out(static_cast<Eigen::Index>(k)) = std::stod(items[k], &used);
      if (used != items[k].size()) throw std::invalid_argument(items[k]);
    } catch (const std::exception&) {
      throw ConfigError(s.error(key, "'" + items[k] + "' is not a number"));
    }
  }
  return out;
}

void read_filters(const Section& s, RunConfig& cfg) {
  const std::string age = s.text("age_column").value_or("age");
  const std::string hours = s.text("hours_column").value_or("uhrswork");
  const std::string weeks = s.text("weeks_column").value_or("wkswork");
  const std::string income = s.text("income_column").value_or("");
  auto add = [&](const char* key, FilterKind kind, const std::string& column) {
    if (const auto v = s.number(key)) cfg.filters.push_back({kind, *v, column, std::nullopt});
  };
  add("min_age", FilterKind::min_age, age);
  add("max_age", FilterKind::max_age, age);
  add("min_annual_income", FilterKind::min_annual_income, income);
  add("full_time_hours", FilterKind::full_time_hours, hours);
  add("full_year_weeks", FilterKind::full_year_weeks, weeks);
  static const std::vector<std::string> known{"age_column", "hours_column", "weeks_column", "income_column",
                                              "min_age", "max_age", "min_annual_income", "full_time_hours",
                                              "full_year_weeks"};
  for (const auto& [key, value] : s.entries()) {
    if (std::find(known.begin(), known.end(), key) != known.end()) continue;
    if (key.rfind("custom_", 0) != 0)
      throw ConfigError(s.error(key, "unknown filter (custom rules are named custom_<name>)"));
    dataprep::FilterRule rule;
    rule.kind = FilterKind::custom_predicate;
    rule.predicate = dataprep::Predicate::parse(value);
    cfg.filters.push_back(std::move(rule));
  }
}

void read_model(const Section& s, RunConfig& cfg) {
  if (const auto v = s.text("controls")) {
    if (*v == "interactions") cfg.frame.controls = dataprep::ControlsPolicy::interactions;
    else if (*v == "main_effects") cfg.frame.controls = dataprep::ControlsPolicy::main_effects;
    else throw ConfigError(s.error("controls", "expected interactions or main_effects"));
  }
  auto& pen = cfg.model.penalty;
  if (const auto v = s.number("penalty_c")) pen.c = *v;
  if (const auto v = s.number("penalty_gamma")) pen.gamma = *v;
  if (const auto v = s.number("lambda")) pen.lambda = *v;
  if (const auto v = s.integer<int>("refinements")) pen.refinements = *v;
  if (const auto v = s.flag("penalize_main_effect")) cfg.model.penalize_treatment_main_effect = *v;
  if (const auto v = s.number("solver_tol")) cfg.model.solver.tol = *v;
  if (const auto v = s.integer<int>("max_sweeps")) cfg.model.solver.max_sweeps = *v;
  if (!(pen.c > 0.0)) throw ConfigError(s.error("penalty_c", "must be positive"));
  if (pen.gamma && !(*pen.gamma > 0.0 && *pen.gamma < 1.0))
    throw ConfigError(s.error("penalty_gamma", "must lie in (0, 1)"));
  if (pen.lambda && *pen.lambda < 0.0) throw ConfigError(s.error("lambda", "must be nonnegative"));
  if (pen.refinements < 0) throw ConfigError(s.error("refinements", "must be nonnegative"));
}

void read_bootstrap(const Section& s, bootstrap::BootstrapConfig& b) {
  if (const auto v = s.integer<int>("replications")) b.replications = *v;
  if (const auto v = s.integer<std::uint64_t>("seed")) b.seed = *v;
  if (const auto v = s.number("level")) b.level = *v;
  if (const auto v = s.text("multiplier")) {
    if (*v == "normal") b.multiplier = bootstrap::Multiplier::normal;
    else if (*v == "mammen") b.multiplier = bootstrap::Multiplier::mammen;
    else throw ConfigError(s.error("multiplier", "expected normal or mammen"));
  }
  try {
    bootstrap::validate(b);
  } catch (const ConfigError& e) {
    throw ConfigError("[" + s.name() + "] " + e.what());
  }
}

SimulateConfig read_simulate(const Section& s, const RunConfig& cfg) {
  SimulateConfig sim;
  auto& dgp = sim.spec.dgp;
  dgp.n = s.integer<std::size_t>("n").value_or(dgp.n);
  dgp.p1 = s.integer<std::size_t>("p1").value_or(dgp.p1);
  dgp.p2 = s.integer<std::size_t>("p2").value_or(dgp.p2);
  dgp.sigma = s.number("sigma").value_or(dgp.sigma);
  dgp.rho = s.number("rho").value_or(dgp.rho);
  dgp.propensity_intercept = s.number("propensity_intercept").value_or(0.0);
  dgp.seed = s.integer<std::uint64_t>("seed").value_or(dgp.seed);
  if (const auto v = s.text("noise")) {
    if (*v == "homoscedastic") dgp.noise = synth::NoiseKind::homoscedastic;
    else if (*v == "heteroscedastic") dgp.noise = synth::NoiseKind::heteroscedastic;
    else throw ConfigError(s.error("noise", "expected homoscedastic or heteroscedastic"));
  }
  dgp.beta_true = leading(s, "beta", dgp.p1);
  dgp.delta_true = leading(s, "delta", dgp.p2);
  dgp.propensity = leading(s, "propensity", dgp.p2);
  sim.spec.replications = s.integer<int>("replications").value_or(sim.spec.replications);
  sim.spec.fit = cfg.model;
  sim.spec.bootstrap = cfg.bootstrap;
  if (const auto v = s.integer<int>("bootstrap_replications")) sim.spec.bootstrap.replications = *v;
  if (const auto v = s.flag("profile_bands")) sim.spec.profile_bands = *v;
  if (const auto v = s.text("estimators")) {
    sim.estimators.clear();
    for (const auto& e : split_list(*v)) {
      if (e == "double_selection") sim.estimators.push_back(synth::Estimator::double_selection);
      else if (e == "single_selection") sim.estimators.push_back(synth::Estimator::single_selection);
      else throw ConfigError(s.error("estimators", "unknown estimator '" + e + "'"));
    }
  }
  if (sim.spec.replications < 1) throw ConfigError(s.error("replications", "must be positive"));
  try {
    synth::validate(dgp);
  } catch (const ConfigError& e) {
    throw ConfigError("[" + s.name() + "] " + e.what());
  }
  return sim;
}

}  // namespace

RunConfig load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  pt::ptree root;
  try {
    pt::read_ini(path.string(), root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  static const std::vector<std::string> sections{"data", "columns", "derived", "filters", "model", "bootstrap",
                                                 "subgroups", "decompose", "report", "output", "simulate"};
  for (const auto& [name, _] : root) {
    if (std::find(sections.begin(), sections.end(), name) == sections.end())
      throw ConfigError("unknown config section [" + name + "]");
  }
  // Sections with a fixed key set; the others hold user-named entries.
  static const std::vector<std::pair<std::string, std::vector<std::string>>> keys{
      {"data", {"path", "income_form", "provenance"}},
      {"model",
       {"controls", "penalty_c", "penalty_gamma", "lambda", "refinements", "penalize_main_effect", "solver_tol",
        "max_sweeps"}},
      {"bootstrap", {"replications", "seed", "level", "multiplier"}},
      {"report", {"group_variables", "grid"}},
      {"output", {"dir"}},
      {"simulate",
       {"n", "p1", "p2", "sigma", "rho", "noise", "propensity_intercept", "seed", "beta", "delta", "propensity",
        "replications", "bootstrap_replications", "profile_bands", "estimators"}},
  };
  for (const auto& [name, allowed] : keys) {
    for (const auto& [key, _] : section(root, name).entries())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw ConfigError(section(root, name).error(key, "unknown key"));
  }

  RunConfig cfg;
  cfg.source = path;
  const auto base = std::filesystem::absolute(path).parent_path();

  const Section data = section(root, "data");
  if (data.present()) {
    cfg.data_path = base / data.require("path");
    if (const auto v = data.text("income_form")) {
      if (*v == "annual") cfg.income_form = dataprep::IncomeForm::annual;
      else if (*v == "weekly") cfg.income_form = dataprep::IncomeForm::weekly;
      else throw ConfigError(data.error("income_form", "expected annual or weekly"));
    }
    cfg.provenance = data.text("provenance").value_or("");
    if (!std::filesystem::exists(cfg.data_path))
      throw ConfigError(data.error("path", "file not found: " + cfg.data_path.string()));

    const Section cols = section(root, "columns");
    for (const auto& [name, spec] : cols.entries()) {
      const auto parts = split_list(spec);
      if (parts.size() < 2 || parts.size() > 3)
        throw ConfigError(cols.error(name, "expected 'kind, role[, baseline]'"));
      dataprep::ColumnSchema c;
      c.name = name;
      c.kind = parse_kind(cols, name, parts[0]);
      c.role = parse_role(cols, name, parts[1]);
      if (parts.size() == 3) c.baseline = parts[2];
      cfg.schema.push_back(std::move(c));
    }
    try {
      dataprep::validate_schema(cfg.schema);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("[columns] ") + e.what());
    }
  }

  for (const auto& [name, expr] : section(root, "derived").entries())
    cfg.frame.derived.push_back(dataprep::DerivedRule::parse(name, expr));
  read_filters(section(root, "filters"), cfg);
  read_model(section(root, "model"), cfg);
  read_bootstrap(section(root, "bootstrap"), cfg.bootstrap);

  for (const auto& [name, pred] : section(root, "subgroups").entries())
    cfg.subgroups.push_back({name, dataprep::Predicate::parse(pred)});

  cfg.covariate_sets.push_back(decompose::unconditional());
  for (const auto& [name, vars] : section(root, "decompose").entries()) {
    if (name == "unconditional" || name == "full")
      throw ConfigError(section(root, "decompose").error(name, "is a built-in specification"));
    cfg.covariate_sets.push_back({name, split_list(vars)});
  }
  cfg.covariate_sets.push_back(decompose::full());

  const Section rep = section(root, "report");
  if (const auto v = rep.text("group_variables")) cfg.report_groups = split_list(*v);
  if (const auto v = rep.text("grid")) {
    const auto items = split_list(*v);
    for (const auto& it : items) {
      double q = 0.0;
      const auto res = std::from_chars(it.data(), it.data() + it.size(), q);
      if (res.ec != std::errc() || !(q > 0.0 && q < 1.0))
        throw ConfigError(rep.error("grid", "levels must lie in (0, 1), got '" + it + "'"));
      cfg.grid.push_back(q);
    }
    if (!std::is_sorted(cfg.grid.begin(), cfg.grid.end()))
      throw ConfigError(rep.error("grid", "levels must be ascending"));
  }
  if (cfg.grid.empty()) cfg.grid = report::default_grid();

  if (const auto v = section(root, "output").text("dir")) cfg.output_dir = base / *v;

  const Section sim = section(root, "simulate");
  if (sim.present()) cfg.simulate = read_simulate(sim, cfg);

  if (!data.present() && !sim.present())
    throw ConfigError("config needs a [data] or a [simulate] section");
  return cfg;
}

void apply(RunConfig& cfg, const Overrides& o) {
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) {
    cfg.bootstrap.seed = *o.seed;
    if (cfg.simulate) {
      cfg.simulate->spec.bootstrap.seed = *o.seed;
      cfg.simulate->spec.dgp.seed = *o.seed;
    }
  }
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be positive");
    cfg.bootstrap.threads = *o.threads;
    cfg.model.threads = *o.threads;
    if (cfg.simulate) cfg.simulate->spec.threads = *o.threads;
  }
  if (o.penalty_c) {
    if (!(*o.penalty_c > 0.0)) throw ConfigError("--penalty-c must be positive");
    cfg.model.penalty.c = *o.penalty_c;
    if (cfg.simulate) cfg.simulate->spec.fit.penalty.c = *o.penalty_c;
  }
}

}  // namespace hdgap::config
