#include "hdgap/dataprep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <regex>
#include <set>
#include <sstream>

#include "hdgap/csv.hpp"
#include "hdgap/errors.hpp"
#include "hdgap/log.hpp"

namespace hdgap::dataprep {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool valid_identifier(const std::string& name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.';
  });
}

bool zero_variance(const Eigen::Ref<const VectorXd>& col) {
  if (col.size() == 0) return true;
  return col.maxCoeff() == col.minCoeff();
}

std::string kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::binary: return "binary";
    case ColumnKind::categorical: return "categorical";
  }
  return "?";
}

}  // namespace

void validate_schema(const std::vector<ColumnSchema>& schema) {
  std::set<std::string> names;
  int outcomes = 0;
  int treatments = 0;
  for (const auto& col : schema) {
    if (!valid_identifier(col.name))
      throw ConfigError("column name '" + col.name +
                        "' must use only letters, digits, '_' and '.'");
    if (!names.insert(col.name).second) throw ConfigError("duplicate column '" + col.name + "'");
    if (col.kind == ColumnKind::categorical && !col.baseline)
      throw ConfigError("categorical column '" + col.name + "' declares no baseline");
    if (col.kind != ColumnKind::categorical && col.baseline)
      throw ConfigError("column '" + col.name + "' is " + kind_name(col.kind) +
                        " but declares a baseline");
    if (col.role == ColumnRole::outcome) {
      ++outcomes;
      if (col.kind != ColumnKind::continuous)
        throw ConfigError("outcome column '" + col.name + "' must be continuous");
    }
    if (col.role == ColumnRole::treatment) {
      ++treatments;
      if (col.kind != ColumnKind::binary)
        throw ConfigError("treatment column '" + col.name + "' must be binary");
    }
  }
  if (outcomes != 1) throw ConfigError("schema needs exactly one outcome column");
  if (treatments != 1) throw ConfigError("schema needs exactly one treatment column");
}

bool Column::is_missing(std::size_t row) const {
  if (schema.kind == ColumnKind::categorical) return levels[row].empty();
  return std::isnan(numeric[row]);
}

const Column& Dataset::column(const std::string& name) const {
  for (const auto& c : columns)
    if (c.schema.name == name) return c;
  throw ConfigError("unknown column '" + name + "'");
}

Column& Dataset::column(const std::string& name) {
  return const_cast<Column&>(static_cast<const Dataset&>(*this).column(name));
}

bool Dataset::has_column(const std::string& name) const {
  return std::any_of(columns.begin(), columns.end(),
                     [&](const Column& c) { return c.schema.name == name; });
}

const Column& Dataset::outcome() const {
  for (const auto& c : columns)
    if (c.schema.role == ColumnRole::outcome) return c;
  throw ConfigError("dataset has no outcome column");
}

const Column& Dataset::treatment() const {
  for (const auto& c : columns)
    if (c.schema.role == ColumnRole::treatment) return c;
  throw ConfigError("dataset has no treatment column");
}

Dataset Dataset::subset(const std::vector<std::size_t>& keep) const {
  Dataset out;
  out.provenance = provenance;
  out.outcome_form = outcome_form;
  out.rows = keep.size();
  for (const auto& c : columns) {
    Column nc;
    nc.schema = c.schema;
    if (c.schema.kind == ColumnKind::categorical) {
      nc.levels.reserve(keep.size());
      for (auto r : keep) nc.levels.push_back(c.levels[r]);
    } else {
      nc.numeric.reserve(keep.size());
      for (auto r : keep) nc.numeric.push_back(c.numeric[r]);
    }
    out.columns.push_back(std::move(nc));
  }
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<ColumnSchema>& schema,
                 IncomeForm outcome_form, std::string provenance) {
  validate_schema(schema);
  const csv::Table table = csv::read_file(path);
  Dataset ds;
  ds.provenance = provenance.empty() ? path.filename().string() : std::move(provenance);
  ds.outcome_form = outcome_form;
  ds.rows = table.rows.size();

  std::ostringstream errors;
  std::size_t error_count = 0;
  constexpr std::size_t kMaxReported = 20;
  auto report = [&](std::size_t row, const std::string& col, const std::string& cell,
                    const std::string& why) {
    if (error_count++ < kMaxReported)
      errors << "\n  row " << row + 2 << ", column '" << col << "': '" << cell << "' " << why;
  };

  for (const auto& sc : schema) {
    const auto it = std::find(table.header.begin(), table.header.end(), sc.name);
    if (it == table.header.end())
      throw ConfigError("schema column '" + sc.name + "' not found in " + path.string());
    const auto idx = static_cast<std::size_t>(it - table.header.begin());
    Column col;
    col.schema = sc;
    if (sc.kind == ColumnKind::categorical) {
      col.levels.reserve(ds.rows);
      for (std::size_t r = 0; r < ds.rows; ++r) {
        std::string cell = trim(table.rows[r][idx]);
        col.levels.push_back(is_missing_token(cell) ? std::string() : std::move(cell));
      }
    } else {
      col.numeric.reserve(ds.rows);
      for (std::size_t r = 0; r < ds.rows; ++r) {
        const std::string cell = trim(table.rows[r][idx]);
        if (is_missing_token(cell)) {
          col.numeric.push_back(kNaN);
          continue;
        }
        const auto v = parse_number(cell);
        if (!v) {
          report(r, sc.name, cell, "is not a number");
          col.numeric.push_back(kNaN);
        } else if (sc.kind == ColumnKind::binary && *v != 0.0 && *v != 1.0) {
          report(r, sc.name, cell, "is not 0 or 1");
          col.numeric.push_back(kNaN);
        } else {
          col.numeric.push_back(*v);
        }
      }
    }
    ds.columns.push_back(std::move(col));
  }
  if (error_count > 0) {
    std::string msg = std::to_string(error_count) + " unparseable cell(s) in " + path.string() +
                      errors.str();
    if (error_count > kMaxReported) msg += "\n  ...";
    throw DataError(msg);
  }
  if (ds.rows == 0) throw DataError(path.string() + " contains no data rows");
  for (const auto& c : ds.columns) {
    if (c.schema.kind != ColumnKind::categorical) continue;
    if (std::find(c.levels.begin(), c.levels.end(), *c.schema.baseline) == c.levels.end())
      throw ConfigError("baseline '" + *c.schema.baseline + "' of column '" + c.schema.name +
                        "' does not occur in the data");
  }
  return ds;
}

// --- predicates and filters -------------------------------------------------

Predicate Predicate::parse(const std::string& text) {
  static const std::regex re(R"(^\s*([A-Za-z0-9_.]+)\s*(<=|>=|==|!=|<|>|=)\s*(.*?)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("cannot parse predicate '" + text + "'");
  Predicate p;
  p.column = m[1];
  const std::string op = m[2];
  if (op == "<") p.op = Comparison::lt;
  else if (op == "<=") p.op = Comparison::le;
  else if (op == ">") p.op = Comparison::gt;
  else if (op == ">=") p.op = Comparison::ge;
  else if (op == "!=") p.op = Comparison::ne;
  else p.op = Comparison::eq;
  p.value = m[3];
  if (p.value.empty()) throw ConfigError("predicate '" + text + "' has no value");
  return p;
}

std::string Predicate::to_string() const {
  static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
  return column + " " + ops[static_cast<int>(op)] + " " + value;
}

bool Predicate::evaluate(const Dataset& ds, std::size_t row) const {
  const Column& col = ds.column(column);
  if (col.schema.kind == ColumnKind::categorical) {
    if (op == Comparison::eq) return col.levels[row] == value;
    if (op == Comparison::ne) return col.levels[row] != value;
    throw ConfigError("predicate '" + to_string() + "': categorical columns support only == and !=");
  }
  const auto rhs = parse_number(value);
  if (!rhs) throw ConfigError("predicate '" + to_string() + "': value is not numeric");
  const double lhs = col.numeric[row];
  switch (op) {
    case Comparison::lt: return lhs < *rhs;
    case Comparison::le: return lhs <= *rhs;
    case Comparison::gt: return lhs > *rhs;
    case Comparison::ge: return lhs >= *rhs;
    case Comparison::eq: return lhs == *rhs;
    case Comparison::ne: return lhs != *rhs;
  }
  return false;
}

std::string FilterRule::name() const {
  switch (kind) {
    case FilterKind::min_age: return "min_age";
    case FilterKind::max_age: return "max_age";
    case FilterKind::min_annual_income: return "min_annual_income";
    case FilterKind::full_time_hours: return "full_time_hours";
    case FilterKind::full_year_weeks: return "full_year_weeks";
    case FilterKind::custom_predicate:
      return "custom(" + (predicate ? predicate->to_string() : std::string("?")) + ")";
  }
  return "?";
}

Dataset apply_filters(const Dataset& ds, const std::vector<FilterRule>& rules,
                      FilterReport* report) {
  FilterReport rep;
  rep.rows_in = ds.rows;

  for (const auto& rule : rules) {
    if (rule.kind == FilterKind::custom_predicate) {
      if (!rule.predicate) throw ConfigError("custom filter without a predicate");
      if (!ds.has_column(rule.predicate->column))
        throw ConfigError("filter " + rule.name() + " references absent column '" +
                          rule.predicate->column + "'");
      continue;
    }
    if (!std::isfinite(rule.threshold) || rule.threshold < 0.0)
      throw ConfigError("filter " + rule.name() + " needs a finite nonnegative threshold");
    const std::string col = rule.column.empty() && rule.kind == FilterKind::min_annual_income
                                ? ds.outcome().schema.name
                                : rule.column;
    if (col.empty()) throw ConfigError("filter " + rule.name() + " names no column");
    if (!ds.has_column(col))
      throw ConfigError("filter " + rule.name() + " references absent column '" + col + "'");
    if (ds.column(col).schema.kind == ColumnKind::categorical)
      throw ConfigError("filter " + rule.name() + " needs a numeric column, '" + col +
                        "' is categorical");
  }

  std::vector<std::size_t> keep;
  keep.reserve(ds.rows);
  for (std::size_t r = 0; r < ds.rows; ++r) {
    bool missing = false;
    for (const auto& c : ds.columns) {
      if (c.is_missing(r)) {
        ++rep.missing_by_column[c.schema.name];
        missing = true;
      }
    }
    if (missing) ++rep.dropped_missing;
    else keep.push_back(r);
  }

  const std::string outcome_name = ds.outcome().schema.name;
  for (const auto& rule : rules) {
    std::vector<std::size_t> next;
    next.reserve(keep.size());
    const std::string col_name =
        rule.column.empty() && rule.kind == FilterKind::min_annual_income ? outcome_name : rule.column;
    for (auto r : keep) {
      bool pass = true;
      if (rule.kind == FilterKind::custom_predicate) {
        pass = rule.predicate->evaluate(ds, r);
      } else {
        double v = ds.column(col_name).numeric[r];
        switch (rule.kind) {
          case FilterKind::min_age: pass = v >= rule.threshold; break;
          case FilterKind::max_age: pass = v <= rule.threshold; break;
          case FilterKind::min_annual_income:
            if (col_name == outcome_name && ds.outcome_form == IncomeForm::weekly) v *= kWeeksPerYear;
            pass = v >= rule.threshold;
            break;
          case FilterKind::full_time_hours: pass = v >= rule.threshold; break;
          case FilterKind::full_year_weeks: pass = v >= rule.threshold; break;
          case FilterKind::custom_predicate: break;
        }
      }
      if (pass) next.push_back(r);
    }
    rep.dropped_by_rule.emplace_back(rule.name(), keep.size() - next.size());
    keep = std::move(next);
  }

  Dataset out = keep.size() == ds.rows ? ds : ds.subset(keep);
  if (out.outcome_form == IncomeForm::annual) {
    for (auto& c : out.columns) {
      if (c.schema.role != ColumnRole::outcome) continue;
      for (auto& v : c.numeric) v /= kWeeksPerYear;
    }
    out.outcome_form = IncomeForm::weekly;
  }
  rep.rows_out = out.rows;
  if (report) *report = std::move(rep);
  return out;
}

// --- derived columns and labels --------------------------------------------

DerivedRule DerivedRule::parse(const std::string& name, const std::string& expression) {
  static const std::regex re(
      R"(^\s*(square|product)\s*\(\s*([A-Za-z0-9_.]+)\s*(?:,\s*([A-Za-z0-9_.]+)\s*)?\)\s*(?:/\s*([0-9.eE+-]+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(expression, m, re))
    throw ConfigError("cannot parse derived column '" + name + " = " + expression + "'");
  if (!valid_identifier(name)) throw ConfigError("invalid derived column name '" + name + "'");
  DerivedRule rule;
  rule.name = name;
  const std::string fn = m[1];
  if (fn == "square") {
    if (m[3].matched) throw ConfigError("square() takes one column in '" + expression + "'");
    rule.sources = {m[2]};
  } else {
    if (!m[3].matched) throw ConfigError("product() takes two columns in '" + expression + "'");
    rule.sources = {m[2], m[3]};
  }
  if (m[4].matched) {
    const auto v = parse_number(m[4]);
    if (!v || *v == 0.0) throw ConfigError("invalid divisor in '" + expression + "'");
    rule.divisor = *v;
  }
  return rule;
}

std::vector<LabelTerm> parse_label(const std::string& label) {
  std::vector<LabelTerm> terms;
  std::size_t start = 0;
  while (true) {
    const auto star = label.find('*', start);
    const std::string part = label.substr(start, star == std::string::npos ? std::string::npos : star - start);
    const auto eq = part.find('=');
    LabelTerm t;
    t.variable = part.substr(0, eq);
    if (eq != std::string::npos) t.level = part.substr(eq + 1);
    terms.push_back(std::move(t));
    if (star == std::string::npos) break;
    start = star + 1;
  }
  return terms;
}

std::string format_label(const std::vector<LabelTerm>& terms) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += '*';
    out += terms[i].variable;
    if (terms[i].level) out += "=" + *terms[i].level;
  }
  return out;
}

EncodedMatrix encode(const Dataset& ds, const std::vector<DerivedRule>& derived) {
  const std::size_t n = ds.rows;
  std::vector<std::pair<std::string, VectorXd>> cols;

  for (const auto& c : ds.columns) {
    if (c.schema.role != ColumnRole::moderator) continue;
    if (c.schema.kind != ColumnKind::categorical) {
      cols.emplace_back(c.schema.name, Eigen::Map<const VectorXd>(c.numeric.data(), static_cast<Eigen::Index>(n)));
      continue;
    }
    const std::string& baseline = *c.schema.baseline;
    std::set<std::string> levels(c.levels.begin(), c.levels.end());
    if (!levels.count(baseline))
      throw ConfigError("baseline '" + baseline + "' of column '" + c.schema.name +
                        "' does not occur in the data");
    for (const auto& level : levels) {
      if (level == baseline) continue;
      if (level.find('*') != std::string::npos)
        throw ConfigError("level '" + level + "' of column '" + c.schema.name + "' contains '*'");
      VectorXd dummy(static_cast<Eigen::Index>(n));
      for (std::size_t r = 0; r < n; ++r) dummy(static_cast<Eigen::Index>(r)) = c.levels[r] == level ? 1.0 : 0.0;
      cols.emplace_back(c.schema.name + "=" + level, std::move(dummy));
    }
  }

  for (const auto& rule : derived) {
    if (ds.has_column(rule.name)) throw ConfigError("derived column '" + rule.name + "' shadows a data column");
    VectorXd v = VectorXd::Ones(static_cast<Eigen::Index>(n));
    const auto sources = rule.sources.size() == 1
                             ? std::vector<std::string>{rule.sources[0], rule.sources[0]}
                             : rule.sources;
    for (const auto& src : sources) {
      const Column& col = ds.column(src);
      if (col.schema.kind == ColumnKind::categorical)
        throw ConfigError("derived column '" + rule.name + "' uses categorical column '" + src + "'");
      v.array() *= Eigen::Map<const VectorXd>(col.numeric.data(), static_cast<Eigen::Index>(n)).array();
    }
    v /= rule.divisor;
    cols.emplace_back(rule.name, std::move(v));
  }

  std::sort(cols.begin(), cols.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 1; k < cols.size(); ++k) {
    if (cols[k].first == cols[k - 1].first)
      throw ConfigError("duplicate encoded column '" + cols[k].first + "'");
  }

  EncodedMatrix out;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.values.col(static_cast<Eigen::Index>(k)) = cols[k].second;
    out.labels.push_back(cols[k].first);
  }
  return out;
}

ControlBlock expand_interactions(const EncodedMatrix& cols) {
  const Eigen::Index n = cols.values.rows();
  const Eigen::Index k = cols.values.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) order[static_cast<std::size_t>(j)] = j;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return cols.labels[static_cast<std::size_t>(a)] < cols.labels[static_cast<std::size_t>(b)];
  });

  ControlBlock out;
  const std::size_t max_products = static_cast<std::size_t>(k) * static_cast<std::size_t>(k > 0 ? k - 1 : 0) / 2;
  const std::size_t width = 1 + static_cast<std::size_t>(k) + max_products;
  try {
    out.z.resize(n, static_cast<Eigen::Index>(width));
  } catch (const std::bad_alloc&) {
    throw DataError("cannot allocate control block of " + std::to_string(n) + " x " +
                    std::to_string(width));
  }
  Eigen::Index filled = 0;
  out.z.col(filled++).setOnes();
  out.labels.emplace_back(kConstantLabel);
  for (auto j : order) {
    out.z.col(filled++) = cols.values.col(j);
    out.labels.push_back(cols.labels[static_cast<std::size_t>(j)]);
  }
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      ++out.products_generated;
      const std::string label = cols.labels[static_cast<std::size_t>(order[a])] + "*" +
                                cols.labels[static_cast<std::size_t>(order[b])];
      out.z.col(filled) = cols.values.col(order[a]).cwiseProduct(cols.values.col(order[b]));
      if (zero_variance(out.z.col(filled))) {
        out.dropped.push_back(label);
        continue;
      }
      out.labels.push_back(label);
      ++filled;
    }
  }
  out.z.conservativeResize(Eigen::NoChange, filled);
  if (!out.dropped.empty())
    log::info("dropped " + std::to_string(out.dropped.size()) + " zero-variance interaction columns");
  return out;
}

MatrixXd ModelFrame::targets() const { return x.array().colwise() * d.array(); }

ModelFrame build_model_frame(const Dataset& input, const FrameOptions& opts,
                             const FilterReport* filter_report) {
  Dataset ds = input;
  if (ds.outcome_form == IncomeForm::annual) ds = apply_filters(ds, {});

  ModelFrame frame;
  frame.outcome_name = ds.outcome().schema.name;
  frame.treatment_name = ds.treatment().schema.name;

  std::vector<std::size_t> keep;
  std::size_t missing = 0;
  std::size_t nonpositive = 0;
  for (std::size_t r = 0; r < ds.rows; ++r) {
    bool has_missing = false;
    for (const auto& c : ds.columns) has_missing = has_missing || c.is_missing(r);
    if (has_missing) {
      ++missing;
      continue;
    }
    if (!(ds.outcome().numeric[r] > 0.0)) {
      ++nonpositive;
      continue;
    }
    keep.push_back(r);
  }
  if (keep.size() != ds.rows) ds = ds.subset(keep);
  if (nonpositive > 0)
    log::warn(std::to_string(nonpositive) + " row(s) with nonpositive wage rejected");
  if (ds.rows < 2) throw DataError("fewer than two usable rows remain");

  const auto n = static_cast<Eigen::Index>(ds.rows);
  frame.y = Eigen::Map<const VectorXd>(ds.outcome().numeric.data(), n).array().log();
  frame.d = Eigen::Map<const VectorXd>(ds.treatment().numeric.data(), n);
  if (zero_variance(frame.d)) throw DataError("treatment has zero variance");

  EncodedMatrix enc = encode(ds, opts.derived);
  std::vector<std::string> dropped;
  {
    EncodedMatrix kept;
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < enc.values.cols(); ++j) {
      if (zero_variance(enc.values.col(j))) dropped.push_back(enc.labels[static_cast<std::size_t>(j)]);
      else idx.push_back(j);
    }
    kept.values.resize(n, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      kept.values.col(static_cast<Eigen::Index>(k)) = enc.values.col(idx[k]);
      kept.labels.push_back(enc.labels[static_cast<std::size_t>(idx[k])]);
    }
    enc = std::move(kept);
  }
  for (const auto& label : dropped) log::warn("dropped zero-variance column '" + label + "'");

  frame.x.resize(n, enc.values.cols() + 1);
  frame.x.col(0).setOnes();
  frame.x.rightCols(enc.values.cols()) = enc.values;
  frame.x_labels.emplace_back(kInterceptLabel);
  frame.x_labels.insert(frame.x_labels.end(), enc.labels.begin(), enc.labels.end());

  if (opts.controls == ControlsPolicy::interactions) {
    ControlBlock block = expand_interactions(enc);
    frame.z = std::move(block.z);
    frame.z_labels = std::move(block.labels);
    dropped.insert(dropped.end(), block.dropped.begin(), block.dropped.end());
  } else {
    frame.z.resize(n, enc.values.cols() + 1);
    frame.z.col(0).setOnes();
    frame.z.rightCols(enc.values.cols()) = enc.values;
    frame.z_labels.emplace_back(kConstantLabel);
    frame.z_labels.insert(frame.z_labels.end(), enc.labels.begin(), enc.labels.end());
  }

  auto& dims = frame.dims;
  dims.n = ds.rows;
  dims.p1 = static_cast<std::size_t>(frame.x.cols());
  dims.p2 = static_cast<std::size_t>(frame.z.cols());
  dims.p = dims.p1 + dims.p2 + 1;
  dims.dropped_columns = std::move(dropped);
  if (filter_report) {
    dims.dropped_rows["missing"] = filter_report->dropped_missing;
    for (const auto& [rule, count] : filter_report->dropped_by_rule) dims.dropped_rows[rule] += count;
  }
  dims.dropped_rows["missing"] += missing;
  dims.dropped_rows["nonpositive_wage"] = nonpositive;
  return frame;
}

std::vector<std::vector<std::size_t>> partition_rows(const Dataset& ds,
                                                     const std::vector<RowSplit>& splits) {
  std::vector<std::vector<std::size_t>> out(splits.size());
  for (const auto& s : splits) {
    if (!ds.has_column(s.predicate.column))
      throw ConfigError("subgroup '" + s.name + "' references absent column '" + s.predicate.column + "'");
  }
  for (std::size_t r = 0; r < ds.rows; ++r) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < splits.size(); ++k) {
      if (splits[k].predicate.evaluate(ds, r)) {
        out[k].push_back(r);
        ++hits;
      }
    }
    if (hits != 1)
      throw ConfigError("subgroup splits do not partition the data: row " + std::to_string(r) +
                        " matches " + std::to_string(hits) + " subgroup(s)");
  }
  return out;
}

}  // namespace hdgap::dataprep
