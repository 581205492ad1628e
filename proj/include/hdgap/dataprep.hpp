#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hdgap::dataprep {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ColumnKind { continuous, binary, categorical };
enum class ColumnRole { outcome, treatment, moderator, metadata };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  std::optional<std::string> baseline;  // categorical only
  ColumnRole role = ColumnRole::metadata;
};

// Validates names, roles and baselines-declared; throws ConfigError.
void validate_schema(const std::vector<ColumnSchema>& schema);

enum class IncomeForm { annual, weekly };

struct Column {
  ColumnSchema schema;
  std::vector<double> numeric;       // continuous and binary; NaN marks missing
  std::vector<std::string> levels;   // categorical; empty string marks missing
  bool is_missing(std::size_t row) const;
};

struct Dataset {
  std::vector<Column> columns;
  std::size_t rows = 0;
  std::string provenance;
  // Scale of the outcome column: raw annual income or weekly wage.
  IncomeForm outcome_form = IncomeForm::weekly;

  const Column& column(const std::string& name) const;
  Column& column(const std::string& name);
  bool has_column(const std::string& name) const;
  const Column& outcome() const;
  const Column& treatment() const;
  Dataset subset(const std::vector<std::size_t>& keep) const;
};

Dataset load_csv(const std::filesystem::path& path, const std::vector<ColumnSchema>& schema,
                 IncomeForm outcome_form = IncomeForm::weekly, std::string provenance = {});

enum class FilterKind { min_age, max_age, min_annual_income, full_time_hours, full_year_weeks, custom_predicate };

enum class Comparison { lt, le, gt, ge, eq, ne };

// A comparison `column op value`. Categorical columns support eq/ne with a label.
struct Predicate {
  std::string column;
  Comparison op = Comparison::eq;
  std::string value;

  static Predicate parse(const std::string& text);
  std::string to_string() const;
  bool evaluate(const Dataset& ds, std::size_t row) const;
};

struct FilterRule {
  FilterKind kind = FilterKind::custom_predicate;
  double threshold = 0.0;  // years, dollars, hours per week or weeks per year
  std::string column;      // column the threshold applies to
  std::optional<Predicate> predicate;

  std::string name() const;
};

struct FilterReport {
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::map<std::string, std::size_t> missing_by_column;
  std::size_t dropped_missing = 0;
  std::vector<std::pair<std::string, std::size_t>> dropped_by_rule;
};

// Listwise deletion over schema columns, then every rule in order. The
// outcome is converted to the weekly scale (annual / 52) on return.
Dataset apply_filters(const Dataset& ds, const std::vector<FilterRule>& rules,
                      FilterReport* report = nullptr);

// Weekly wage equals annual earnings divided by 52 weeks.
inline constexpr double kWeeksPerYear = 52.0;

struct DerivedRule {
  std::string name;
  std::vector<std::string> sources;  // one source squares it, two multiply
  double divisor = 1.0;

  // Parses "square(exper) / 50" or "product(a, b)" with optional "/ k".
  static DerivedRule parse(const std::string& name, const std::string& expression);
};

// One term of an encoded label: a variable with an optional level.
struct LabelTerm {
  std::string variable;
  std::optional<std::string> level;
  bool operator==(const LabelTerm&) const = default;
};

inline constexpr const char* kInterceptLabel = "(intercept)";
inline constexpr const char* kConstantLabel = "(constant)";

// "var", "var=level", "a*b=level" ... round-trips with format_label.
std::vector<LabelTerm> parse_label(const std::string& label);
std::string format_label(const std::vector<LabelTerm>& terms);

struct EncodedMatrix {
  MatrixXd values;                  // n x k, columns sorted by label
  std::vector<std::string> labels;  // "var" or "var=level"
};

// Moderator columns plus derived columns: k-1 dummies per categorical
// (baseline omitted), binary and continuous pass through.
EncodedMatrix encode(const Dataset& ds, const std::vector<DerivedRule>& derived = {});

struct ControlBlock {
  MatrixXd z;
  std::vector<std::string> labels;
  std::vector<std::string> dropped;  // zero-variance products, in generation order
  std::size_t products_generated = 0;
};

// Constant, the initial regressors, then all pairwise products a*b (a < b in
// label order) with zero-variance products dropped.
ControlBlock expand_interactions(const EncodedMatrix& cols);

enum class ControlsPolicy { interactions, main_effects };

struct FrameOptions {
  std::vector<DerivedRule> derived;
  ControlsPolicy controls = ControlsPolicy::interactions;
};

struct DimensionReport {
  std::size_t n = 0;
  std::size_t p1 = 0;
  std::size_t p2 = 0;
  std::size_t p = 0;  // p1 + p2 + 1
  std::vector<std::string> dropped_columns;
  std::map<std::string, std::size_t> dropped_rows;
};

struct ModelFrame {
  VectorXd y;  // log weekly wage
  VectorXd d;  // treatment indicator
  MatrixXd x;  // intercept + encoded moderators
  MatrixXd z;  // controls
  std::vector<std::string> x_labels;
  std::vector<std::string> z_labels;
  std::string outcome_name;
  std::string treatment_name;
  DimensionReport dims;

  std::size_t rows() const { return static_cast<std::size_t>(y.size()); }
  // Target regressors d * x_j, n x p1.
  MatrixXd targets() const;
};

// Expects filtered data (see apply_filters); rows with nonpositive wages
// are rejected and counted under "nonpositive_wage".
ModelFrame build_model_frame(const Dataset& ds, const FrameOptions& opts = {},
                             const FilterReport* filter_report = nullptr);

struct RowSplit {
  std::string name;
  Predicate predicate;
};

// Row indices per split; throws ConfigError unless the splits partition the rows.
std::vector<std::vector<std::size_t>> partition_rows(const Dataset& ds,
                                                     const std::vector<RowSplit>& splits);

}  // namespace hdgap::dataprep
