#include <cmath>
#include <set>

#include "doctest.h"
#include "hdgap/dataprep.hpp"
#include "hdgap/errors.hpp"
#include "hdgap/frame_io.hpp"
#include "hdgap/synth.hpp"
#include "test_util.hpp"

using namespace hdgap;
using namespace hdgap::dataprep;
using hdgap::testing::TempDir;

namespace {

ColumnSchema col(std::string name, ColumnKind kind, ColumnRole role, std::optional<std::string> base = {}) {
  return ColumnSchema{std::move(name), kind, std::move(base), role};
}

std::vector<ColumnSchema> small_schema() {
  return {col("wage", ColumnKind::continuous, ColumnRole::outcome),
          col("female", ColumnKind::binary, ColumnRole::treatment),
          col("race", ColumnKind::categorical, ColumnRole::moderator, "A")};
}

const char* kSmallCsv =
    "wage,female,race\n"
    "692.31,1,A\n"
    "800,0,B\n"
    "900.5,1,C\n"
    "750,0,B\n";

Dataset synthetic_sample(const TempDir& tmp, std::size_t rows = 1000) {
  const auto path = tmp.file("acs.csv", synth::acs_like_csv(rows, 20240101));
  return load_csv(path, synth::acs_like_schema(), IncomeForm::annual);
}

std::vector<FilterRule> standard_rules() {
  return {{FilterKind::min_age, 25, "age", {}},
          {FilterKind::max_age, 65, "age", {}},
          {FilterKind::min_annual_income, 12687.50, "", {}},
          {FilterKind::full_time_hours, 35, "uhrswork", {}},
          {FilterKind::full_year_weeks, 50, "wkswork", {}}};
}

}  // namespace

TEST_CASE("load a small file") {
  TempDir tmp("load");
  const Dataset ds = load_csv(tmp.file("s.csv", kSmallCsv), small_schema());
  CHECK(ds.rows == 4);
  CHECK(ds.columns.size() == 3);
  CHECK(ds.outcome().numeric[0] == 692.31);
  CHECK(ds.column("race").levels[2] == "C");
}

TEST_CASE("schema errors name the column") {
  TempDir tmp("schema");
  auto schema = small_schema();
  schema.push_back(col("occupation", ColumnKind::categorical, ColumnRole::moderator, "x"));
  try {
    load_csv(tmp.file("s.csv", kSmallCsv), schema);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("occupation") != std::string::npos);
  }
}

TEST_CASE("parse errors carry coordinates") {
  TempDir tmp("parse");
  const auto path = tmp.file("s.csv", "wage,female,race\n100,1,A\nabc,0,B\n100,2,A\n");
  try {
    load_csv(path, small_schema());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3, column 'wage'") != std::string::npos);
    CHECK(msg.find("row 4, column 'female'") != std::string::npos);
  }
}

TEST_CASE("absent baseline is a configuration error") {
  TempDir tmp("baseline");
  auto schema = small_schema();
  schema[2].baseline = "Z";
  CHECK_THROWS_AS(load_csv(tmp.file("s.csv", kSmallCsv), schema), ConfigError);
}

TEST_CASE("filters") {
  TempDir tmp("filters");
  const auto path = tmp.file("f.csv",
                             "wage,female,age\n"
                             "12687.49,1,30\n"
                             "12687.50,0,30\n"
                             "40000,1,24\n"
                             "40000,0,25\n");
  const std::vector<ColumnSchema> schema{col("wage", ColumnKind::continuous, ColumnRole::outcome),
                                         col("female", ColumnKind::binary, ColumnRole::treatment),
                                         col("age", ColumnKind::continuous, ColumnRole::metadata)};
  const Dataset ds = load_csv(path, schema, IncomeForm::annual);

  SUBCASE("age 24 is dropped under min_age 25") {
    const Dataset out = apply_filters(ds, {{FilterKind::min_age, 25, "age", {}}});
    CHECK(out.rows == 3);
    CHECK(std::find(out.column("age").numeric.begin(), out.column("age").numeric.end(), 24.0) ==
          out.column("age").numeric.end());
  }
  SUBCASE("annual income 12,687.49 is dropped under 12,687.50") {
    FilterReport rep;
    const Dataset out = apply_filters(ds, {{FilterKind::min_annual_income, 12687.50, "", {}}}, &rep);
    CHECK(out.rows == 3);
    CHECK(out.outcome().numeric[0] == doctest::Approx(12687.50 / 52.0));
    REQUIRE(rep.dropped_by_rule.size() == 1);
    CHECK(rep.dropped_by_rule[0].second == 1);
  }
  SUBCASE("weekly outcomes are scaled to annual before the income rule") {
    Dataset weekly = ds;
    weekly.outcome_form = IncomeForm::weekly;
    for (auto& v : weekly.column("wage").numeric) v /= 52.0;
    const Dataset out = apply_filters(weekly, {{FilterKind::min_annual_income, 12687.50, "", {}}});
    CHECK(out.rows == 3);
  }
  SUBCASE("empty rule list keeps the data") {
    const Dataset out = apply_filters(ds, {});
    CHECK(out.rows == ds.rows);
  }
  SUBCASE("absent rule column") {
    CHECK_THROWS_AS(apply_filters(ds, {{FilterKind::full_time_hours, 35, "uhrswork", {}}}), ConfigError);
    FilterRule custom{FilterKind::custom_predicate, 0, "", Predicate::parse("region == x")};
    CHECK_THROWS_AS(apply_filters(ds, {custom}), ConfigError);
  }
  SUBCASE("custom predicate") {
    FilterRule custom{FilterKind::custom_predicate, 0, "", Predicate::parse("age >= 25")};
    CHECK(apply_filters(ds, {custom}).rows == 3);
  }
}

TEST_CASE("listwise deletion reports missingness per column") {
  TempDir tmp("missing");
  const auto path = tmp.file("m.csv", "wage,female,race\n100,1,A\nNA,0,B\n100,,\n100,0,C\n");
  const Dataset ds = load_csv(path, small_schema());
  FilterReport rep;
  const Dataset out = apply_filters(ds, {}, &rep);
  CHECK(out.rows == 2);
  CHECK(rep.dropped_missing == 2);
  CHECK(rep.missing_by_column["wage"] == 1);
  CHECK(rep.missing_by_column["female"] == 1);
  CHECK(rep.missing_by_column["race"] == 1);
}

TEST_CASE("predicate grammar") {
  const Predicate p = Predicate::parse("educ_years<=12");
  CHECK(p.column == "educ_years");
  CHECK(p.op == Comparison::le);
  CHECK(p.value == "12");
  CHECK(Predicate::parse(p.to_string()).to_string() == p.to_string());
  CHECK(Predicate::parse("region = pacific").op == Comparison::eq);
  CHECK_THROWS_AS(Predicate::parse("no operator"), ConfigError);
}

TEST_CASE("encoding") {
  TempDir tmp("encode");
  const Dataset ds = load_csv(tmp.file("s.csv", kSmallCsv), small_schema());
  const EncodedMatrix enc = encode(ds);
  REQUIRE(enc.labels == std::vector<std::string>{"race=B", "race=C"});
  CHECK(enc.values.col(0).sum() == 2.0);
  CHECK(enc.values.col(1).sum() == 1.0);

  SUBCASE("squared experience rescaled by 1/50") {
    const auto path = tmp.file("e.csv", "wage,female,exper\n500,1,10\n600,0,20\n");
    const std::vector<ColumnSchema> schema{col("wage", ColumnKind::continuous, ColumnRole::outcome),
                                           col("female", ColumnKind::binary, ColumnRole::treatment),
                                           col("exper", ColumnKind::continuous, ColumnRole::moderator)};
    const Dataset e = load_csv(path, schema);
    const EncodedMatrix m = encode(e, {DerivedRule::parse("exper_sq", "square(exper) / 50")});
    REQUIRE(m.labels == std::vector<std::string>{"exper", "exper_sq"});
    CHECK(m.values(0, 1) == 2.0);
    CHECK(m.values(1, 1) == 8.0);
  }
  SUBCASE("binary passes through unchanged") {
    const auto path = tmp.file("v.csv", "wage,female,veteran\n500,1,1\n600,0,0\n700,0,1\n");
    const std::vector<ColumnSchema> schema{col("wage", ColumnKind::continuous, ColumnRole::outcome),
                                           col("female", ColumnKind::binary, ColumnRole::treatment),
                                           col("veteran", ColumnKind::binary, ColumnRole::moderator)};
    const EncodedMatrix m = encode(load_csv(path, schema));
    REQUIRE(m.labels == std::vector<std::string>{"veteran"});
    CHECK(m.values.col(0) == Eigen::Vector3d(1, 0, 1));
  }
  SUBCASE("derived rule grammar") {
    const auto r = DerivedRule::parse("ab", "product(a, b) / 4");
    CHECK(r.sources == std::vector<std::string>{"a", "b"});
    CHECK(r.divisor == 4.0);
    CHECK_THROWS_AS(DerivedRule::parse("x", "cube(a)"), ConfigError);
  }
}

TEST_CASE("interaction expansion") {
  EncodedMatrix three;
  three.values = Eigen::MatrixXd(4, 3);
  three.values << 1, 2, 0, 2, 1, 1, 3, 5, 0, 4, 1, 1;
  three.labels = {"a", "b", "c"};
  const ControlBlock block = expand_interactions(three);
  CHECK(block.products_generated == 3);
  CHECK(block.labels ==
        std::vector<std::string>{kConstantLabel, "a", "b", "c", "a*b", "a*c", "b*c"});
  CHECK(block.z.col(4) == three.values.col(0).cwiseProduct(three.values.col(1)));

  SUBCASE("mutually exclusive dummies give an all-zero product") {
    EncodedMatrix dummies;
    dummies.values = Eigen::MatrixXd(4, 2);
    dummies.values << 1, 0, 0, 1, 0, 0, 1, 0;
    dummies.labels = {"race=B", "race=C"};
    const ControlBlock b = expand_interactions(dummies);
    CHECK(b.dropped == std::vector<std::string>{"race=B*race=C"});
    CHECK(b.z.cols() == 3);
  }
}

TEST_CASE("synthetic sample frame accounting") {
  TempDir tmp("sample");
  const Dataset raw = synthetic_sample(tmp);
  CHECK(raw.rows == 1000);
  FilterReport rep;
  const Dataset ds = apply_filters(raw, standard_rules(), &rep);
  const ModelFrame frame = build_model_frame(ds, {synth::acs_like_derived()}, &rep);

  const EncodedMatrix enc = encode(ds, synth::acs_like_derived());
  REQUIRE(enc.labels.size() == 20);
  // independent count of zero-variance products
  std::size_t dropped = 0;
  for (Eigen::Index a = 0; a < 20; ++a)
    for (Eigen::Index b = a + 1; b < 20; ++b) {
      const Eigen::VectorXd prod = enc.values.col(a).cwiseProduct(enc.values.col(b));
      if (prod.maxCoeff() == prod.minCoeff()) ++dropped;
    }
  CHECK(dropped > 0);
  CHECK(static_cast<std::size_t>(frame.z.cols()) == 1 + 20 + (190 - dropped));
  CHECK(frame.dims.p1 == 21);
  CHECK(frame.dims.p2 == static_cast<std::size_t>(frame.z.cols()));
  CHECK(frame.dims.p == frame.dims.p1 + frame.dims.p2 + 1);
  CHECK(frame.dims.n == ds.rows);
  CHECK(frame.dims.dropped_columns.size() == dropped);
  CHECK(frame.dims.dropped_rows.at("min_age") > 0);

  // no zero-variance columns besides the constants
  for (Eigen::Index j = 1; j < frame.x.cols(); ++j) CHECK(frame.x.col(j).maxCoeff() > frame.x.col(j).minCoeff());
  for (Eigen::Index j = 1; j < frame.z.cols(); ++j) CHECK(frame.z.col(j).maxCoeff() > frame.z.col(j).minCoeff());

  SUBCASE("labels round-trip and decode to moderator variables") {
    std::set<std::string> moderators;
    for (const auto& c : ds.columns)
      if (c.schema.role == ColumnRole::moderator) moderators.insert(c.schema.name);
    moderators.insert("exper_sq");
    for (std::size_t j = 1; j < frame.z_labels.size(); ++j) {
      const auto terms = parse_label(frame.z_labels[j]);
      CHECK(format_label(terms) == frame.z_labels[j]);
      CHECK((terms.size() == 1 || terms.size() == 2));
      for (const auto& t : terms) {
        CHECK(moderators.count(t.variable) == 1);
        if (t.level) {
          CHECK(ds.column(t.variable).schema.kind == ColumnKind::categorical);
          CHECK(*t.level != *ds.column(t.variable).schema.baseline);
        }
      }
      if (terms.size() == 2) CHECK(frame.z_labels[j].find('*') != std::string::npos);
    }
  }
  SUBCASE("dummy completeness") {
    const Column& occ = ds.column("occupation");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(enc.values.rows());
    for (std::size_t j = 0; j < enc.labels.size(); ++j)
      if (enc.labels[j].rfind("occupation=", 0) == 0) sum += enc.values.col(static_cast<Eigen::Index>(j));
    for (std::size_t r = 0; r < ds.rows; ++r)
      CHECK(sum(static_cast<Eigen::Index>(r)) == (occ.levels[r] == *occ.schema.baseline ? 0.0 : 1.0));
  }
  SUBCASE("filter monotonicity") {
    std::vector<FilterRule> rules;
    std::size_t previous = apply_filters(raw, rules).rows;
    for (const auto& rule : standard_rules()) {
      rules.push_back(rule);
      const std::size_t now = apply_filters(raw, rules).rows;
      CHECK(now <= previous);
      previous = now;
    }
  }
  SUBCASE("determinism") {
    const Dataset again = apply_filters(synthetic_sample(tmp), standard_rules());
    const ModelFrame f2 = build_model_frame(again, {synth::acs_like_derived()});
    CHECK(f2.y == frame.y);
    CHECK(f2.z == frame.z);
    CHECK(f2.x == frame.x);
    CHECK(f2.z_labels == frame.z_labels);
  }
  SUBCASE("frame files round-trip") {
    io::write_frame(tmp.path() / "frame", frame);
    const ModelFrame back = io::read_frame(tmp.path() / "frame");
    CHECK(back.y == frame.y);
    CHECK(back.d == frame.d);
    CHECK(back.x == frame.x);
    CHECK(back.z == frame.z);
    CHECK(back.x_labels == frame.x_labels);
    CHECK(back.z_labels == frame.z_labels);
    CHECK(back.dims.p == frame.dims.p);
    CHECK(back.dims.dropped_rows == frame.dims.dropped_rows);
  }
}

TEST_CASE("log weekly wage") {
  TempDir tmp("logwage");
  const ModelFrame frame = build_model_frame(load_csv(tmp.file("s.csv", kSmallCsv), small_schema()));
  CHECK(frame.y(0) == doctest::Approx(6.540033832184597).epsilon(1e-14));
  CHECK(frame.y(0) == std::log(692.31));
  CHECK(frame.x_labels == std::vector<std::string>{kInterceptLabel, "race=B", "race=C"});
}

TEST_CASE("degenerate treatment and nonpositive wages") {
  TempDir tmp("degenerate");
  const auto zero_d = tmp.file("z.csv", "wage,female,race\n100,0,A\n200,0,B\n300,0,A\n");
  try {
    build_model_frame(load_csv(zero_d, small_schema()));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()) == "treatment has zero variance");
  }
  const auto neg = tmp.file("n.csv", "wage,female,race\n100,0,A\n-5,1,B\n300,1,B\n0,0,A\n250,0,B\n");
  const ModelFrame frame = build_model_frame(load_csv(neg, small_schema()));
  CHECK(frame.rows() == 3);
  CHECK(frame.dims.dropped_rows.at("nonpositive_wage") == 2);
}

TEST_CASE("row partitions") {
  TempDir tmp("partition");
  const Dataset ds = load_csv(tmp.file("s.csv", kSmallCsv), small_schema());
  const auto parts = partition_rows(ds, {{"a", Predicate::parse("race == A")}, {"rest", Predicate::parse("race != A")}});
  CHECK(parts[0] == std::vector<std::size_t>{0});
  CHECK(parts[1] == std::vector<std::size_t>{1, 2, 3});
  CHECK_THROWS_AS(partition_rows(ds, {{"a", Predicate::parse("race == A")}}), ConfigError);
  CHECK_THROWS_AS(partition_rows(ds, {{"a", Predicate::parse("wage > 0")}, {"b", Predicate::parse("race == B")}}),
                  ConfigError);
}

TEST_CASE("design matrix binary layout") {
  TempDir tmp("matrix");
  Eigen::MatrixXd m(2, 3);
  m << 1.5, -2, 3, 4, 5e-300, 6;
  const auto p = tmp.path() / "m.bin";
  io::write_matrix(p, m);
  CHECK(std::filesystem::file_size(p) == 4 + 4 + 8 + 8 + 6 * 8);
  CHECK(io::read_matrix(p) == m);
  tmp.file("bad.bin", "NOPE");
  CHECK_THROWS_AS(io::read_matrix(tmp.path() / "bad.bin"), DataError);
}
