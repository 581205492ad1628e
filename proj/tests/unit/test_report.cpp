#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hdgap/errors.hpp"
#include "hdgap/report.hpp"
#include "hdgap/stats.hpp"
#include "test_util.hpp"

using namespace hdgap;
using namespace hdgap::report;
using Eigen::VectorXd;

namespace {

std::vector<dsinfer::EffectRow> occupation_table() {
  auto row = [](std::string label, double est, double se) {
    dsinfer::EffectRow r;
    r.label = std::move(label);
    r.estimate = est;
    r.se = se;
    r.pointwise_low = est - 1.96 * se;
    r.pointwise_high = est + 1.96 * se;
    r.simultaneous_low = est - 2.9 * se;
    r.simultaneous_high = est + 2.9 * se;
    r.significant = r.simultaneous_high < 0.0 || r.simultaneous_low > 0.0;
    return r;
  };
  return {row("(intercept)", -0.21, 0.03),        row("occupation=sales", -0.08, 0.02),
          row("occupation=service", 0.05, 0.04),  row("occupation=production", -0.12, 0.025),
          row("occupation=office_admin", 0.01, 0.01), row("exper", -0.002, 0.001),
          row("exper*occupation=sales", 0.3, 0.2)};
}

QuantileCurve fixture_curve() {
  VectorXd effects(7);
  effects << -0.31, -0.22, -0.25, -0.1, 0.04, -0.18, 0.12;
  VectorXd half = VectorXd::Constant(7, 0.08);
  half(4) = 0.02;
  return quantile_curve(effects, half, {0.1, 0.25, 0.5, 0.75, 0.9});
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("quantile curve") {
  SUBCASE("median of three effects") {
    VectorXd e(3);
    e << 0.2, -0.3, -0.1;
    const auto c = quantile_curve(e, VectorXd::Zero(3), {0.5});
    CHECK(c.effect[0] == -0.1);
  }
  SUBCASE("constant effects give a flat curve") {
    const auto c = quantile_curve(VectorXd::Constant(50, -0.2), VectorXd::Constant(50, 0.05), default_grid());
    CHECK(c.levels.size() == 99);
    for (std::size_t k = 0; k < c.levels.size(); ++k) {
      CHECK(c.effect[k] == -0.2);
      CHECK(c.lower[k] == doctest::Approx(-0.25));
    }
    CHECK(c.share_significant_negative == 1.0);
  }
  SUBCASE("monotone with band containment on random profiles") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const VectorXd e = hdgap::testing::gaussian_vector(200, seed);
      const VectorXd h = hdgap::testing::gaussian_vector(200, seed + 50).cwiseAbs();
      const auto c = quantile_curve(e, h, default_grid());
      for (std::size_t k = 0; k < c.levels.size(); ++k) {
        CHECK(c.lower[k] <= c.effect[k]);
        CHECK(c.effect[k] <= c.upper[k]);
        if (k > 0) CHECK(c.effect[k] >= c.effect[k - 1]);
      }
      // band of the order statistic: each level carries one individual's band
      const auto idx = stats::order_statistic_index(200, 0.5);
      std::vector<Eigen::Index> order(200);
      for (Eigen::Index i = 0; i < 200; ++i) order[static_cast<std::size_t>(i)] = i;
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return e(a) < e(b); });
      CHECK(c.upper[49] == doctest::Approx(e(order[idx]) + h(order[idx])));
    }
  }
  SUBCASE("shares of significant individuals") {
    VectorXd e(4);
    e << -0.5, -0.01, 0.3, 0.0;
    const auto c = quantile_curve(e, VectorXd::Constant(4, 0.1), {0.5});
    CHECK(c.share_significant_negative == 0.25);
    CHECK(c.share_significant_positive == 0.25);
  }
}

TEST_CASE("interval plot data") {
  const auto table = occupation_table();
  CHECK(groupable_variables(table) == std::vector<std::string>{"exper", "occupation"});
  const IntervalPlotData data = effect_interval_plot(table, "occupation");
  REQUIRE(data.rows.size() == 4);
  for (std::size_t k = 1; k < data.rows.size(); ++k) CHECK(data.rows[k].estimate >= data.rows[k - 1].estimate);
  CHECK(data.rows.front().level == "production");

  SUBCASE("a single level straddling zero is not significant") {
    const IntervalPlotData one = effect_interval_plot(table, "exper");
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].level.empty());
    CHECK(one.rows[0].low < 0.0);
    CHECK(one.rows[0].high > 0.0);
    CHECK_FALSE(one.rows[0].significant);
  }
  SUBCASE("unknown variable lists the available ones") {
    try {
      effect_interval_plot(table, "industry");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("occupation") != std::string::npos);
      CHECK(msg.find("exper") != std::string::npos);
    }
  }
  SUBCASE("csv round-trip is exact") {
    const IntervalPlotData back = parse_interval_csv(interval_csv(data));
    REQUIRE(back.rows.size() == data.rows.size());
    CHECK(back.variable == data.variable);
    for (std::size_t k = 0; k < data.rows.size(); ++k) {
      CHECK(back.rows[k].level == data.rows[k].level);
      CHECK(back.rows[k].estimate == data.rows[k].estimate);
      CHECK(back.rows[k].se == data.rows[k].se);
      CHECK(back.rows[k].low == data.rows[k].low);
      CHECK(back.rows[k].high == data.rows[k].high);
      CHECK(back.rows[k].significant == data.rows[k].significant);
    }
  }
}

TEST_CASE("quantile curve csv round-trip is exact") {
  const VectorXd e = hdgap::testing::gaussian_vector(137, 3) * 0.1;
  const QuantileCurve c = quantile_curve(e, e.cwiseAbs() * 0.7, default_grid());
  const QuantileCurve back = parse_quantile_curve_csv(quantile_curve_csv(c));
  CHECK(back.levels == c.levels);
  CHECK(back.effect == c.effect);
  CHECK(back.lower == c.lower);
  CHECK(back.upper == c.upper);
  CHECK(back.share_significant_negative == c.share_significant_negative);
  CHECK(back.share_significant_positive == c.share_significant_positive);
}

TEST_CASE("effects table csv quotes labels") {
  const std::string text = effects_table_csv(occupation_table());
  CHECK(text.rfind("label,", 0) == 0);
  CHECK(text.find("exper*occupation=sales") != std::string::npos);
}

TEST_CASE("svg rendering") {
  const SvgFigure fig = quantile_figure(fixture_curve(), "Fixture");
  const std::string a = render_svg(fig);
  CHECK(a == render_svg(fig));
  CHECK(a.rfind("<?xml", 0) == 0);
  CHECK(a.find("</svg>") != std::string::npos);

  SUBCASE("matches the golden file") {
    const auto golden = std::filesystem::path(HDGAP_GOLDEN_DIR) / "quantile_fixture.svg";
    if (std::getenv("HDGAP_UPDATE_GOLDEN")) {
      std::ofstream(golden, std::ios::binary) << a;
    }
    REQUIRE(std::filesystem::exists(golden));
    CHECK(read_file(golden) == a);
  }
  SUBCASE("different inputs give different files") {
    SvgFigure other = fig;
    other.series.y[2] += 0.01;
    CHECK(render_svg(other) != a);
  }
  SUBCASE("empty series still draws axes") {
    SvgFigure empty;
    empty.title = "Empty";
    const std::string s = render_svg(empty);
    CHECK(s.find("<line") != std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s.find("nan") == std::string::npos);
  }
  SUBCASE("interval figure") {
    const auto data = effect_interval_plot(occupation_table(), "occupation");
    const std::string s = render_svg(interval_figure(data));
    CHECK(s.find("production") != std::string::npos);
    CHECK(s == render_svg(interval_figure(data)));
  }
  SUBCASE("write failures name the path") {
    try {
      write_svg("/nonexistent-dir/x.svg", fig);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("/nonexistent-dir/x.svg") != std::string::npos);
    }
  }
}
