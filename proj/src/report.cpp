#include "hdgap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "hdgap/csv.hpp"
#include "hdgap/errors.hpp"
#include "hdgap/frame_io.hpp"
#include "hdgap/stats.hpp"

namespace hdgap::report {
namespace {

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw DataError("invalid number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw DataError("invalid number '" + s + "'");
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Round numbers for axis ticks covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6.0) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step)
    out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  return out;
}

}  // namespace

std::vector<double> default_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 99; ++k) grid.push_back(k / 100.0);
  return grid;
}

QuantileCurve quantile_curve(const Eigen::VectorXd& effects, const Eigen::VectorXd& halfwidth,
                             const std::vector<double>& grid) {
  if (effects.size() == 0) throw DataError("quantile curve of an empty profile");
  if (halfwidth.size() != effects.size()) throw DataError("quantile curve: band length mismatch");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(effects.size()));
  for (Eigen::Index i = 0; i < effects.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return effects(a) < effects(b); });

  QuantileCurve curve;
  std::vector<double> levels = grid;
  std::sort(levels.begin(), levels.end());
  for (double q : levels) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile grid levels must lie in (0, 1)");
    const auto i = order[stats::order_statistic_index(order.size(), q)];
    curve.levels.push_back(q);
    curve.effect.push_back(effects(i));
    curve.lower.push_back(effects(i) - halfwidth(i));
    curve.upper.push_back(effects(i) + halfwidth(i));
  }
  std::size_t neg = 0;
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < effects.size(); ++i) {
    neg += effects(i) + halfwidth(i) < 0.0;
    pos += effects(i) - halfwidth(i) > 0.0;
  }
  curve.share_significant_negative = static_cast<double>(neg) / static_cast<double>(effects.size());
  curve.share_significant_positive = static_cast<double>(pos) / static_cast<double>(effects.size());
  return curve;
}

std::vector<std::string> groupable_variables(const std::vector<dsinfer::EffectRow>& table) {
  std::set<std::string> vars;
  for (const auto& row : table) {
    const auto terms = dataprep::parse_label(row.label);
    if (terms.size() == 1 && row.label != dataprep::kInterceptLabel) vars.insert(terms[0].variable);
  }
  return {vars.begin(), vars.end()};
}

IntervalPlotData effect_interval_plot(const std::vector<dsinfer::EffectRow>& table,
                                      const std::string& variable) {
  IntervalPlotData data;
  data.variable = variable;
  for (const auto& row : table) {
    const auto terms = dataprep::parse_label(row.label);
    if (terms.size() != 1 || terms[0].variable != variable || row.label == dataprep::kInterceptLabel)
      continue;
    IntervalRow r;
    r.variable = variable;
    r.level = terms[0].level.value_or("");
    r.estimate = row.estimate;
    r.se = row.se;
    r.low = row.simultaneous_low;
    r.high = row.simultaneous_high;
    r.significant = row.significant;
    data.rows.push_back(std::move(r));
  }
  if (data.rows.empty()) {
    std::string avail;
    for (const auto& v : groupable_variables(table)) avail += (avail.empty() ? "" : ", ") + v;
    throw DataError("unknown group variable '" + variable + "'; available: " + avail);
  }
  std::stable_sort(data.rows.begin(), data.rows.end(),
                   [](const auto& a, const auto& b) { return a.estimate < b.estimate; });
  return data;
}

std::string interval_csv(const IntervalPlotData& data) {
  std::ostringstream out;
  csv::write_row(out, {"variable", "level", "estimate", "se", "simultaneous_low", "simultaneous_high", "significant"});
  for (const auto& r : data.rows) {
    csv::write_row(out, {r.variable, r.level, csv::format_double(r.estimate), csv::format_double(r.se),
                         csv::format_double(r.low), csv::format_double(r.high), r.significant ? "1" : "0"});
  }
  return out.str();
}

IntervalPlotData parse_interval_csv(const std::string& text) {
  const csv::Table t = csv::parse(text);
  if (t.header.size() != 7 || t.header[0] != "variable")
    throw DataError("not an interval plot CSV");
  IntervalPlotData data;
  for (const auto& row : t.rows) {
    IntervalRow r;
    r.variable = row[0];
    r.level = row[1];
    r.estimate = parse_double(row[2]);
    r.se = parse_double(row[3]);
    r.low = parse_double(row[4]);
    r.high = parse_double(row[5]);
    r.significant = row[6] == "1";
    data.variable = r.variable;
    data.rows.push_back(std::move(r));
  }
  return data;
}

// The significance shares are curve-level values repeated on every row.
std::string quantile_curve_csv(const QuantileCurve& curve) {
  std::ostringstream out;
  csv::write_row(out, {"level", "effect", "lower", "upper", "share_significant_negative",
                       "share_significant_positive"});
  const std::string neg = csv::format_double(curve.share_significant_negative);
  const std::string pos = csv::format_double(curve.share_significant_positive);
  for (std::size_t k = 0; k < curve.levels.size(); ++k) {
    csv::write_row(out, {csv::format_double(curve.levels[k]), csv::format_double(curve.effect[k]),
                         csv::format_double(curve.lower[k]), csv::format_double(curve.upper[k]), neg, pos});
  }
  return out.str();
}

QuantileCurve parse_quantile_curve_csv(const std::string& text) {
  const csv::Table t = csv::parse(text);
  if (t.header != std::vector<std::string>{"level", "effect", "lower", "upper",
                                           "share_significant_negative", "share_significant_positive"})
    throw DataError("not a quantile curve CSV");
  QuantileCurve curve;
  for (const auto& row : t.rows) {
    curve.levels.push_back(parse_double(row[0]));
    curve.effect.push_back(parse_double(row[1]));
    curve.lower.push_back(parse_double(row[2]));
    curve.upper.push_back(parse_double(row[3]));
    curve.share_significant_negative = parse_double(row[4]);
    curve.share_significant_positive = parse_double(row[5]);
  }
  return curve;
}

std::string effects_table_csv(const std::vector<dsinfer::EffectRow>& table) {
  std::ostringstream out;
  csv::write_row(out, {"label", "estimate", "se", "pointwise_low", "pointwise_high",
                       "simultaneous_low", "simultaneous_high", "significant"});
  for (const auto& r : table) {
    csv::write_row(out, {r.label, csv::format_double(r.estimate), csv::format_double(r.se),
                         csv::format_double(r.pointwise_low), csv::format_double(r.pointwise_high),
                         csv::format_double(r.simultaneous_low), csv::format_double(r.simultaneous_high),
                         r.significant ? "1" : "0"});
  }
  return out.str();
}

SvgFigure quantile_figure(const QuantileCurve& curve, const std::string& title) {
  SvgFigure fig;
  fig.kind = SvgKind::line_with_band;
  fig.title = title;
  fig.x_label = "quantile";
  fig.y_label = "effect (log points)";
  fig.series.x = curve.levels;
  fig.series.y = curve.effect;
  fig.series.low = curve.lower;
  fig.series.high = curve.upper;
  return fig;
}

SvgFigure interval_figure(const IntervalPlotData& data) {
  SvgFigure fig;
  fig.kind = SvgKind::points_with_intervals;
  fig.title = data.variable;
  fig.x_label = "level (ordered by estimate)";
  fig.y_label = "change in gap (log points)";
  for (std::size_t k = 0; k < data.rows.size(); ++k) {
    const auto& r = data.rows[k];
    fig.series.x.push_back(static_cast<double>(k));
    fig.series.y.push_back(r.estimate);
    fig.series.low.push_back(r.low);
    fig.series.high.push_back(r.high);
    fig.category_labels.push_back(r.level.empty() ? r.variable : r.level);
  }
  return fig;
}

std::string render_svg(const SvgFigure& fig, const SvgStyle& style) {
  const auto& s = fig.series;
  const double left = style.margin;
  const double right = style.width - style.margin / 2.0;
  const double top = style.margin / 2.0;
  // rotated category labels need room below the axis
  const double bottom = style.height - style.margin - (fig.kind == SvgKind::points_with_intervals ? 56.0 : 0.0);

  double xmin = 0.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  if (!s.y.empty()) {
    xmin = *std::min_element(s.x.begin(), s.x.end());
    xmax = *std::max_element(s.x.begin(), s.x.end());
    ymin = *std::min_element(s.y.begin(), s.y.end());
    ymax = *std::max_element(s.y.begin(), s.y.end());
    for (double v : s.low) ymin = std::min(ymin, v);
    for (double v : s.high) ymax = std::max(ymax, v);
    if (fig.zero_reference) {
      ymin = std::min(ymin, 0.0);
      ymax = std::max(ymax, 0.0);
    }
    if (fig.kind == SvgKind::points_with_intervals) {
      xmin -= 0.5;
      xmax += 0.5;
    }
    if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
    if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }
  auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (right - left); };
  auto py = [&](double v) { return bottom - (v - ymin) / (ymax - ymin) * (bottom - top); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
    << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height
    << "\" font-family=\"" << xml_escape(style.font_family) << "\" font-size=\"12\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height
    << "\" fill=\"#ffffff\"/>\n";
  if (!fig.title.empty())
    o << "<text x=\"" << fmt((left + right) / 2) << "\" y=\"" << fmt(top - 10)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(fig.title) << "</text>\n";

  // axes
  o << "<g stroke=\"#000000\" stroke-width=\"1\">\n";
  o << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(bottom) << "\" x2=\"" << fmt(right)
    << "\" y2=\"" << fmt(bottom) << "\"/>\n";
  o << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left)
    << "\" y2=\"" << fmt(bottom) << "\"/>\n";
  o << "</g>\n";
  o << "<g class=\"y-ticks\">\n";
  for (double t : ticks(ymin, ymax)) {
    o << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(py(t)) << "\" x2=\"" << fmt(left)
      << "\" y2=\"" << fmt(py(t)) << "\" stroke=\"#000000\"/>";
    o << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(t) + 4)
      << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  o << "</g>\n";
  o << "<g class=\"x-ticks\">\n";
  if (fig.kind == SvgKind::line_with_band) {
    for (double t : ticks(xmin, xmax)) {
      o << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << fmt(bottom) << "\" x2=\"" << fmt(px(t))
        << "\" y2=\"" << fmt(bottom + 4) << "\" stroke=\"#000000\"/>";
      o << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(bottom + 16)
        << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    }
  } else {
    for (std::size_t k = 0; k < fig.category_labels.size(); ++k) {
      const double x = px(s.x[k]);
      o << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(bottom + 12)
        << "\" text-anchor=\"end\" transform=\"rotate(-45 " << fmt(x) << ' ' << fmt(bottom + 12)
        << ")\">" << xml_escape(fig.category_labels[k]) << "</text>\n";
    }
  }
  o << "</g>\n";
  o << "<text x=\"" << fmt((left + right) / 2) << "\" y=\"" << fmt(style.height - 8.0)
    << "\" text-anchor=\"middle\">" << xml_escape(fig.x_label) << "</text>\n";
  o << "<text x=\"14\" y=\"" << fmt((top + bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << fmt((top + bottom) / 2) << ")\">" << xml_escape(fig.y_label) << "</text>\n";

  if (fig.zero_reference && ymin <= 0.0 && ymax >= 0.0) {
    o << "<line class=\"reference\" x1=\"" << fmt(left) << "\" y1=\"" << fmt(py(0.0)) << "\" x2=\""
      << fmt(right) << "\" y2=\"" << fmt(py(0.0)) << "\" stroke=\"" << style.reference_color
      << "\" stroke-dasharray=\"4 3\"/>\n";
  }

  const bool has_band = s.low.size() == s.y.size() && s.high.size() == s.y.size() && !s.y.empty();
  if (fig.kind == SvgKind::line_with_band && !s.y.empty()) {
    if (has_band) {
      o << "<polygon class=\"band\" fill=\"" << style.band_fill << "\" stroke=\"none\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k) o << fmt(px(s.x[k])) << ',' << fmt(py(s.high[k])) << ' ';
      for (std::size_t k = s.x.size(); k-- > 0;) o << fmt(px(s.x[k])) << ',' << fmt(py(s.low[k])) << ' ';
      o << "\"/>\n";
    }
    o << "<polyline class=\"effect\" fill=\"none\" stroke=\"" << style.line_color
      << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) o << fmt(px(s.x[k])) << ',' << fmt(py(s.y[k])) << ' ';
    o << "\"/>\n";
  } else if (fig.kind == SvgKind::points_with_intervals) {
    o << "<g class=\"intervals\" stroke=\"" << style.line_color << "\">\n";
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      const double x = px(s.x[k]);
      if (has_band)
        o << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(py(s.low[k])) << "\" x2=\"" << fmt(x)
          << "\" y2=\"" << fmt(py(s.high[k])) << "\"/>";
      o << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(py(s.y[k])) << "\" r=\"3\" fill=\""
        << style.line_color << "\"/>\n";
    }
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::filesystem::path& path, const SvgFigure& figure, const SvgStyle& style) {
  try {
    io::write_text(path, render_svg(figure, style));
  } catch (const DataError& e) {
    throw DataError(std::string("SVG output failed for ") + path.string() + ": " + e.what());
  }
}

}  // namespace hdgap::report
