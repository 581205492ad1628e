#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hdgap/dsinfer.hpp"
#include "hdgap/quantile_curve.hpp"

namespace hdgap::report {

struct IntervalRow {
  std::string variable;
  std::string level;  // empty for continuous and binary variables
  double estimate = 0.0;
  double se = 0.0;
  double low = 0.0;   // simultaneous interval
  double high = 0.0;
  bool significant = false;
};

// Rows of one source variable, ascending by estimate.
struct IntervalPlotData {
  std::string variable;
  std::vector<IntervalRow> rows;
};

// Variables present as single-term target labels (interactions excluded).
std::vector<std::string> groupable_variables(const std::vector<dsinfer::EffectRow>& table);

IntervalPlotData effect_interval_plot(const std::vector<dsinfer::EffectRow>& table,
                                      const std::string& variable);

std::string interval_csv(const IntervalPlotData& data);
IntervalPlotData parse_interval_csv(const std::string& text);

std::string quantile_curve_csv(const QuantileCurve& curve);
QuantileCurve parse_quantile_curve_csv(const std::string& text);

std::string effects_table_csv(const std::vector<dsinfer::EffectRow>& table);

struct SvgStyle {
  int width = 720;
  int height = 480;
  int margin = 64;
  std::string band_fill = "#d0d0d0";
  std::string line_color = "#000000";
  std::string reference_color = "#909090";
  std::string font_family = "Helvetica, Arial, sans-serif";
};

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> low;   // optional band or error bars (same length as y)
  std::vector<double> high;
};

enum class SvgKind { line_with_band, points_with_intervals };

struct SvgFigure {
  SvgKind kind = SvgKind::line_with_band;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> category_labels;  // points_with_intervals only
  SvgSeries series;
  bool zero_reference = true;
};

SvgFigure quantile_figure(const QuantileCurve& curve, const std::string& title);
SvgFigure interval_figure(const IntervalPlotData& data);

// Deterministic SVG document: same figure and style give identical bytes.
std::string render_svg(const SvgFigure& figure, const SvgStyle& style = {});
void write_svg(const std::filesystem::path& path, const SvgFigure& figure,
               const SvgStyle& style = {});

}  // namespace hdgap::report
