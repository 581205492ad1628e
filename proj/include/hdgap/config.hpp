#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hdgap/bootstrap.hpp"
#include "hdgap/dataprep.hpp"
#include "hdgap/decompose.hpp"
#include "hdgap/dsinfer.hpp"
#include "hdgap/synth.hpp"

namespace hdgap::config {

struct SimulateConfig {
  synth::MonteCarloSpec spec;
  std::vector<synth::Estimator> estimators{synth::Estimator::double_selection};
};

struct RunConfig {
  std::filesystem::path source;  // the config file itself
  std::filesystem::path data_path;
  dataprep::IncomeForm income_form = dataprep::IncomeForm::annual;
  std::string provenance;
  std::vector<dataprep::ColumnSchema> schema;
  std::vector<dataprep::FilterRule> filters;
  dataprep::FrameOptions frame;
  dsinfer::DoubleSelectionConfig model;
  bootstrap::BootstrapConfig bootstrap;
  std::vector<dataprep::RowSplit> subgroups;  // empty: a single group "all"
  std::vector<decompose::CovariateSet> covariate_sets;
  std::vector<std::string> report_groups;
  std::vector<double> grid;
  std::filesystem::path output_dir = "results";
  std::optional<SimulateConfig> simulate;
};

// INI file; relative paths resolve against the config file's directory.
// Throws ConfigError naming the section and key at fault.
RunConfig load(const std::filesystem::path& path);

// Command-line overrides, applied after the file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> penalty_c;
};

void apply(RunConfig& cfg, const Overrides& o);

}  // namespace hdgap::config
