#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "hdgap/config.hpp"

namespace hdgap::pipeline {

inline constexpr const char* kVersion = "0.1.0";

struct Context {
  config::RunConfig cfg;
  config::Overrides overrides;
  std::set<std::string> formats{"csv", "json", "svg"};
};

// Subgroup names, or {"all"} when the config declares none.
std::vector<std::string> group_names(const config::RunConfig& cfg);

// Each step reads the previous step's artifacts from the output directory
// and refreshes manifest.json when done.
void prepare(const Context& ctx);
void fit(const Context& ctx);
void decompose(const Context& ctx);
void report(const Context& ctx);
void simulate(const Context& ctx);
void run(const Context& ctx);  // prepare, fit, decompose, report

// Human-readable digest of the artifacts present under the output directory.
std::string summary(const Context& ctx);

void write_manifest(const Context& ctx);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace hdgap::pipeline
