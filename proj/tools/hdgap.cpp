#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include "hdgap/config.hpp"
#include "hdgap/errors.hpp"
#include "hdgap/frame_io.hpp"
#include "hdgap/log.hpp"
#include "hdgap/pipeline.hpp"
#include "hdgap/synth.hpp"

namespace fs = std::filesystem;
using namespace hdgap;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, data_error = 3, numerical_error = 4 };

const char* level_name(log::Level l) {
  switch (l) {
    case log::Level::debug: return "debug";
    case log::Level::info: return "info";
    case log::Level::warn: return "warn";
    case log::Level::error: return "error";
  }
  return "?";
}

// stderr gets warnings (everything with --verbose); run.log gets info and up.
struct LogSetup {
  std::mutex mu;
  std::ofstream file;
  bool verbose = false;

  void install() {
    log::set_level(log::Level::info);
    log::set_sink([this](log::Level l, std::string_view msg) {
      std::lock_guard lock(mu);
      if (verbose || l >= log::Level::warn) std::cerr << level_name(l) << ": " << msg << '\n';
      if (file) file << level_name(l) << ": " << msg << '\n' << std::flush;
    });
  }

  void open(const fs::path& dir, const std::string& command, bool truncate) {
    fs::create_directories(dir);
    std::lock_guard lock(mu);
    file.open(dir / "run.log", truncate ? std::ios::trunc : std::ios::app);
    file << "== " << command << " ==\n";
  }
};

std::set<std::string> parse_formats(const std::vector<std::string>& raw) {
  std::set<std::string> out;
  for (const auto& item : raw) {
    std::size_t start = 0;
    while (start <= item.size()) {
      const auto comma = item.find(',', start);
      const std::string f = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (f == "csv" || f == "json" || f == "svg") out.insert(f);
      else if (!f.empty()) throw ConfigError("--format accepts csv, json or svg, got '" + f + "'");
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (out.empty()) out = {"csv", "json", "svg"};
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hdgap: heterogeneous treatment-gap estimation with post-selection inference"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", pipeline::kVersion);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> penalty_c;
  std::vector<std::string> formats;
  bool verbose = false;
  app.add_option("-c,--config", config_path, "Analysis config (INI)");
  app.add_option("-o,--out", out, "Output directory (overrides [output] dir)");
  app.add_option("--seed", seed, "Bootstrap seed (and DGP seed for simulate)");
  app.add_option("--threads", threads, "Worker threads; results do not depend on it");
  app.add_option("--format", formats, "Artifact formats: csv, json, svg (comma-separated)");
  app.add_option("--penalty-c", penalty_c, "Penalty level c (overrides [model] penalty_c)");
  app.add_flag("-v,--verbose", verbose, "Echo progress messages to stderr");

  struct Command {
    const char* name;
    const char* help;
  };
  const std::vector<Command> commands{
      {"prepare", "Load, filter and encode the data; write the model frames"},
      {"fit", "Double-selection fit and multiplier bootstrap per group"},
      {"decompose", "Oaxaca-Blinder decompositions and wage ratios"},
      {"report", "Quantile curves and interval plots"},
      {"simulate", "Monte Carlo study from the [simulate] section"},
      {"summary", "Print a digest of the results directory"},
      {"run", "prepare, fit, decompose and report in one go"},
  };
  for (const auto& c : commands) app.add_subcommand(c.name, c.help);

  auto* gen = app.add_subcommand("generate-sample", "Write the synthetic ACS-like sample");
  std::size_t rows = 1000;
  std::uint64_t sample_seed = 20240101;
  std::string sample_path;
  gen->add_option("--rows", rows, "Number of rows")->capture_default_str();
  gen->add_option("--sample-seed", sample_seed, "Generator seed")->capture_default_str();
  gen->add_option("path", sample_path, "Destination CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::config_error;
  }

  LogSetup logging;
  logging.verbose = verbose;
  logging.install();

  try {
    if (gen->parsed()) {
      if (rows == 0) throw ConfigError("--rows must be positive");
      const fs::path p(sample_path);
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      io::write_text(p, synth::acs_like_csv(rows, sample_seed));
      return Exit::ok;
    }
    if (config_path.empty()) throw ConfigError("--config is required");

    const std::string command = app.get_subcommands().front()->get_name();
    pipeline::Context ctx;
    ctx.cfg = config::load(config_path);
    if (out) ctx.overrides.out = fs::path(*out);
    ctx.overrides.seed = seed;
    ctx.overrides.threads = threads;
    ctx.overrides.penalty_c = penalty_c;
    config::apply(ctx.cfg, ctx.overrides);
    ctx.formats = parse_formats(formats);

    if (command != "summary")
      logging.open(ctx.cfg.output_dir, command, command == "run" || command == "prepare");

    if (command == "prepare") pipeline::prepare(ctx);
    else if (command == "fit") pipeline::fit(ctx);
    else if (command == "decompose") pipeline::decompose(ctx);
    else if (command == "report") pipeline::report(ctx);
    else if (command == "simulate") pipeline::simulate(ctx);
    else if (command == "run") pipeline::run(ctx);
    else if (command == "summary") std::cout << pipeline::summary(ctx);
    return Exit::ok;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return Exit::config_error;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return Exit::data_error;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return Exit::numerical_error;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return Exit::data_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::failure;
  }
}
