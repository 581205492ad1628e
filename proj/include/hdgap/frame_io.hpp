#pragma once

#include <filesystem>
#include <json.hpp>

#include "hdgap/dataprep.hpp"

namespace hdgap::io {

// Columnar binary layout: "HDGF", u32 version, u64 rows, u64 cols, then
// column-major little-endian f64 values.
inline constexpr char kMagic[4] = {'H', 'D', 'G', 'F'};
inline constexpr std::uint32_t kFormatVersion = 1;

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

nlohmann::ordered_json dimensions_json(const dataprep::DimensionReport& dims);

// Writes design.bin (columns y, d, X, Z), labels.txt and dimensions.json.
void write_frame(const std::filesystem::path& dir, const dataprep::ModelFrame& frame);
dataprep::ModelFrame read_frame(const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace hdgap::io
