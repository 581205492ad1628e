#include "hdgap/frame_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hdgap/errors.hpp"

namespace hdgap::io {
namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw DataError(path.string() + ": truncated design file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) put_le<double>(out, m(i, j));
  if (!out) throw DataError("failed writing " + path.string());
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError(path.string() + ": not an HDGF design file");
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != kFormatVersion)
    throw DataError(path.string() + ": unsupported format version " + std::to_string(version));
  const auto rows = get_le<std::uint64_t>(in, path);
  const auto cols = get_le<std::uint64_t>(in, path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = get_le<double>(in, path);
  return m;
}

nlohmann::ordered_json dimensions_json(const dataprep::DimensionReport& dims) {
  nlohmann::ordered_json j;
  j["n"] = dims.n;
  j["p1"] = dims.p1;
  j["p2"] = dims.p2;
  j["p"] = dims.p;
  j["dropped_columns"] = dims.dropped_columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::object();
  for (const auto& [reason, count] : dims.dropped_rows) rows[reason] = count;
  j["dropped_rows"] = rows;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_frame(const std::filesystem::path& dir, const dataprep::ModelFrame& frame) {
  std::filesystem::create_directories(dir);
  const auto n = frame.y.size();
  Eigen::MatrixXd design(n, 2 + frame.x.cols() + frame.z.cols());
  design.col(0) = frame.y;
  design.col(1) = frame.d;
  design.middleCols(2, frame.x.cols()) = frame.x;
  design.rightCols(frame.z.cols()) = frame.z;
  write_matrix(dir / "design.bin", design);

  std::ostringstream labels;
  labels << "y:" << frame.outcome_name << '\n' << "d:" << frame.treatment_name << '\n';
  for (const auto& l : frame.x_labels) labels << "x:" << l << '\n';
  for (const auto& l : frame.z_labels) labels << "z:" << l << '\n';
  write_text(dir / "labels.txt", labels.str());
  write_text(dir / "dimensions.json", dimensions_json(frame.dims).dump(2) + "\n");
}

dataprep::ModelFrame read_frame(const std::filesystem::path& dir) {
  const Eigen::MatrixXd design = read_matrix(dir / "design.bin");
  std::istringstream labels(read_text(dir / "labels.txt"));
  dataprep::ModelFrame frame;
  std::string line;
  std::vector<char> roles;
  while (std::getline(labels, line)) {
    if (line.size() < 2 || line[1] != ':') throw DataError("malformed label line '" + line + "'");
    const char role = line[0];
    const std::string label = line.substr(2);
    switch (role) {
      case 'y': frame.outcome_name = label; break;
      case 'd': frame.treatment_name = label; break;
      case 'x': frame.x_labels.push_back(label); break;
      case 'z': frame.z_labels.push_back(label); break;
      default: throw DataError("unknown label role in '" + line + "'");
    }
    roles.push_back(role);
  }
  const auto p1 = static_cast<Eigen::Index>(frame.x_labels.size());
  const auto p2 = static_cast<Eigen::Index>(frame.z_labels.size());
  if (design.cols() != 2 + p1 + p2 || roles.size() != static_cast<std::size_t>(design.cols()))
    throw DataError(dir.string() + ": labels do not match design columns");
  frame.y = design.col(0);
  frame.d = design.col(1);
  frame.x = design.middleCols(2, p1);
  frame.z = design.rightCols(p2);

  const auto dims = nlohmann::json::parse(read_text(dir / "dimensions.json"));
  frame.dims.n = dims.at("n").get<std::size_t>();
  frame.dims.p1 = dims.at("p1").get<std::size_t>();
  frame.dims.p2 = dims.at("p2").get<std::size_t>();
  frame.dims.p = dims.at("p").get<std::size_t>();
  frame.dims.dropped_columns = dims.at("dropped_columns").get<std::vector<std::string>>();
  for (const auto& [k, v] : dims.at("dropped_rows").items()) frame.dims.dropped_rows[k] = v.get<std::size_t>();
  return frame;
}

}  // namespace hdgap::io
