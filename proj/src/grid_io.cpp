#include "pdediscover/grid_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pdediscover {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

double parse_double(std::string_view token, std::size_t line_no) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
    token.remove_suffix(1);
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw GridError("values file line " + std::to_string(line_no) + ": bad number '" +
                    std::string(token) + "'");
  }
  return value;
}

}  // namespace

fs::path write_grid(const SnapshotGrid& grid, const fs::path& meta_path) {
  fs::path values_path = meta_path;
  values_path += ".csv";

  std::ofstream values(values_path);
  if (!values) throw IoError("cannot write " + values_path.string());
  for (Eigen::Index j = 0; j < grid.nx(); ++j) {
    for (Eigen::Index i = 0; i < grid.nt(); ++i) {
      if (i > 0) values << ',';
      values << format_double(grid(j, i));
    }
    values << '\n';
  }
  if (!values) throw IoError("write failed for " + values_path.string());

  json meta = {
      {"field_name", grid.field_name()},
      {"n_x", grid.nx()},
      {"n_t", grid.nt()},
      {"dx", grid.dx()},
      {"dt", grid.dt()},
      {"x0", grid.x0()},
      {"t0", grid.t0()},
      {"values_file", values_path.filename().string()},
  };
  std::ofstream out(meta_path);
  if (!out) throw IoError("cannot write " + meta_path.string());
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + meta_path.string());
  return values_path;
}

SnapshotGrid read_grid(const fs::path& meta_path) {
  std::ifstream in(meta_path);
  if (!in) throw IoError("cannot open grid metadata " + meta_path.string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("grid metadata " + meta_path.string() + " is not valid JSON: " + e.what());
  }

  Eigen::Index nx = 0;
  Eigen::Index nt = 0;
  double dx = 0.0;
  double dt = 0.0;
  double x0 = 0.0;
  double t0 = 0.0;
  std::string name;
  std::string values_file;
  try {
    name = meta.at("field_name").get<std::string>();
    nx = meta.at("n_x").get<Eigen::Index>();
    nt = meta.at("n_t").get<Eigen::Index>();
    dx = meta.at("dx").get<double>();
    dt = meta.at("dt").get<double>();
    x0 = meta.at("x0").get<double>();
    t0 = meta.at("t0").get<double>();
    values_file = meta.at("values_file").get<std::string>();
  } catch (const json::exception& e) {
    throw GridError("grid metadata " + meta_path.string() + ": " + e.what());
  }
  if (nx <= 0 || nt <= 0) throw GridError("grid metadata: non-positive shape");

  const fs::path values_path = meta_path.parent_path() / values_file;
  std::ifstream vin(values_path);
  if (!vin) throw IoError("cannot open values file " + values_path.string());

  Eigen::MatrixXd values(nx, nt);
  std::string line;
  Eigen::Index row = 0;
  std::size_t line_no = 0;
  while (std::getline(vin, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (row >= nx) throw GridError("values file has more than n_x rows");
    std::string_view rest(line);
    Eigen::Index col = 0;
    while (true) {
      const auto comma = rest.find(',');
      const auto token = rest.substr(0, comma);
      if (col >= nt) throw GridError("values file line " + std::to_string(line_no) + " has more than n_t values");
      values(row, col++) = parse_double(token, line_no);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (col != nt) {
      throw GridError("values file line " + std::to_string(line_no) + " has " +
                      std::to_string(col) + " values, expected " + std::to_string(nt));
    }
    ++row;
  }
  if (row != nx) {
    throw GridError("values file has " + std::to_string(row) + " rows, expected " +
                    std::to_string(nx));
  }
  return SnapshotGrid(std::move(values), dx, dt, x0, t0, name);
}

}  // namespace pdediscover
