#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "pdediscover/grid.hpp"

namespace pdediscover {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Grid files come in pairs: a JSON metadata document
//   {"field_name", "n_x", "n_t", "dx", "dt", "x0", "t0", "values_file"}
// and a text file with n_x lines of n_t comma-separated values. values_file is
// resolved relative to the metadata document. Values are written with 17
// significant digits, so write/read is exact.

/// Writes `<meta_path>` and its companion values file; returns the values path.
std::filesystem::path write_grid(const SnapshotGrid& grid, const std::filesystem::path& meta_path);

/// Throws IoError when files cannot be read, GridError when the content is inconsistent.
SnapshotGrid read_grid(const std::filesystem::path& meta_path);

std::string format_double(double value);

}  // namespace pdediscover
