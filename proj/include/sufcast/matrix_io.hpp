#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sufcast {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Three significant digits, for human-readable summaries.
std::string format_short(double value);

/// Writes a matrix as CSV; `header` (optional) must have one name per column.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header = {});

/// Reads a purely numeric CSV written by `write_matrix_csv`.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, bool has_header = true);

}  // namespace sufcast
