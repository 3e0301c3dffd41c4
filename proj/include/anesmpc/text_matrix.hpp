#pragma once

// Plain-text dense matrix format: a "rows cols" header line followed by one
// line per row. Values are written with 17 significant digits so that a
// write/read cycle reproduces every double bit-exactly.

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace anesmpc {

/// Shortest-exact is not required here; `digits` significant digits, "C" locale.
std::string format_double(double value, int digits = 17);

/// Parses a full token as a double; throws ConfigError on garbage.
double parse_double(std::string_view token);

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& is);

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

}  // namespace anesmpc
