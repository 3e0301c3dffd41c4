#include "anesmpc/text_matrix.hpp"

#include "anesmpc/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace anesmpc {

std::string format_double(double value, int digits) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, digits);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError("not a number: '" + std::string(token) + "'");
  }
  return value;
}

namespace {

double read_value(std::istream& is) {
  std::string token;
  if (!(is >> token)) throw ConfigError("matrix file truncated");
  return parse_double(token);
}

Eigen::Index read_extent(std::istream& is) {
  long long v = -1;
  if (!(is >> v) || v < 0) throw ConfigError("matrix file: bad size header");
  return static_cast<Eigen::Index>(v);
}

}  // namespace

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& is) {
  const Eigen::Index rows = read_extent(is);
  const Eigen::Index cols = read_extent(is);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = read_value(is);
  return m;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  write_matrix(os, m);
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  return read_matrix(is);
}

}  // namespace anesmpc
