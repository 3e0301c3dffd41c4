#pragma once

#include "anesmpc/config.hpp"
#include "anesmpc/problem.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>

namespace testing {

inline std::filesystem::path source_dir() { return ANESMPC_SOURCE_DIR; }
inline std::filesystem::path sample_patient() { return source_dir() / "data/patient_f56_180cm_92kg.ini"; }
inline std::filesystem::path sample_config() { return source_dir() / "data/controller.ini"; }
inline std::filesystem::path test_data(const std::string& name) { return source_dir() / "tests/data" / name; }

// built once per test binary; the invariant set takes a moment
inline const anesmpc::ControlSetup& sample_setup() {
  static const anesmpc::ControlSetup s =
      anesmpc::build_setup(anesmpc::load_patient(sample_patient()), anesmpc::load_controller_config(sample_config()));
  return s;
}

template <int R, int C>
Eigen::Matrix<double, R, C> row_major(const double (&v)[R * C]) {
  Eigen::Matrix<double, R, C> m;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) m(i, j) = v[i * C + j];
  return m;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("anesmpc_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
