#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace testutil {

inline std::filesystem::path tmp_dir(const std::string& name) {
  const auto dir = std::filesystem::path(SIGNMS_TEST_TMP) / name;
  std::filesystem::create_directories(dir);
  return dir;
}

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

}  // namespace testutil
