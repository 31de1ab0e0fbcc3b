// Copyright 2026 The abfmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ABFMIX_TESTS_SUPPORT_HPP
#define ABFMIX_TESTS_SUPPORT_HPP

#include <abfmix/model.hpp>
#include <abfmix/sampler.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace abfmix::testing {

inline Observations random_observations(std::size_t n, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> center(-5.0, 5.0);
  const double a = center(rng);
  const double b = center(rng);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (i % 2 == 0 ? a : b) + noise(rng);
  }
  return Observations::from_values(std::move(y));
}

/// Valid parameter vector with every weight at least 0.05 and moderate precisions.
inline Theta random_theta(int K, const Observations& obs, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Theta theta;
  std::vector<double> w(static_cast<std::size_t>(K));
  double total = 0.0;
  for (double& v : w) {
    v = 0.2 + unit(rng);
    total += v;
  }
  for (int k = 0; k + 1 < K; ++k) {
    theta.q.push_back(w[static_cast<std::size_t>(k)] / total);
  }
  for (int k = 0; k < K; ++k) {
    theta.mu.push_back(obs.min + unit(rng) * obs.range);
    theta.lambda.push_back(std::exp(std::log(0.05) + unit(rng) * std::log(100.0)));
  }
  theta.beta = std::exp(std::log(0.02) + unit(rng) * std::log(100.0));
  return theta;
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("abfmix_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& line : lines) {
    out << line << '\n';
  }
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace abfmix::testing

#endif  // ABFMIX_TESTS_SUPPORT_HPP
