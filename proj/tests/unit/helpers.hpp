// Copyright 2026 The sqzw Authors
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sqzw/feature_map.hpp"

namespace sqzw::testing {

inline std::vector<float> random_vector(std::size_t n, std::uint32_t seed, float scale = 1.0f) {
  std::mt19937 gen(seed);
  std::normal_distribution<float> dist(0.0f, scale);
  std::vector<float> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

inline FeatureMap random_map(std::size_t c, std::size_t l, std::uint32_t seed, float scale = 1.0f) {
  return FeatureMap(c, l, random_vector(c * l, seed, scale));
}

inline double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - b[i]));
  }
  return a.size() == b.size() ? m : INFINITY;
}

inline double max_abs(std::span<const float> a) {
  double m = 0.0;
  for (float v : a) m = std::max(m, std::fabs(static_cast<double>(v)));
  return m;
}

// log|det J| of f at x, J by central differences in double around a float
// map, determinant by partial-pivot LU.
inline double numerical_log_abs_det(
    const std::function<std::vector<float>(const std::vector<float>&)>& f,
    const std::vector<float>& x, double h = 1e-2) {
  const std::size_t n = x.size();
  Eigen::MatrixXd jac(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<float> up = x, down = x;
    up[j] += static_cast<float>(h);
    down[j] -= static_cast<float>(h);
    const double step = static_cast<double>(up[j]) - down[j];
    const auto fu = f(up), fd = f(down);
    for (std::size_t i = 0; i < n; ++i) jac(i, j) = (static_cast<double>(fu[i]) - fd[i]) / step;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
  const Eigen::MatrixXd u = lu.matrixLU().triangularView<Eigen::Upper>();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::log(std::fabs(u(i, i)));
  return s;
}

inline double relative_error(double got, double want) {
  return std::fabs(got - want) / std::max(1e-12, std::fabs(want));
}

}  // namespace sqzw::testing
