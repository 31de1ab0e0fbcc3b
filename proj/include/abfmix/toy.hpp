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

#ifndef ABFMIX_TOY_HPP
#define ABFMIX_TOY_HPP

#include <abfmix/model.hpp>

#include <memory>
#include <string>
#include <vector>

namespace abfmix {

/// Low-dimensional targets whose marginal along coordinate 0 is cheap to integrate,
/// used to check the adaptive machinery against quadrature.
struct ToyTarget {
  std::string name;
  std::shared_ptr<const TargetModel> model;
  std::size_t coordinate = 0;
  double z_min = 0.0;
  double z_max = 1.0;
  double step = 1.0;
  std::vector<double> start;
};

/// Registered names:
///  - "two_mode_1d": V(x) = -log[0.5 N(x; -2, 1) + 0.5 N(x; 2, 1)].
///  - "two_mode_2d": V(x, y) = V_a(x) + (1 + x^2/2)(y^2 - 1)^2 where V_a is the
///    asymmetric (0.3, 0.7) version of the 1D mixture; y is metastable for large |x|.
/// Throws ConfigError for unknown names.
ToyTarget toy_target(const std::string& name);

std::vector<std::string> toy_target_names();

}  // namespace abfmix

#endif  // ABFMIX_TOY_HPP
