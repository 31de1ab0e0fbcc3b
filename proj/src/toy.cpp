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

#include <abfmix/toy.hpp>

#include <abfmix/error.hpp>
#include <abfmix/numeric.hpp>

#include <array>
#include <cmath>

namespace abfmix {

namespace {

/// -log[w N(x; -a, 1) + (1 - w) N(x; a, 1)] and its derivative.
struct TwoWell {
  double left_weight = 0.5;
  double center = 2.0;

  [[nodiscard]] double value(double x) const {
    const std::array<double, 2> terms{std::log(left_weight) - 0.5 * (x + center) * (x + center),
                                      std::log(1.0 - left_weight) - 0.5 * (x - center) * (x - center)};
    return -log_sum_exp(terms);
  }

  [[nodiscard]] double derivative(double x) const {
    const double a = std::log(left_weight) - 0.5 * (x + center) * (x + center);
    const double b = std::log(1.0 - left_weight) - 0.5 * (x - center) * (x - center);
    const double log_total = log_add(a, b);
    return std::exp(a - log_total) * (x + center) + std::exp(b - log_total) * (x - center);
  }
};

bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

class TwoModeLine final : public TargetModel {
 public:
  explicit TwoModeLine(TwoWell well) : well_(well) {}

  [[nodiscard]] std::size_t dimension() const override { return 1; }
  [[nodiscard]] bool in_support(std::span<const double> x) const override {
    return x.size() == 1 && all_finite(x);
  }
  [[nodiscard]] std::optional<double> potential(std::span<const double> x) const override {
    if (!in_support(x)) {
      return std::nullopt;
    }
    return well_.value(x[0]);
  }
  [[nodiscard]] double partial(std::span<const double> x, std::size_t index) const override {
    if (!in_support(x)) {
      throw OutOfSupport();
    }
    if (index != 0) {
      throw ConfigError("unknown coordinate index " + std::to_string(index));
    }
    return well_.derivative(x[0]);
  }
  [[nodiscard]] std::string coordinate_name(std::size_t index) const override {
    if (index != 0) {
      throw ConfigError("unknown coordinate index " + std::to_string(index));
    }
    return "x";
  }

 private:
  TwoWell well_;
};

class TwoModePlane final : public TargetModel {
 public:
  explicit TwoModePlane(TwoWell well) : well_(well) {}

  [[nodiscard]] std::size_t dimension() const override { return 2; }
  [[nodiscard]] bool in_support(std::span<const double> x) const override {
    return x.size() == 2 && all_finite(x);
  }
  [[nodiscard]] std::optional<double> potential(std::span<const double> x) const override {
    if (!in_support(x)) {
      return std::nullopt;
    }
    const double w = x[1] * x[1] - 1.0;
    return well_.value(x[0]) + barrier(x[0]) * w * w;
  }
  [[nodiscard]] double partial(std::span<const double> x, std::size_t index) const override {
    if (!in_support(x)) {
      throw OutOfSupport();
    }
    const double w = x[1] * x[1] - 1.0;
    if (index == 0) {
      return well_.derivative(x[0]) + x[0] * w * w;
    }
    if (index == 1) {
      return 4.0 * barrier(x[0]) * x[1] * w;
    }
    throw ConfigError("unknown coordinate index " + std::to_string(index));
  }
  [[nodiscard]] std::string coordinate_name(std::size_t index) const override {
    if (index > 1) {
      throw ConfigError("unknown coordinate index " + std::to_string(index));
    }
    return index == 0 ? "x" : "y";
  }

 private:
  static double barrier(double x) { return 1.0 + 0.5 * x * x; }

  TwoWell well_;
};

}  // namespace

ToyTarget toy_target(const std::string& name) {
  ToyTarget toy;
  toy.name = name;
  if (name == "two_mode_1d") {
    toy.model = std::make_shared<TwoModeLine>(TwoWell{0.5, 2.0});
    toy.z_min = -5.0;
    toy.z_max = 5.0;
    toy.step = 1.0;
    toy.start = {-2.0};
    return toy;
  }
  if (name == "two_mode_2d") {
    toy.model = std::make_shared<TwoModePlane>(TwoWell{0.3, 2.0});
    toy.z_min = -5.0;
    toy.z_max = 5.0;
    toy.step = 0.5;
    toy.start = {-2.0, 1.0};
    return toy;
  }
  throw ConfigError("unknown toy target '" + name + "'");
}

std::vector<std::string> toy_target_names() { return {"two_mode_1d", "two_mode_2d"}; }

}  // namespace abfmix
