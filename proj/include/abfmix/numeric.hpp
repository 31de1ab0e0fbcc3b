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

#ifndef ABFMIX_NUMERIC_HPP
#define ABFMIX_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace abfmix {

/// log(exp(a) + exp(b)) without overflow. Either argument may be -inf.
inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) {
    return b;
  }
  if (b == -std::numeric_limits<double>::infinity()) {
    return a;
  }
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// log(sum(exp(values))). Returns -inf for an empty range or all -inf entries.
inline double log_sum_exp(std::span<const double> values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    hi = std::max(hi, v);
  }
  if (!std::isfinite(hi)) {
    return hi;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += std::exp(v - hi);
  }
  return hi + std::log(sum);
}

}  // namespace abfmix

#endif  // ABFMIX_NUMERIC_HPP
