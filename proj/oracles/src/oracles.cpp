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

#include <abfmix_oracles/oracles.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace abfmix_oracles {

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) {
    return b;
  }
  if (b == -std::numeric_limits<double>::infinity()) {
    return a;
  }
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// log of the trapezoid integral of exp(f) over [lo, hi] with `points` nodes.
template <class F>
double log_trapezoid(F f, double lo, double hi, std::size_t points) {
  const double dx = (hi - lo) / static_cast<double>(points - 1);
  double total = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points; ++i) {
    const double end_weight = (i == 0 || i + 1 == points) ? std::log(0.5) : 0.0;
    total = log_add(total, f(lo + dx * static_cast<double>(i)) + end_weight);
  }
  return total + std::log(dx);
}

double log_normal(double x, double mean) {
  return -0.5 * (x - mean) * (x - mean) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_two_well(double x, double left_weight) {
  return log_add(std::log(left_weight) + log_normal(x, -2.0), std::log(1.0 - left_weight) + log_normal(x, 2.0));
}

/// log of the integral over y of exp(-(1 + x^2/2)(y^2 - 1)^2).
double log_transverse(double x, std::size_t points) {
  const double b = 1.0 + 0.5 * x * x;
  return log_trapezoid(
      [b](double y) {
        const double w = y * y - 1.0;
        return -b * w * w;
      },
      -3.5, 3.5, points);
}

double log_marginal(const std::string& name, double x, std::size_t points) {
  if (name == "two_mode_1d") {
    return log_two_well(x, 0.5);
  }
  if (name == "two_mode_2d") {
    return log_two_well(x, 0.3) + log_transverse(x, points);
  }
  throw std::invalid_argument("no oracle for toy target '" + name + "'");
}

double log_gamma_density(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

struct SubsetStats {
  int size = 0;
  double mean = 0.0;
  double scatter = 0.0;
};

/// log of the integral over lambda of Gamma(lambda; alpha, beta) times the likelihood of the
/// subset with its mean integrated against N(m, 1/kappa).
double log_component(const SubsetStats& s, double beta, const NormalGammaPrior& prior, std::size_t points) {
  if (s.size == 0) {
    return 0.0;
  }
  const double n = static_cast<double>(s.size);
  const double center = std::log((prior.alpha + 0.5 * n) / (beta + 0.5 * s.scatter));
  const double shift = (s.mean - prior.m) * (s.mean - prior.m);
  const auto integrand = [&](double v) {
    const double lambda = std::exp(v);
    const double precision = prior.kappa + n * lambda;
    return log_gamma_density(lambda, prior.alpha, beta) + v - 0.5 * n * std::log(2.0 * std::numbers::pi) +
           0.5 * n * v + 0.5 * std::log(prior.kappa / precision) -
           0.5 * (lambda * s.scatter + n * lambda * prior.kappa / precision * shift);
  };
  return log_trapezoid(integrand, center - 30.0, center + 5.0, points);
}

}  // namespace

std::vector<double> toy_free_energy(const std::string& name, std::span<const double> z, std::size_t points) {
  std::vector<double> values;
  values.reserve(z.size());
  for (double x : z) {
    values.push_back(-log_marginal(name, x, points));
  }
  if (!values.empty()) {
    const double lowest = *std::min_element(values.begin(), values.end());
    for (double& v : values) {
      v -= lowest;
    }
  }
  return values;
}

double toy_coordinate_mean(const std::string& name, std::size_t points) {
  const double lo = -12.0;
  const double hi = 12.0;
  const double dx = (hi - lo) / static_cast<double>(points - 1);
  std::vector<double> log_p(points);
  for (std::size_t i = 0; i < points; ++i) {
    log_p[i] = log_marginal(name, lo + dx * static_cast<double>(i), points);
  }
  const double peak = *std::max_element(log_p.begin(), log_p.end());
  double mass = 0.0;
  double first = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double weight = (i == 0 || i + 1 == points) ? 0.5 : 1.0;
    const double p = weight * std::exp(log_p[i] - peak);
    mass += p;
    first += p * (lo + dx * static_cast<double>(i));
  }
  return first / mass;
}

NormalGammaPrior reference_prior(std::span<const double> y) {
  if (y.empty()) {
    throw std::invalid_argument("empty dataset");
  }
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  double sum = 0.0;
  for (double v : y) {
    sum += v;
  }
  NormalGammaPrior prior;
  prior.m = sum / static_cast<double>(y.size());
  prior.kappa = 4.0 / (range * range);
  prior.alpha = 2.0;
  prior.g = 0.2;
  prior.h = 100.0 * prior.g / (prior.alpha * range * range);
  return prior;
}

double log_evidence(std::span<const double> y, int K, const NormalGammaPrior& prior, QuadratureGrid grid) {
  const std::size_t n = y.size();
  if (K < 1 || n == 0 || n > 20) {
    throw std::invalid_argument("log_evidence supports 1 <= K and 1 <= n <= 20");
  }
  double allocations = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    allocations *= K;
  }
  if (allocations > 1e7) {
    throw std::invalid_argument("too many allocations for exact summation");
  }

  const std::size_t subsets = std::size_t{1} << n;
  std::vector<SubsetStats> stats(subsets);
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    SubsetStats& s = stats[mask];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1U) {
        ++s.size;
        sum += y[i];
      }
    }
    if (s.size > 0) {
      s.mean = sum / s.size;
      for (std::size_t i = 0; i < n; ++i) {
        if ((mask >> i) & 1U) {
          s.scatter += (y[i] - s.mean) * (y[i] - s.mean);
        }
      }
    }
  }

  // Enumerate allocations once; each becomes a K-tuple of subset masks plus its Dirichlet weight.
  struct Allocation {
    std::vector<std::size_t> masks;
    double log_weight = 0.0;
  };
  std::vector<Allocation> table;
  std::vector<int> label(n, 0);
  const double log_norm = std::lgamma(static_cast<double>(K)) - std::lgamma(static_cast<double>(n + K));
  while (true) {
    Allocation a;
    a.masks.assign(static_cast<std::size_t>(K), 0);
    for (std::size_t i = 0; i < n; ++i) {
      a.masks[static_cast<std::size_t>(label[i])] |= std::size_t{1} << i;
    }
    a.log_weight = log_norm;
    for (std::size_t mask : a.masks) {
      a.log_weight += std::lgamma(static_cast<double>(stats[mask].size) + 1.0);
    }
    table.push_back(std::move(a));
    std::size_t i = 0;
    while (i < n && label[i] == K - 1) {
      label[i] = 0;
      ++i;
    }
    if (i == n) {
      break;
    }
    ++label[i];
  }

  std::vector<double> log_c(subsets);
  const auto integrand = [&](double u) {
    const double beta = std::exp(u);
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      log_c[mask] = log_component(stats[mask], beta, prior, grid.lambda_points);
    }
    double total = -std::numeric_limits<double>::infinity();
    for (const auto& a : table) {
      double term = a.log_weight;
      for (std::size_t mask : a.masks) {
        term += log_c[mask];
      }
      total = log_add(total, term);
    }
    return log_gamma_density(beta, prior.g, prior.h) + u + total;
  };
  const double upper = std::log((prior.g + 60.0) / prior.h);
  return log_trapezoid(integrand, upper - 60.0, upper, grid.beta_points);
}

std::vector<double> evidence_fixture() { return {-2.1, -1.9, -2.0, 2.0, 1.8, 2.3}; }

}  // namespace abfmix_oracles
