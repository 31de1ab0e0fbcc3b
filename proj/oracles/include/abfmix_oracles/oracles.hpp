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

#ifndef ABFMIX_ORACLES_ORACLES_HPP
#define ABFMIX_ORACLES_ORACLES_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

/**
 * \file
 * \brief Reference values computed by deterministic quadrature, written without any
 * dependency on the sampling library so they can check it.
 */

namespace abfmix_oracles {

/// Free energy -log p(z) of the toy targets' first coordinate at the given points,
/// shifted so the smallest returned value is 0. Inner integrals (two_mode_2d) use the
/// trapezoid rule with `points` nodes.
std::vector<double> toy_free_energy(const std::string& name, std::span<const double> z, std::size_t points = 10000);

/// Mean of the first coordinate under the full toy target.
double toy_coordinate_mean(const std::string& name, std::size_t points = 10000);

struct NormalGammaPrior {
  double m = 0.0;
  double kappa = 1.0;
  double alpha = 2.0;
  double g = 0.2;
  double h = 1.0;
};

/// Hyperparameters m = mean, kappa = 4/R^2, alpha = 2, g = 0.2, h = 100 g / (alpha R^2).
NormalGammaPrior reference_prior(std::span<const double> y);

struct QuadratureGrid {
  std::size_t beta_points = 400;
  std::size_t lambda_points = 300;
};

/// log of the marginal likelihood of a K-component Gaussian mixture with a flat
/// Dirichlet prior on the weights, summed exactly over all K^n allocations.
/// Component means are integrated in closed form, precisions and beta numerically.
double log_evidence(std::span<const double> y, int K, const NormalGammaPrior& prior, QuadratureGrid grid = {});

/// The six-point two-cluster dataset used by the evidence check.
std::vector<double> evidence_fixture();

}  // namespace abfmix_oracles

#endif  // ABFMIX_ORACLES_ORACLES_HPP
