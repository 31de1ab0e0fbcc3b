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

#ifndef ABFMIX_MODEL_HPP
#define ABFMIX_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

/**
 * \file
 * \brief Univariate Gaussian mixture posterior and the generic target abstraction.
 *
 * Potentials are minus log unnormalized densities. Additive constants that do not
 * depend on the parameters (the posterior normalizer, powers of 2*pi, Gamma
 * function values) are dropped everywhere.
 */

namespace abfmix {

/// Observed data with cached summary statistics.
struct Observations {
  std::vector<double> values;
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
  double mean = 0.0;

  /// Builds from raw values, computing n, range and mean. Throws ConfigError if empty.
  static Observations from_values(std::vector<double> values);
};

/// Reads one real number per line. Blank lines and lines starting with '#' are skipped.
/// Throws ConfigError on unreadable files, non-numeric lines (with line number) or no data.
Observations load_observations(const std::filesystem::path& path);

/// Hyperparameters of the symmetric mixture prior.
///
/// mu_k ~ N(m, 1/kappa), lambda_k ~ Gamma(alpha, beta), beta ~ Gamma(g, h),
/// weights ~ Dirichlet(1, ..., 1). Gamma distributions use the rate parameterization.
struct PriorConfig {
  int K = 1;
  double m = 0.0;
  double kappa = 1.0;
  double alpha = 2.0;
  double g = 0.2;
  double h = 1.0;

  /// Throws ConfigError if any invariant is violated.
  void validate() const;
};

/// Data-dependent default prior: m = M, kappa = 4/R^2, alpha = 2, g = 0.2, h = 100 g / (alpha R^2).
PriorConfig default_prior(const Observations& obs, int K);

/// Mixture parameters. The last weight is implicit: q_K = 1 - sum(q).
struct Theta {
  std::vector<double> q;
  std::vector<double> mu;
  std::vector<double> lambda;
  double beta = 1.0;

  [[nodiscard]] int components() const { return static_cast<int>(mu.size()); }
  [[nodiscard]] double weight(int k) const;
  [[nodiscard]] bool in_support() const;
};

/// Positions of each parameter inside the flat state vector
/// (q_1..q_{K-1}, mu_1..mu_K, lambda_1..lambda_K, beta).
struct ThetaLayout {
  int K = 1;

  [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(3 * K); }
  [[nodiscard]] std::size_t q(int k) const { return static_cast<std::size_t>(k); }
  [[nodiscard]] std::size_t mu(int k) const { return static_cast<std::size_t>(K - 1 + k); }
  [[nodiscard]] std::size_t lambda(int k) const { return static_cast<std::size_t>(2 * K - 1 + k); }
  [[nodiscard]] std::size_t beta() const { return static_cast<std::size_t>(3 * K - 1); }
};

std::vector<double> pack(const Theta& theta);
Theta unpack(std::span<const double> x, int K);

/// A target density exp(-V) over a flat real state vector.
///
/// Implementations are immutable after construction and safe to evaluate concurrently.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  [[nodiscard]] virtual std::size_t dimension() const = 0;
  [[nodiscard]] virtual bool in_support(std::span<const double> x) const = 0;

  /// V(x), or nullopt when x is out of support.
  [[nodiscard]] virtual std::optional<double> potential(std::span<const double> x) const = 0;

  /// dV/dx[index] with all other entries of x held fixed.
  /// Throws OutOfSupport for invalid x and ConfigError for an unsupported index.
  [[nodiscard]] virtual double partial(std::span<const double> x, std::size_t index) const = 0;

  [[nodiscard]] virtual std::string coordinate_name(std::size_t index) const = 0;

  /// Identifier of the label ordering of x, used to count mode switches. Models without
  /// exchangeable components return nullopt.
  [[nodiscard]] virtual std::optional<std::uint64_t> ordering_key(std::span<const double> x) const {
    (void)x;
    return std::nullopt;
  }
};

/// Posterior of the univariate Gaussian mixture with the symmetric hierarchical prior.
class MixtureModel final : public TargetModel {
 public:
  MixtureModel(Observations obs, PriorConfig prior);

  [[nodiscard]] const Observations& observations() const { return obs_; }
  [[nodiscard]] const PriorConfig& prior() const { return prior_; }
  [[nodiscard]] ThetaLayout layout() const { return ThetaLayout{prior_.K}; }

  [[nodiscard]] std::size_t dimension() const override { return layout().dimension(); }
  [[nodiscard]] bool in_support(std::span<const double> x) const override;
  [[nodiscard]] std::optional<double> potential(std::span<const double> x) const override;
  [[nodiscard]] double partial(std::span<const double> x, std::size_t index) const override;
  [[nodiscard]] std::string coordinate_name(std::size_t index) const override;
  [[nodiscard]] std::optional<std::uint64_t> ordering_key(std::span<const double> x) const override;

  /// sum_i log sum_k q_k lambda_k^{1/2} exp(-lambda_k (y_i - mu_k)^2 / 2), without 2*pi factors.
  /// Works for any number of components; x must be in support.
  [[nodiscard]] double log_likelihood(std::span<const double> x, int K) const;

 private:
  Observations obs_;
  PriorConfig prior_;
};

/// V(theta) = -log{p(theta) p(y|theta)} up to an additive constant. Throws OutOfSupport.
double log_posterior_potential(const Theta& theta, const Observations& obs, const PriorConfig& prior);

/// Names accepted by partial_potential.
enum class PartialCoordinate { Beta, Q1, Mu1 };

/// Analytic dV/d(coordinate). Throws OutOfSupport, or ConfigError when Q1 is requested with K = 1.
double partial_potential(const Theta& theta, PartialCoordinate coord, const Observations& obs,
                         const PriorConfig& prior);

/// Drops component k (0-based) and renormalizes the remaining weights by 1/(1 - q_k).
/// Returns nullopt when q_k == 1 (the renormalization is undefined) or K == 1.
std::optional<Theta> remove_component(const Theta& theta, int k);

}  // namespace abfmix

#endif  // ABFMIX_MODEL_HPP
