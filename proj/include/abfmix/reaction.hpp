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

#ifndef ABFMIX_REACTION_HPP
#define ABFMIX_REACTION_HPP

#include <abfmix/model.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace abfmix {

/// Scalar function of the state along which the bias is learned.
enum class CoordinateKind { Beta, Q1, Mu1, NegLogPost, ToyCoord };

/// How the adaptive bias is updated: averaged mean force (ABF) or accumulated
/// inverse-bias weights (ABP, self-healing umbrella sampling).
enum class Scheme { ABF, ABP };

CoordinateKind parse_coordinate_kind(const std::string& token);
std::string to_string(CoordinateKind kind);
Scheme parse_scheme(const std::string& token);
std::string to_string(Scheme scheme);

/// Coordinate choice plus the truncation interval split into n_bins equal bins.
struct ReactionCoordinateSpec {
  CoordinateKind kind = CoordinateKind::Beta;
  /// State index used by ToyCoord.
  std::size_t toy_index = 0;
  double z_min = 0.0;
  double z_max = 1.0;
  std::size_t n_bins = 2;

  /// Validated constructor. Throws ConfigError unless z_min < z_max and n_bins >= 2.
  static ReactionCoordinateSpec make(CoordinateKind kind, double z_min, double z_max, std::size_t n_bins,
                                     std::size_t toy_index = 0);

  void validate() const;
  [[nodiscard]] double delta_z() const { return (z_max - z_min) / static_cast<double>(n_bins); }
  [[nodiscard]] double edge(std::size_t i) const { return z_min + static_cast<double>(i) * delta_z(); }
  [[nodiscard]] double midpoint(std::size_t i) const { return z_min + (static_cast<double>(i) + 0.5) * delta_z(); }
};

/// Bin i with z_i <= z < z_{i+1}; z == z_max maps to the last bin.
/// Returns nullopt (out of range) outside [z_min, z_max] or for NaN.
std::optional<std::size_t> bin_index(const ReactionCoordinateSpec& spec, double z);

/// State index that the coordinate projects onto, or nullopt when the coordinate is the
/// potential itself. Throws ConfigError when the kind does not apply to the model.
std::optional<std::size_t> projection_index(const ReactionCoordinateSpec& spec, const TargetModel& model);

/// xi(x) given the already computed potential V(x).
inline double evaluate(std::optional<std::size_t> projection, std::span<const double> x, double potential) {
  return projection ? x[*projection] : potential;
}

/// xi(theta) for the mixture posterior. Throws OutOfSupport for invalid theta.
double evaluate(const ReactionCoordinateSpec& spec, const Theta& theta, const Observations& obs,
                const PriorConfig& prior);

/// Default truncation interval: beta -> [R^2/2000, R^2/20], q1 -> [0, 1], mu1 -> [min y, max y].
/// Throws ConfigError for NegLogPost and ToyCoord, which have no data-independent default.
std::pair<double, double> default_interval(CoordinateKind kind, const Observations& obs);

/// ABP for the potential coordinate, ABF otherwise; an explicit override wins.
Scheme scheme_for(CoordinateKind kind, std::optional<Scheme> override_scheme = std::nullopt);

}  // namespace abfmix

#endif  // ABFMIX_REACTION_HPP
