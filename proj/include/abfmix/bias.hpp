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

#ifndef ABFMIX_BIAS_HPP
#define ABFMIX_BIAS_HPP

#include <abfmix/reaction.hpp>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

/**
 * \file
 * \brief Binned adaptive bias (mean-force or weight accumulators) and its frozen profile.
 *
 * A bias A(z) enters the biased target as exp(-V + A(xi)), so A approximates the free
 * energy -log p(xi = z) up to an additive constant.
 */

namespace abfmix {

/// Immutable piecewise-constant bias, one value per bin, extended by the boundary
/// values outside [z_min, z_max]. Safe for concurrent reads.
class BiasProfile {
 public:
  /// Throws ConfigError if values.size() != spec.n_bins or any value is not finite.
  BiasProfile(ReactionCoordinateSpec spec, std::vector<double> values);

  /// Identically zero profile: biased sampling reduces to plain MCMC.
  static BiasProfile zero(const ReactionCoordinateSpec& spec);

  [[nodiscard]] const ReactionCoordinateSpec& spec() const { return spec_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  [[nodiscard]] double bias_at(double z) const;

  /// FNV-1a hash of the interval, bin count and the bit patterns of the values.
  [[nodiscard]] std::uint64_t checksum() const;

 private:
  ReactionCoordinateSpec spec_;
  std::vector<double> values_;
};

/// Running bias state of one adaptive chain.
class BiasGrid {
 public:
  BiasGrid(ReactionCoordinateSpec spec, Scheme mode);

  [[nodiscard]] const ReactionCoordinateSpec& spec() const { return spec_; }
  [[nodiscard]] Scheme mode() const { return mode_; }

  /// Adds one force sample to the running mean of the bin. ABF only.
  void abf_record(std::size_t bin, double force);

  /// Adds exp(-current_bias) to the bin accumulator. ABP only.
  void abp_record(std::size_t bin, double current_bias);

  /// Mean force in the bin; 0 for bins never visited.
  [[nodiscard]] double mean_force(std::size_t bin) const;
  [[nodiscard]] std::uint64_t hit_count(std::size_t bin) const { return hits_.at(bin); }
  /// Log of the ABP accumulator, which starts at 1.
  [[nodiscard]] double log_weight(std::size_t bin) const { return log_weight_.at(bin); }

  /// Current bias in bin, in the working gauge: ABF anchors the first bin at 0,
  /// ABP uses the normalization dz * sum_i exp(-A_i) = 1. O(log N_z).
  [[nodiscard]] double bias_at_bin(std::size_t bin) const;

  /// bias_at_bin of the containing bin, with constant extension outside the interval.
  [[nodiscard]] double bias_at(double z) const;

  /// Freshly recomputed bias at the bin midpoints, shifted so that its minimum is 0.
  [[nodiscard]] std::vector<double> profile() const;

  [[nodiscard]] BiasProfile freeze() const { return BiasProfile(spec_, profile()); }

 private:
  void fenwick_add(std::size_t bin, double delta);
  [[nodiscard]] double fenwick_prefix(std::size_t count) const;

  ReactionCoordinateSpec spec_;
  Scheme mode_;
  std::vector<std::uint64_t> hits_;
  std::vector<double> force_sum_;
  std::vector<double> force_mean_;
  std::vector<double> fenwick_;
  std::vector<double> log_weight_;
  double log_total_ = 0.0;
};

/// (integral of exp(-A))^2 / ((z_max - z_min) * integral of exp(-2A)), bins as the quadrature.
double ef_theoretical(const BiasProfile& profile);
double ef_theoretical(const BiasGrid& grid);

/// Clamps values above min + max_range down to min + max_range. Throws ConfigError unless max_range > 0.
BiasProfile clip_profile(const BiasProfile& profile, double max_range);

/// Bias file: CSV header "z_mid,A", one row per bin, values written in shortest
/// round-trip form so that reading back reproduces every bit.
void write_bias_csv(const BiasProfile& profile, const std::filesystem::path& path);
/// Reads a bias file for the given grid. Throws ConfigError when the row count or the
/// midpoints disagree with spec.
BiasProfile read_bias_csv(const std::filesystem::path& path, const ReactionCoordinateSpec& spec);

}  // namespace abfmix

#endif  // ABFMIX_BIAS_HPP
