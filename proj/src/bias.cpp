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

#include <abfmix/bias.hpp>

#include <abfmix/csv.hpp>
#include <abfmix/error.hpp>
#include <abfmix/numeric.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <string>

namespace abfmix {

namespace {

void anchor_at_zero(std::vector<double>& values) {
  const double lowest = *std::min_element(values.begin(), values.end());
  for (double& v : values) {
    v -= lowest;
  }
}

class Fnv1a {
 public:
  void add(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      hash_ ^= (word >> (8 * i)) & 0xffU;
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(double value) { add(std::bit_cast<std::uint64_t>(value)); }
  [[nodiscard]] std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

BiasProfile::BiasProfile(ReactionCoordinateSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  spec_.validate();
  if (values_.size() != spec_.n_bins) {
    throw ConfigError("bias profile has " + std::to_string(values_.size()) + " values for " +
                      std::to_string(spec_.n_bins) + " bins");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw ConfigError("bias profile contains a non-finite value");
    }
  }
}

BiasProfile BiasProfile::zero(const ReactionCoordinateSpec& spec) {
  return BiasProfile(spec, std::vector<double>(spec.n_bins, 0.0));
}

double BiasProfile::bias_at(double z) const {
  if (std::isnan(z)) {
    throw NumericError("bias requested at NaN coordinate");
  }
  if (z <= spec_.z_min) {
    return values_.front();
  }
  if (z >= spec_.z_max) {
    return values_.back();
  }
  return values_[*bin_index(spec_, z)];
}

std::uint64_t BiasProfile::checksum() const {
  Fnv1a hash;
  hash.add(spec_.z_min);
  hash.add(spec_.z_max);
  hash.add(static_cast<std::uint64_t>(spec_.n_bins));
  for (double v : values_) {
    hash.add(v);
  }
  return hash.value();
}

BiasGrid::BiasGrid(ReactionCoordinateSpec spec, Scheme mode)
    : spec_(spec),
      mode_(mode),
      hits_(spec.n_bins, 0),
      force_sum_(spec.n_bins, 0.0),
      force_mean_(spec.n_bins, 0.0),
      fenwick_(spec.n_bins + 1, 0.0),
      log_weight_(spec.n_bins, 0.0) {
  spec_.validate();
  log_total_ = std::log(static_cast<double>(spec_.n_bins));
}

void BiasGrid::fenwick_add(std::size_t bin, double delta) {
  for (std::size_t i = bin + 1; i < fenwick_.size(); i += i & (~i + 1)) {
    fenwick_[i] += delta;
  }
}

double BiasGrid::fenwick_prefix(std::size_t count) const {
  double sum = 0.0;
  for (std::size_t i = count; i > 0; i -= i & (~i + 1)) {
    sum += fenwick_[i];
  }
  return sum;
}

void BiasGrid::abf_record(std::size_t bin, double force) {
  if (mode_ != Scheme::ABF) {
    throw ConfigError("abf_record called on an ABP grid");
  }
  force_sum_.at(bin) += force;
  hits_[bin] += 1;
  const double mean = force_sum_[bin] / static_cast<double>(hits_[bin]);
  fenwick_add(bin, mean - force_mean_[bin]);
  force_mean_[bin] = mean;
}

void BiasGrid::abp_record(std::size_t bin, double current_bias) {
  if (mode_ != Scheme::ABP) {
    throw ConfigError("abp_record called on an ABF grid");
  }
  log_weight_.at(bin) = log_add(log_weight_[bin], -current_bias);
  log_total_ = log_add(log_total_, -current_bias);
  hits_[bin] += 1;
}

double BiasGrid::mean_force(std::size_t bin) const { return force_mean_.at(bin); }

double BiasGrid::bias_at_bin(std::size_t bin) const {
  const double dz = spec_.delta_z();
  if (mode_ == Scheme::ABF) {
    // Trapezoid rule between bin midpoints: A_i = dz * (sum_{j<i} F_j + (F_i - F_0) / 2).
    return dz * (fenwick_prefix(bin) + 0.5 * (force_mean_.at(bin) - force_mean_.front()));
  }
  return -(log_weight_.at(bin) - std::log(dz) - log_total_);
}

double BiasGrid::bias_at(double z) const {
  if (std::isnan(z)) {
    throw NumericError("bias requested at NaN coordinate");
  }
  if (z <= spec_.z_min) {
    return bias_at_bin(0);
  }
  if (z >= spec_.z_max) {
    return bias_at_bin(spec_.n_bins - 1);
  }
  return bias_at_bin(*bin_index(spec_, z));
}

std::vector<double> BiasGrid::profile() const {
  const std::size_t n = spec_.n_bins;
  std::vector<double> values(n, 0.0);
  if (mode_ == Scheme::ABF) {
    const double dz = spec_.delta_z();
    for (std::size_t i = 1; i < n; ++i) {
      values[i] = values[i - 1] + 0.5 * dz * (force_mean_[i - 1] + force_mean_[i]);
    }
  } else {
    const double log_total = log_sum_exp(log_weight_);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = log_total - log_weight_[i];
    }
  }
  anchor_at_zero(values);
  return values;
}

double ef_theoretical(const BiasProfile& profile) {
  const auto& values = profile.values();
  const double lowest = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double a : values) {
    const double e = std::exp(-(a - lowest));
    sum += e;
    sum_sq += e * e;
  }
  // dz factors cancel against (z_max - z_min) = N_z * dz.
  return (sum * sum) / (static_cast<double>(values.size()) * sum_sq);
}

double ef_theoretical(const BiasGrid& grid) { return ef_theoretical(grid.freeze()); }

BiasProfile clip_profile(const BiasProfile& profile, double max_range) {
  if (!(max_range > 0.0)) {
    throw ConfigError("clip range must be positive");
  }
  std::vector<double> values = profile.values();
  const double ceiling = *std::min_element(values.begin(), values.end()) + max_range;
  for (double& v : values) {
    v = std::min(v, ceiling);
  }
  return BiasProfile(profile.spec(), std::move(values));
}

void write_bias_csv(const BiasProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write bias file '" + path.string() + "'");
  }
  out << "z_mid,A\n";
  const auto& spec = profile.spec();
  for (std::size_t i = 0; i < spec.n_bins; ++i) {
    out << csv::format(spec.midpoint(i)) << ',' << csv::format(profile.values()[i]) << '\n';
  }
  if (!out) {
    throw ConfigError("failed writing bias file '" + path.string() + "'");
  }
}

BiasProfile read_bias_csv(const std::filesystem::path& path, const ReactionCoordinateSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read bias file '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line) || (line != "z_mid,A" && line != "z_mid,A\r")) {
    throw ConfigError("bias file '" + path.string() + "' lacks the 'z_mid,A' header");
  }
  std::vector<double> values;
  const double tolerance = 1e-9 * spec.delta_z();
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto fields = csv::split(line);
    if (fields.size() != 2) {
      throw ConfigError("bias file row '" + line + "' does not have two fields");
    }
    const double z = csv::parse(fields[0]);
    if (values.size() >= spec.n_bins || std::abs(z - spec.midpoint(values.size())) > tolerance) {
      throw ConfigError("bias file '" + path.string() + "' does not match the configured grid (z_min=" +
                        csv::format(spec.z_min) + ", z_max=" + csv::format(spec.z_max) +
                        ", bins=" + std::to_string(spec.n_bins) + ")");
    }
    values.push_back(csv::parse(fields[1]));
  }
  if (values.size() != spec.n_bins) {
    throw ConfigError("bias file '" + path.string() + "' has " + std::to_string(values.size()) +
                      " rows, configured grid has " + std::to_string(spec.n_bins) + " bins");
  }
  return BiasProfile(spec, std::move(values));
}

}  // namespace abfmix
