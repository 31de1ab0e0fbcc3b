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

#ifndef ABFMIX_ESTIMATORS_HPP
#define ABFMIX_ESTIMATORS_HPP

#include <abfmix/bias.hpp>
#include <abfmix/model.hpp>
#include <abfmix/sampler.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace abfmix {

/// Importance weights w = exp(-A(xi)) of a trace sampled from the biased target.
///
/// Holds a pointer to the trace, which must outlive the sample. Weights use the gauge
/// of the stored bias values (no per-trace shift), so samples of chains that share one
/// profile can be pooled.
struct WeightedSample {
  const ChainTrace* trace = nullptr;
  std::vector<double> log_weights;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Throws ConfigError when the trace was produced with a different profile (checksum)
/// or is empty.
WeightedSample reweight(const ChainTrace& trace, const BiasProfile& profile);

/// Weights taken as given; used for synthetic checks.
WeightedSample weighted_from(const ChainTrace& trace, std::vector<double> weights);

using TestFunction = std::function<double(std::span<const double>)>;

/// sum h(theta_t) w_t / sum w_t. Throws NumericError if the weight sum is not positive.
double expectation(const WeightedSample& ws, const TestFunction& h);

/// Standard error of expectation() from `batches` contiguous batch estimates.
double batch_means_error(const WeightedSample& ws, const TestFunction& h, std::size_t batches = 20);

/// (sum w)^2 / (T sum w^2), the normalized effective sample size.
double ef_numerical(std::span<const double> weights);
inline double ef_numerical(const WeightedSample& ws) { return ef_numerical(ws.weights); }

struct EvidenceEstimate {
  /// log(Z_K / Z_{K-1}).
  double log_ratio = 0.0;
  double std_error = 0.0;
  /// Records skipped for some removed component because its weight was exactly 1.
  std::size_t excluded = 0;
  std::size_t chains = 0;
  std::vector<double> per_chain;
};

/// log of I_K / I_{K-1}: I_K averages w over the pooled chains and I_{K-1} averages,
/// over the removed component k, the weights w_{-k} = p(y|theta_{-k}) / p(y|theta) w.
/// The standard error is the spread of per-chain estimates over sqrt(chains) for two or
/// more chains, and batch means on the single chain otherwise.
/// Throws ConfigError if K < 2 or the samples are empty.
EvidenceEstimate log_evidence_ratio(std::span<const WeightedSample> samples, const MixtureModel& model);

/// Number of consecutive record pairs whose label ordering differs.
std::uint64_t switch_count(const ChainTrace& trace, const TargetModel& model);

/// max_i |freq_i - 1/N_z| N_z over the records inside [z_min, z_max]; 1 when none are.
double xi_uniformity_stat(const ChainTrace& trace, const ReactionCoordinateSpec& spec);

/// Largest Euclidean distance between the reweighted (mean, sd) of mu_k across components.
double label_symmetry_stat(const WeightedSample& ws, const MixtureModel& model);

struct Diagnostics {
  std::uint64_t switch_count = 0;
  double xi_uniformity = 0.0;
  double label_symmetry = 0.0;
};

Diagnostics diagnostics(const WeightedSample& ws, const MixtureModel& model, const ReactionCoordinateSpec& spec);

/// Summary of a sample/report cycle, serialized with a fixed key order.
struct RunReport {
  double ef_numerical = 0.0;
  double ef_theoretical = 0.0;
  std::vector<std::pair<std::string, double>> posterior_expectations;
  std::map<int, EvidenceEstimate> log_evidence_ratios;
  Diagnostics diagnostics;
  std::uint64_t records = 0;
  std::uint64_t iterations = 0;
  double acceptance_rate = 0.0;
  std::uint64_t ordering_switches = 0;
  std::vector<std::uint64_t> seeds;
  /// Effective configuration, already serialized as JSON text.
  std::string config_json;

  [[nodiscard]] std::string to_json() const;
};

}  // namespace abfmix

#endif  // ABFMIX_ESTIMATORS_HPP
