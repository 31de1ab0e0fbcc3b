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

#ifndef ABFMIX_PIPELINE_HPP
#define ABFMIX_PIPELINE_HPP

#include <abfmix/estimators.hpp>
#include <abfmix/reaction.hpp>
#include <abfmix/sampler.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

/**
 * \file
 * \brief The adapt / sample / report / oracle commands and their shared configuration.
 *
 * Settings come from an optional JSON file and are overridden by command-line flags.
 * Both sources are passed in as JSON objects keyed by setting name (see setting_keys());
 * values may be numbers or strings, so iteration counts such as "1e9" are accepted.
 */

namespace abfmix {

/// Partially specified proposal scales; unset entries fall back to the phase default.
struct ScaleOverrides {
  std::optional<double> tau_q;
  std::optional<double> tau_mu;
  std::optional<double> tau_v;
  std::optional<double> tau_beta;
  std::optional<ProposalFamily> family;
};

struct PipelineConfig {
  std::optional<std::filesystem::path> data;
  /// Built-in toy target name, used instead of data.
  std::optional<std::string> toy;
  int K = 3;
  CoordinateKind kind = CoordinateKind::Beta;
  std::optional<double> z_min;
  std::optional<double> z_max;
  std::size_t n_bins = 100;
  std::optional<Scheme> scheme;
  ScaleOverrides adapt_scales;
  ScaleOverrides sample_scales;
  /// Random-walk step for toy targets.
  std::optional<double> toy_step;
  std::uint64_t iters = 10'000'000;
  std::optional<std::uint64_t> ncvg;
  double epsilon_stop = 0.01;
  std::uint64_t t_max = 10'000'000;
  std::uint64_t thin = 1000;
  std::optional<std::uint64_t> burn_in;
  std::uint64_t seed = 1;
  std::size_t chains = 1;
  std::filesystem::path out = ".";
  std::optional<double> clip;
  std::optional<int> evidence_vs;
  std::optional<std::filesystem::path> bias;
  std::optional<std::filesystem::path> trace;
  std::uint64_t cache_check_every = 0;
  /// Where each setting came from: "default", "derived", "config" or "flag".
  std::map<std::string, std::string> sources;
};

/// Setting names accepted in the config file and as flag overrides.
const std::vector<std::string>& setting_keys();

/// Parses a non-negative integer count, accepting scientific notation ("1e9", 2.5e6).
/// Throws ConfigError unless the value is a whole number that fits in 64 bits.
std::uint64_t parse_count(const nlohmann::json& value, const std::string& key);

/// Merges file settings and flag overrides. Throws ConfigError on unknown keys or
/// malformed values; cross-field checks happen when a command resolves the run.
PipelineConfig make_config(const nlohmann::json& file, const nlohmann::json& flags);

/// Reads a JSON config file. Throws ConfigError if it is missing or malformed.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// Everything a command needs, with defaults filled in from the data.
struct ResolvedRun {
  PipelineConfig config;
  std::shared_ptr<const TargetModel> model;
  /// Set when the target is a mixture posterior.
  std::shared_ptr<const MixtureModel> mixture;
  ReactionCoordinateSpec spec;
  Scheme scheme = Scheme::ABF;
  RandomWalk adapt_walk;
  RandomWalk sample_walk;
  AdaptConfig adapt;
  SampleConfig sample;
  /// Clip range applied to the bias before sampling; infinity disables.
  double clip = 0.0;
  /// Fixed start for toy targets; empty for mixtures (drawn from the prior).
  std::vector<double> toy_start;

  /// Effective configuration with the source of each value.
  [[nodiscard]] nlohmann::ordered_json echo() const;
};

/// Loads the data and fills every default. Throws ConfigError on inconsistent settings.
ResolvedRun resolve(const PipelineConfig& config);

/// Starting point of chain `chain` (0 for the adaptive run), inside the interval when
/// `inside` is set.
std::vector<double> initial_state(const ResolvedRun& run, std::uint64_t chain, bool inside);

struct AdaptOutcome {
  BiasProfile profile;
  std::vector<ConvergenceRecord> convergence;
  bool converged = false;
  std::uint64_t iterations = 0;
  double acceptance_rate = 0.0;
};

/// Learns the bias; writes bias.csv, convergence.csv and config.json into the output directory.
AdaptOutcome cmd_adapt(const ResolvedRun& run);

/// Loads the bias file (config.bias or <out>/bias.csv), applying the clip range.
BiasProfile load_bias(const ResolvedRun& run);

/// Runs one frozen-bias chain and writes trace.csv (with a weight column).
ChainTrace cmd_sample(const ResolvedRun& run);

/// Reweights the configured trace, or runs `chains` sampling chains concurrently when no
/// trace is given, and writes report.json.
RunReport cmd_report(const ResolvedRun& run);

/// Evaluates the reference quadratures for the built-in fixtures and writes oracle.json
/// (plus oracle_free_energy_<toy>.csv on the configured grid for toy targets).
nlohmann::ordered_json cmd_oracle(const PipelineConfig& config);

}  // namespace abfmix

#endif  // ABFMIX_PIPELINE_HPP
