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

#ifndef ABFMIX_SAMPLER_HPP
#define ABFMIX_SAMPLER_HPP

#include <abfmix/bias.hpp>
#include <abfmix/error.hpp>
#include <abfmix/model.hpp>
#include <abfmix/reaction.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

/**
 * \file
 * \brief Random-walk Metropolis-Hastings over a TargetModel, the adaptive biasing
 * driver and the frozen-bias sampling run.
 *
 * Every chain draws from its own std::mt19937_64 stream derived from (seed, stream index),
 * so identical inputs reproduce identical trajectories.
 */

namespace abfmix {

using Rng = std::mt19937_64;

/// Independent generator for chain `stream` of a run seeded with `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

enum class ProposalFamily { Gaussian, Cauchy };

ProposalFamily parse_proposal_family(const std::string& token);
std::string to_string(ProposalFamily family);

/// Random-walk scales for the mixture parameters (weights, means, precisions, beta).
struct ProposalScales {
  double tau_q = 5e-4;
  double tau_mu = 0.025;
  double tau_v = 0.05;
  double tau_beta = 5e-3;
  ProposalFamily family = ProposalFamily::Gaussian;

  void validate() const;

  /// Gaussian scales used while learning the bias. The reference values were tuned on
  /// data with range 10.5; other datasets rescale them by their range R.
  static ProposalScales adaptive_defaults(const Observations& obs);
  /// Cauchy scales for the frozen-bias run: tau_mu = R/1000, tau_v = 2/R^2,
  /// tau_beta = 2e-5 alpha R^2, tau_q = 5e-4.
  static ProposalScales sampling_defaults(const Observations& obs, double alpha);
};

/// Per-coordinate random-walk step sizes. A zero step freezes the coordinate.
struct RandomWalk {
  ProposalFamily family = ProposalFamily::Gaussian;
  std::vector<double> steps;

  static RandomWalk for_mixture(const ProposalScales& scales, const ThetaLayout& layout);
  static RandomWalk isotropic(ProposalFamily family, double step, std::size_t dimension);
};

/// Reaction coordinate bound to a concrete model.
struct CoordinateBinding {
  const TargetModel* model = nullptr;
  ReactionCoordinateSpec spec;
  std::optional<std::size_t> projection;

  CoordinateBinding(const TargetModel& target, const ReactionCoordinateSpec& coordinate)
      : model(&target), spec(coordinate), projection(projection_index(coordinate, target)) {}
};

/// Current chain position with cached coordinate, potential and bin.
struct ChainState {
  std::vector<double> x;
  double xi = 0.0;
  double potential = 0.0;
  std::optional<std::size_t> bin;
  /// dV/dxi at x; only maintained by the ABF driver.
  double force = std::numeric_limits<double>::quiet_NaN();
};

/// Evaluates the caches at x. Throws OutOfSupport if x is outside the support and
/// NumericError if the potential is not finite.
ChainState make_state(const CoordinateBinding& binding, std::vector<double> x);

/// Scratch buffer reused across steps to avoid per-step allocation.
struct StepWorkspace {
  std::vector<double> candidate;
};

/// One Metropolis-Hastings step targeting exp(-V + A(xi)).
///
/// All coordinates move jointly by step * noise (symmetric proposal). Candidates out of
/// support are rejected, as are candidates leaving [z_min, z_max] when `truncate` is set.
/// `bias(xi, bin)` returns A at the coordinate value. Returns true on acceptance.
template <class BiasFn>
bool mh_step(ChainState& state, const CoordinateBinding& binding, const RandomWalk& walk, const BiasFn& bias,
             bool truncate, Rng& rng, StepWorkspace& workspace);

/// Adaptive run settings.
struct AdaptConfig {
  std::uint64_t total_iters = 1'000'000;
  /// Iterations between convergence checks (N_cvg).
  std::uint64_t check_interval = 100'000;
  /// Stop once the relative bias change between checks falls below this.
  double epsilon_stop = 0.01;
  std::uint64_t seed = 1;
  /// Keep every `thin`-th state of the adaptive trajectory; 0 keeps none.
  std::uint64_t thin = 0;
  /// Recompute and compare the cached state every this many steps; 0 disables.
  std::uint64_t cache_check_every = 0;

  void validate() const;
};

/// Thinned chain output with per-record coordinate, potential and applied bias.
struct ChainTrace {
  std::vector<std::string> coordinate_names;
  std::vector<std::uint64_t> iter;
  std::vector<double> xi;
  std::vector<double> potential;
  std::vector<double> bias;
  /// Row-major states, coordinate_names.size() entries per record.
  std::vector<double> states;
  std::uint64_t profile_checksum = 0;
  std::uint64_t iterations = 0;
  std::uint64_t accepted = 0;
  /// Label-ordering changes over every iteration (not only the kept records).
  std::uint64_t ordering_switches = 0;

  [[nodiscard]] std::size_t size() const { return iter.size(); }
  [[nodiscard]] std::size_t dimension() const { return coordinate_names.size(); }
  [[nodiscard]] std::span<const double> state(std::size_t record) const {
    return {states.data() + record * dimension(), dimension()};
  }
  [[nodiscard]] double acceptance_rate() const {
    return iterations == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(iterations);
  }
  void push(std::uint64_t iteration, const ChainState& state, double applied_bias);
};

struct ConvergenceRecord {
  std::uint64_t iter = 0;
  double delta = 0.0;
  double epsilon = 0.0;
};

struct AdaptResult {
  BiasGrid grid;
  ChainTrace trace;
  std::vector<ConvergenceRecord> convergence;
  ChainState final_state;
  bool converged = false;
};

/// Adaptive biasing run: each iteration makes one MH move against the current biased
/// target (rejecting moves whose coordinate leaves the interval), then records the
/// post-move state into the grid. Convergence is checked every check_interval iterations
/// starting from the second snapshot; the run stops early once epsilon < epsilon_stop.
///
/// Throws ConfigError for ABF on the potential coordinate, or when the initial state is
/// out of support or outside the interval; NumericError on a non-finite potential.
AdaptResult adapt_run(const TargetModel& model, const ReactionCoordinateSpec& spec, Scheme scheme,
                      const RandomWalk& walk, const AdaptConfig& config, std::vector<double> initial);

/// Frozen-bias run settings.
struct SampleConfig {
  std::uint64_t t_max = 1'000'000;
  std::uint64_t thin = 100;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::uint64_t cache_check_every = 0;
  /// Unrecorded steps run before iteration 1.
  std::uint64_t burn_in = 0;

  void validate() const;
};

/// MH targeting exp(-V + A(xi)) over the full support, with A extended as a constant
/// outside the interval. Records every thin-th iteration (t = thin, 2 thin, ...).
ChainTrace sample_run(const TargetModel& model, const BiasProfile& profile, const RandomWalk& walk,
                      const SampleConfig& config, std::vector<double> initial);

/// Runs `chains` independent sample_run calls concurrently, chain c using stream c.
std::vector<ChainTrace> sample_chains(const TargetModel& model, const BiasProfile& profile, const RandomWalk& walk,
                                      const SampleConfig& config, const std::vector<std::vector<double>>& initial);

/// delta = sqrt(min_c sum_i (now_i - prev_i - c)^2) with c = mean(now) - mean(prev),
/// epsilon = delta / sqrt(sum_i now_i^2) (0 when both are 0, +inf when only the norm is 0).
/// Throws ConfigError on a length mismatch.
std::pair<double, double> convergence_distance(std::span<const double> now, std::span<const double> prev);

/// Mixture starting point: weights from the flat Dirichlet, means at the (k + 1/2)/K data
/// quantiles, beta at its prior mean g/h and precisions drawn from Gamma(alpha, beta).
std::vector<double> initial_mixture_state(const MixtureModel& model, Rng& rng);

/// Moves x into the truncation interval: projection coordinates are set to the nearest
/// bin midpoint (rescaling the other weights for q1), the potential coordinate is reached
/// with at most `max_steps` unbiased MH steps. Throws NumericError when that fails.
std::vector<double> enter_interval(const CoordinateBinding& binding, const RandomWalk& walk, std::vector<double> x,
                                   Rng& rng, std::uint64_t max_steps = 1'000'000);

/// Trace file: optional "# profile_checksum=<hex>" line, then the header
/// iter,xi,V,bias,<coordinates>[,weight]. Values use shortest round-trip formatting.
void write_trace_csv(const ChainTrace& trace, const std::filesystem::path& path,
                     std::span<const double> weights = {});
ChainTrace read_trace_csv(const std::filesystem::path& path);

void write_convergence_csv(const std::vector<ConvergenceRecord>& log, const std::filesystem::path& path);

// ---------------------------------------------------------------------------

namespace detail {

double draw_noise(ProposalFamily family, Rng& rng);
[[noreturn]] void throw_non_finite(std::span<const double> x, double potential);

}  // namespace detail

template <class BiasFn>
bool mh_step(ChainState& state, const CoordinateBinding& binding, const RandomWalk& walk, const BiasFn& bias,
             bool truncate, Rng& rng, StepWorkspace& workspace) {
  auto& candidate = workspace.candidate;
  candidate.resize(state.x.size());
  for (std::size_t i = 0; i < state.x.size(); ++i) {
    const double step = walk.steps[i];
    candidate[i] = step > 0.0 ? state.x[i] + step * detail::draw_noise(walk.family, rng) : state.x[i];
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);

  std::optional<std::size_t> bin;
  if (binding.projection) {
    const double xi = candidate[*binding.projection];
    bin = bin_index(binding.spec, xi);
    if (truncate && !bin) {
      return false;
    }
  }
  const auto potential = binding.model->potential(candidate);
  if (!potential) {
    return false;
  }
  if (!std::isfinite(*potential)) {
    detail::throw_non_finite(candidate, *potential);
  }
  const double xi = evaluate(binding.projection, candidate, *potential);
  if (!binding.projection) {
    bin = bin_index(binding.spec, xi);
    if (truncate && !bin) {
      return false;
    }
  }
  const double log_ratio = (state.potential - bias(state.xi, state.bin)) - (*potential - bias(xi, bin));
  if (log_ratio < 0.0 && u > std::exp(log_ratio)) {
    return false;
  }
  state.x.swap(candidate);
  state.xi = xi;
  state.potential = *potential;
  state.bin = bin;
  state.force = std::numeric_limits<double>::quiet_NaN();
  return true;
}

}  // namespace abfmix

#endif  // ABFMIX_SAMPLER_HPP
