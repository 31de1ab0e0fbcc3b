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

#include <abfmix/sampler.hpp>

#include <abfmix/csv.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace abfmix {

namespace {

/// Range of the data the reference adaptive scales were tuned on.
constexpr double kReferenceRange = 10.5;

void check_cache(const CoordinateBinding& binding, const ChainState& state) {
  const ChainState fresh = make_state(binding, state.x);
  if (fresh.potential != state.potential || fresh.xi != state.xi || fresh.bin != state.bin) {
    throw NumericError("chain state cache does not match a fresh evaluation");
  }
}

std::string dump_state(std::span<const double> x) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << (i ? ", " : "") << csv::format(x[i]);
  }
  out << "]";
  return out.str();
}

class OrderingTracker {
 public:
  void observe(const TargetModel& model, std::span<const double> x, ChainTrace& trace) {
    const auto key = model.ordering_key(x);
    if (key && last_ && *key != *last_) {
      ++trace.ordering_switches;
    }
    last_ = key;
  }

 private:
  std::optional<std::uint64_t> last_;
};

}  // namespace

namespace detail {

double draw_noise(ProposalFamily family, Rng& rng) {
  if (family == ProposalFamily::Gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    return normal(rng);
  }
  std::cauchy_distribution<double> cauchy(0.0, 1.0);
  return cauchy(rng);
}

void throw_non_finite(std::span<const double> x, double potential) {
  throw NumericError("non-finite potential " + csv::format(potential) + " at state " + dump_state(x));
}

}  // namespace detail

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

ProposalFamily parse_proposal_family(const std::string& token) {
  if (token == "gaussian") {
    return ProposalFamily::Gaussian;
  }
  if (token == "cauchy") {
    return ProposalFamily::Cauchy;
  }
  throw ConfigError("unknown proposal family '" + token + "' (expected gaussian or cauchy)");
}

std::string to_string(ProposalFamily family) {
  return family == ProposalFamily::Gaussian ? "gaussian" : "cauchy";
}

void ProposalScales::validate() const {
  for (double tau : {tau_q, tau_mu, tau_v, tau_beta}) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw ConfigError("proposal scales must be positive and finite");
    }
  }
}

ProposalScales ProposalScales::adaptive_defaults(const Observations& obs) {
  const double ratio = obs.range / kReferenceRange;
  ProposalScales scales;
  scales.tau_q = 5e-4;
  scales.tau_mu = 0.025 * ratio;
  scales.tau_v = 0.05 / (ratio * ratio);
  scales.tau_beta = 5e-3 * ratio * ratio;
  scales.family = ProposalFamily::Gaussian;
  return scales;
}

ProposalScales ProposalScales::sampling_defaults(const Observations& obs, double alpha) {
  const double r = obs.range;
  ProposalScales scales;
  scales.tau_q = 5e-4;
  scales.tau_mu = r / 1000.0;
  scales.tau_v = 2.0 / (r * r);
  scales.tau_beta = 2e-5 * alpha * r * r;
  scales.family = ProposalFamily::Cauchy;
  return scales;
}

RandomWalk RandomWalk::for_mixture(const ProposalScales& scales, const ThetaLayout& layout) {
  scales.validate();
  RandomWalk walk;
  walk.family = scales.family;
  walk.steps.assign(layout.dimension(), 0.0);
  for (int k = 0; k < layout.K; ++k) {
    if (k + 1 < layout.K) {
      walk.steps[layout.q(k)] = scales.tau_q;
    }
    walk.steps[layout.mu(k)] = scales.tau_mu;
    walk.steps[layout.lambda(k)] = scales.tau_v;
  }
  walk.steps[layout.beta()] = scales.tau_beta;
  return walk;
}

RandomWalk RandomWalk::isotropic(ProposalFamily family, double step, std::size_t dimension) {
  if (!(step > 0.0)) {
    throw ConfigError("random-walk step must be positive");
  }
  return RandomWalk{family, std::vector<double>(dimension, step)};
}

ChainState make_state(const CoordinateBinding& binding, std::vector<double> x) {
  const auto potential = binding.model->potential(x);
  if (!potential) {
    throw OutOfSupport("state " + dump_state(x) + " is out of support");
  }
  if (!std::isfinite(*potential)) {
    detail::throw_non_finite(x, *potential);
  }
  ChainState state;
  state.xi = evaluate(binding.projection, x, *potential);
  state.potential = *potential;
  state.bin = bin_index(binding.spec, state.xi);
  state.x = std::move(x);
  return state;
}

void AdaptConfig::validate() const {
  if (check_interval < 1 || total_iters < check_interval) {
    throw ConfigError("adaptive run requires total iterations >= check interval >= 1");
  }
  if (!(epsilon_stop > 0.0)) {
    throw ConfigError("convergence threshold must be positive");
  }
}

void SampleConfig::validate() const {
  if (t_max < 1 || thin < 1) {
    throw ConfigError("sampling run requires at least one iteration and thin >= 1");
  }
}

void ChainTrace::push(std::uint64_t iteration, const ChainState& state, double applied_bias) {
  iter.push_back(iteration);
  xi.push_back(state.xi);
  potential.push_back(state.potential);
  bias.push_back(applied_bias);
  states.insert(states.end(), state.x.begin(), state.x.end());
}

namespace {

std::vector<std::string> coordinate_names(const TargetModel& model) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    names.push_back(model.coordinate_name(i));
  }
  return names;
}

}  // namespace

AdaptResult adapt_run(const TargetModel& model, const ReactionCoordinateSpec& spec, Scheme scheme,
                      const RandomWalk& walk, const AdaptConfig& config, std::vector<double> initial) {
  config.validate();
  spec.validate();
  if (scheme == Scheme::ABF && spec.kind == CoordinateKind::NegLogPost) {
    throw ConfigError("ABF needs the mean force, which is not available for the neglogpost coordinate; use abp");
  }
  if (walk.steps.size() != model.dimension()) {
    throw ConfigError("random walk dimension does not match the model");
  }
  const CoordinateBinding binding(model, spec);
  if (!model.in_support(initial)) {
    throw ConfigError("initial state " + dump_state(initial) + " is out of support");
  }
  AdaptResult result{BiasGrid(spec, scheme), {}, {}, make_state(binding, std::move(initial)), false};
  ChainState& state = result.final_state;
  if (!state.bin) {
    throw ConfigError("initial coordinate value " + csv::format(state.xi) + " lies outside [" +
                      csv::format(spec.z_min) + ", " + csv::format(spec.z_max) + "]");
  }
  BiasGrid& grid = result.grid;
  ChainTrace& trace = result.trace;
  trace.coordinate_names = coordinate_names(model);

  const bool abf = scheme == Scheme::ABF;
  if (abf) {
    state.force = model.partial(state.x, *binding.projection);
  }
  Rng rng = make_rng(config.seed);
  StepWorkspace workspace;
  OrderingTracker ordering;
  ordering.observe(model, state.x, trace);
  const auto bias = [&grid](double, std::optional<std::size_t> bin) { return grid.bias_at_bin(*bin); };

  std::vector<double> previous;
  for (std::uint64_t t = 1; t <= config.total_iters; ++t) {
    const bool accepted = mh_step(state, binding, walk, bias, true, rng, workspace);
    trace.iterations = t;
    if (accepted) {
      ++trace.accepted;
      ordering.observe(model, state.x, trace);
    }
    const std::size_t bin = *state.bin;
    if (abf) {
      if (std::isnan(state.force)) {
        state.force = model.partial(state.x, *binding.projection);
        if (!std::isfinite(state.force)) {
          throw NumericError("non-finite mean-force sample at state " + dump_state(state.x));
        }
      }
      grid.abf_record(bin, state.force);
    } else {
      grid.abp_record(bin, grid.bias_at_bin(bin));
    }
    if (config.thin > 0 && t % config.thin == 0) {
      trace.push(t, state, grid.bias_at_bin(bin));
    }
    if (config.cache_check_every > 0 && t % config.cache_check_every == 0) {
      check_cache(binding, state);
    }
    if (t % config.check_interval == 0) {
      auto current = grid.profile();
      if (!previous.empty()) {
        const auto [delta, epsilon] = convergence_distance(current, previous);
        result.convergence.push_back({t, delta, epsilon});
        if (epsilon < config.epsilon_stop) {
          result.converged = true;
          break;
        }
      }
      previous = std::move(current);
    }
  }
  return result;
}

ChainTrace sample_run(const TargetModel& model, const BiasProfile& profile, const RandomWalk& walk,
                      const SampleConfig& config, std::vector<double> initial) {
  config.validate();
  if (walk.steps.size() != model.dimension()) {
    throw ConfigError("random walk dimension does not match the model");
  }
  const CoordinateBinding binding(model, profile.spec());
  ChainState state = make_state(binding, std::move(initial));
  ChainTrace trace;
  trace.coordinate_names = coordinate_names(model);
  trace.profile_checksum = profile.checksum();
  trace.states.reserve(static_cast<std::size_t>(config.t_max / config.thin) * model.dimension());

  Rng rng = make_rng(config.seed, config.stream);
  StepWorkspace workspace;
  OrderingTracker ordering;
  ordering.observe(model, state.x, trace);
  const auto bias = [&profile](double xi, std::optional<std::size_t>) { return profile.bias_at(xi); };

  for (std::uint64_t t = 0; t < config.burn_in; ++t) {
    mh_step(state, binding, walk, bias, false, rng, workspace);
  }
  ordering.observe(model, state.x, trace);
  trace.ordering_switches = 0;
  for (std::uint64_t t = 1; t <= config.t_max; ++t) {
    if (mh_step(state, binding, walk, bias, false, rng, workspace)) {
      ++trace.accepted;
      ordering.observe(model, state.x, trace);
    }
    trace.iterations = t;
    if (t % config.thin == 0) {
      trace.push(t, state, profile.bias_at(state.xi));
    }
    if (config.cache_check_every > 0 && t % config.cache_check_every == 0) {
      check_cache(binding, state);
    }
  }
  return trace;
}

std::vector<ChainTrace> sample_chains(const TargetModel& model, const BiasProfile& profile, const RandomWalk& walk,
                                      const SampleConfig& config, const std::vector<std::vector<double>>& initial) {
  std::vector<ChainTrace> traces(initial.size());
  std::vector<std::exception_ptr> errors(initial.size());
  std::vector<std::thread> workers;
  workers.reserve(initial.size());
  for (std::size_t c = 0; c < initial.size(); ++c) {
    workers.emplace_back([&, c] {
      try {
        SampleConfig chain_config = config;
        chain_config.stream = config.stream + c;
        traces[c] = sample_run(model, profile, walk, chain_config, initial[c]);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& worker : workers) {
    worker.join();
  }
  for (const auto& error : errors) {
    if (error) {
      std::rethrow_exception(error);
    }
  }
  return traces;
}

std::pair<double, double> convergence_distance(std::span<const double> now, std::span<const double> prev) {
  if (now.size() != prev.size()) {
    throw ConfigError("bias profiles have different lengths");
  }
  if (now.empty()) {
    return {0.0, 0.0};
  }
  const double n = static_cast<double>(now.size());
  const double shift = (std::accumulate(now.begin(), now.end(), 0.0) - std::accumulate(prev.begin(), prev.end(), 0.0)) / n;
  double sq = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < now.size(); ++i) {
    const double d = now[i] - prev[i] - shift;
    sq += d * d;
    norm += now[i] * now[i];
  }
  const double delta = std::sqrt(sq);
  if (norm == 0.0) {
    return {delta, delta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()};
  }
  return {delta, delta / std::sqrt(norm)};
}

std::vector<double> initial_mixture_state(const MixtureModel& model, Rng& rng) {
  const PriorConfig& prior = model.prior();
  const ThetaLayout layout = model.layout();
  const int K = prior.K;
  std::vector<double> x(layout.dimension(), 0.0);

  // Prior mean rather than a draw: Gamma(g, h) with g < 1 puts most of its mass near 0,
  // which would make the precisions below huge and freeze a random walk.
  const double beta = prior.g / prior.h;
  x[layout.beta()] = beta;

  std::gamma_distribution<double> lambda_prior(prior.alpha, 1.0 / beta);
  for (int k = 0; k < K; ++k) {
    x[layout.lambda(k)] = std::max(lambda_prior(rng), std::numeric_limits<double>::min());
  }

  std::exponential_distribution<double> unit_exp(1.0);
  std::vector<double> gaps(static_cast<std::size_t>(K));
  for (double& gap : gaps) {
    gap = unit_exp(rng);
  }
  const double total = std::accumulate(gaps.begin(), gaps.end(), 0.0);
  for (int k = 0; k + 1 < K; ++k) {
    x[layout.q(k)] = gaps[static_cast<std::size_t>(k)] / total;
  }

  std::vector<double> sorted = model.observations().values;
  std::sort(sorted.begin(), sorted.end());
  const double last = static_cast<double>(sorted.size() - 1);
  for (int k = 0; k < K; ++k) {
    const double pos = (static_cast<double>(k) + 0.5) / static_cast<double>(K) * last;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    x[layout.mu(k)] = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }
  return x;
}

std::vector<double> enter_interval(const CoordinateBinding& binding, const RandomWalk& walk, std::vector<double> x,
                                   Rng& rng, std::uint64_t max_steps) {
  const auto& spec = binding.spec;
  if (binding.projection) {
    const std::size_t idx = *binding.projection;
    const double target = std::clamp(x[idx], spec.midpoint(0), spec.midpoint(spec.n_bins - 1));
    if (target == x[idx]) {
      return x;
    }
    if (spec.kind == CoordinateKind::Q1) {
      const auto& mixture = dynamic_cast<const MixtureModel&>(*binding.model);
      const ThetaLayout layout = mixture.layout();
      const double old_rest = 1.0 - x[idx];
      const double scale = old_rest > 0.0 ? (1.0 - target) / old_rest : 0.0;
      for (int k = 1; k + 1 < layout.K; ++k) {
        x[layout.q(k)] *= scale;
      }
    }
    x[idx] = target;
    if (!binding.model->in_support(x)) {
      throw NumericError("cannot place the initial state inside the truncation interval");
    }
    return x;
  }
  ChainState state = make_state(binding, std::move(x));
  StepWorkspace workspace;
  const auto no_bias = [](double, std::optional<std::size_t>) { return 0.0; };
  for (std::uint64_t step = 0; step < max_steps && !state.bin; ++step) {
    mh_step(state, binding, walk, no_bias, false, rng, workspace);
  }
  if (!state.bin) {
    throw NumericError("chain did not reach [" + csv::format(spec.z_min) + ", " + csv::format(spec.z_max) +
                       "] within " + std::to_string(max_steps) + " steps (last value " + csv::format(state.xi) +
                       ")");
  }
  return state.x;
}

void write_trace_csv(const ChainTrace& trace, const std::filesystem::path& path, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != trace.size()) {
    throw ConfigError("weight column length does not match the trace");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write trace file '" + path.string() + "'");
  }
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016llx", static_cast<unsigned long long>(trace.profile_checksum));
  out << "# profile_checksum=" << checksum << " iterations=" << trace.iterations << " accepted=" << trace.accepted
      << " ordering_switches=" << trace.ordering_switches << '\n';
  out << "iter,xi,V,bias";
  for (const auto& name : trace.coordinate_names) {
    out << ',' << name;
  }
  if (!weights.empty()) {
    out << ",weight";
  }
  out << '\n';
  for (std::size_t r = 0; r < trace.size(); ++r) {
    out << trace.iter[r] << ',' << csv::format(trace.xi[r]) << ',' << csv::format(trace.potential[r]) << ','
        << csv::format(trace.bias[r]);
    for (double v : trace.state(r)) {
      out << ',' << csv::format(v);
    }
    if (!weights.empty()) {
      out << ',' << csv::format(weights[r]);
    }
    out << '\n';
  }
  if (!out) {
    throw ConfigError("failed writing trace file '" + path.string() + "'");
  }
}

ChainTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read trace file '" + path.string() + "'");
  }
  ChainTrace trace;
  std::string line;
  bool have_header = false;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line.front() == '#') {
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
          continue;
        }
        const auto key = token.substr(0, eq);
        const auto value = token.substr(eq + 1);
        if (key == "profile_checksum") {
          trace.profile_checksum = std::stoull(value, nullptr, 16);
        } else if (key == "iterations") {
          trace.iterations = std::stoull(value);
        } else if (key == "accepted") {
          trace.accepted = std::stoull(value);
        } else if (key == "ordering_switches") {
          trace.ordering_switches = std::stoull(value);
        }
      }
      continue;
    }
    const auto fields = csv::split(line);
    if (!have_header) {
      if (fields.size() < 5 || fields[0] != "iter" || fields[1] != "xi" || fields[2] != "V" || fields[3] != "bias") {
        throw ConfigError("trace file '" + path.string() + "' lacks the iter,xi,V,bias header");
      }
      columns = fields.size();
      std::size_t end = fields.size();
      if (fields.back() == "weight") {
        --end;
      }
      for (std::size_t i = 4; i < end; ++i) {
        trace.coordinate_names.emplace_back(fields[i]);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != columns) {
      throw ConfigError("trace file '" + path.string() + "' has a row with " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(columns));
    }
    trace.iter.push_back(std::stoull(std::string(fields[0])));
    trace.xi.push_back(csv::parse(fields[1]));
    trace.potential.push_back(csv::parse(fields[2]));
    trace.bias.push_back(csv::parse(fields[3]));
    for (std::size_t i = 0; i < trace.dimension(); ++i) {
      trace.states.push_back(csv::parse(fields[4 + i]));
    }
  }
  if (!have_header) {
    throw ConfigError("trace file '" + path.string() + "' is empty");
  }
  return trace;
}

void write_convergence_csv(const std::vector<ConvergenceRecord>& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write convergence log '" + path.string() + "'");
  }
  out << "iter,delta,epsilon\n";
  for (const auto& record : log) {
    out << record.iter << ',' << csv::format(record.delta) << ',' << csv::format(record.epsilon) << '\n';
  }
}

}  // namespace abfmix
