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

#include <abfmix/pipeline.hpp>

#include <abfmix/csv.hpp>
#include <abfmix/error.hpp>
#include <abfmix/toy.hpp>
#include <abfmix_oracles/oracles.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace abfmix {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

/// Stream offset for drawing starting points, disjoint from the chain streams.
constexpr std::uint64_t kInitialStream = 1ULL << 32;

const double kInf = std::numeric_limits<double>::infinity();

std::string describe(const json& value) { return value.dump(); }

double as_double(const json& value, const std::string& key) {
  if (value.is_number()) {
    return value.get<double>();
  }
  if (value.is_string()) {
    try {
      return csv::parse(value.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("setting '" + key + "' expects a number, got " + describe(value));
}

std::string as_string(const json& value, const std::string& key) {
  if (value.is_string()) {
    return value.get<std::string>();
  }
  if (value.is_number()) {
    return value.dump();
  }
  throw ConfigError("setting '" + key + "' expects a string, got " + describe(value));
}

int as_int(const json& value, const std::string& key) {
  const std::uint64_t count = parse_count(value, key);
  if (count > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw ConfigError("setting '" + key + "' is too large");
  }
  return static_cast<int>(count);
}

double positive(double value, const std::string& key) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError("setting '" + key + "' must be positive and finite");
  }
  return value;
}

void apply(PipelineConfig& c, const std::string& key, const json& v) {
  if (key == "data") {
    c.data = as_string(v, key);
  } else if (key == "toy") {
    c.toy = as_string(v, key);
  } else if (key == "K") {
    c.K = as_int(v, key);
  } else if (key == "rc") {
    c.kind = parse_coordinate_kind(as_string(v, key));
  } else if (key == "zmin") {
    c.z_min = as_double(v, key);
  } else if (key == "zmax") {
    c.z_max = as_double(v, key);
  } else if (key == "nbins") {
    c.n_bins = parse_count(v, key);
  } else if (key == "scheme") {
    c.scheme = parse_scheme(as_string(v, key));
  } else if (key == "adapt_family") {
    c.adapt_scales.family = parse_proposal_family(as_string(v, key));
  } else if (key == "adapt_tau_q") {
    c.adapt_scales.tau_q = positive(as_double(v, key), key);
  } else if (key == "adapt_tau_mu") {
    c.adapt_scales.tau_mu = positive(as_double(v, key), key);
  } else if (key == "adapt_tau_v") {
    c.adapt_scales.tau_v = positive(as_double(v, key), key);
  } else if (key == "adapt_tau_beta") {
    c.adapt_scales.tau_beta = positive(as_double(v, key), key);
  } else if (key == "sample_family") {
    c.sample_scales.family = parse_proposal_family(as_string(v, key));
  } else if (key == "sample_tau_q") {
    c.sample_scales.tau_q = positive(as_double(v, key), key);
  } else if (key == "sample_tau_mu") {
    c.sample_scales.tau_mu = positive(as_double(v, key), key);
  } else if (key == "sample_tau_v") {
    c.sample_scales.tau_v = positive(as_double(v, key), key);
  } else if (key == "sample_tau_beta") {
    c.sample_scales.tau_beta = positive(as_double(v, key), key);
  } else if (key == "toy_step") {
    c.toy_step = positive(as_double(v, key), key);
  } else if (key == "iters") {
    c.iters = parse_count(v, key);
  } else if (key == "ncvg") {
    c.ncvg = parse_count(v, key);
  } else if (key == "epsilon_stop") {
    c.epsilon_stop = positive(as_double(v, key), key);
  } else if (key == "tmax") {
    c.t_max = parse_count(v, key);
  } else if (key == "thin") {
    c.thin = parse_count(v, key);
  } else if (key == "burn_in") {
    c.burn_in = parse_count(v, key);
  } else if (key == "seed") {
    c.seed = parse_count(v, key);
  } else if (key == "chains") {
    c.chains = parse_count(v, key);
  } else if (key == "out") {
    c.out = as_string(v, key);
  } else if (key == "clip") {
    const double clip = as_double(v, key);
    if (!(clip > 0.0)) {
      throw ConfigError("setting 'clip' must be positive (use inf to disable)");
    }
    c.clip = clip;
  } else if (key == "evidence_vs") {
    c.evidence_vs = as_int(v, key);
  } else if (key == "bias") {
    c.bias = as_string(v, key);
  } else if (key == "trace") {
    c.trace = as_string(v, key);
  } else if (key == "cache_check_every") {
    c.cache_check_every = parse_count(v, key);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

ProposalScales with_overrides(ProposalScales scales, const ScaleOverrides& o) {
  scales.tau_q = o.tau_q.value_or(scales.tau_q);
  scales.tau_mu = o.tau_mu.value_or(scales.tau_mu);
  scales.tau_v = o.tau_v.value_or(scales.tau_v);
  scales.tau_beta = o.tau_beta.value_or(scales.tau_beta);
  scales.family = o.family.value_or(scales.family);
  scales.validate();
  return scales;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("cannot create output directory '" + dir.string() + "'");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text << '\n';
  if (!out) {
    throw ConfigError("cannot write '" + path.string() + "'");
  }
}

std::vector<double> weights_of(const ChainTrace& trace) {
  std::vector<double> weights(trace.size());
  for (std::size_t r = 0; r < trace.size(); ++r) {
    weights[r] = std::exp(-trace.bias[r]);
  }
  return weights;
}

ChainTrace concatenate(const std::vector<ChainTrace>& traces) {
  ChainTrace all;
  all.coordinate_names = traces.front().coordinate_names;
  all.profile_checksum = traces.front().profile_checksum;
  for (const auto& t : traces) {
    if (t.coordinate_names != all.coordinate_names || t.profile_checksum != all.profile_checksum) {
      throw ConfigError("traces to pool do not share coordinates and bias profile");
    }
    all.iter.insert(all.iter.end(), t.iter.begin(), t.iter.end());
    all.xi.insert(all.xi.end(), t.xi.begin(), t.xi.end());
    all.potential.insert(all.potential.end(), t.potential.begin(), t.potential.end());
    all.bias.insert(all.bias.end(), t.bias.begin(), t.bias.end());
    all.states.insert(all.states.end(), t.states.begin(), t.states.end());
    all.iterations += t.iterations;
    all.accepted += t.accepted;
    all.ordering_switches += t.ordering_switches;
  }
  return all;
}

}  // namespace

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys{
      "data",           "toy",          "K",           "rc",           "zmin",           "zmax",
      "nbins",          "scheme",       "iters",       "ncvg",         "epsilon_stop",   "tmax",
      "thin",           "burn_in",      "seed",        "chains",       "out",            "clip",
      "evidence_vs",    "bias",         "trace",       "toy_step",     "cache_check_every",
      "adapt_family",   "adapt_tau_q",  "adapt_tau_mu", "adapt_tau_v", "adapt_tau_beta",
      "sample_family",  "sample_tau_q", "sample_tau_mu", "sample_tau_v", "sample_tau_beta"};
  return keys;
}

std::uint64_t parse_count(const json& value, const std::string& key) {
  const auto fail = [&] {
    return ConfigError("setting '" + key + "' expects a non-negative whole number, got " + describe(value));
  };
  if (value.is_number_unsigned()) {
    return value.get<std::uint64_t>();
  }
  if (value.is_number_integer()) {
    const auto signed_value = value.get<std::int64_t>();
    if (signed_value < 0) {
      throw fail();
    }
    return static_cast<std::uint64_t>(signed_value);
  }
  double parsed = 0.0;
  if (value.is_string()) {
    const std::string text = value.get<std::string>();
    std::uint64_t exact = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), exact);
    if (ec == std::errc() && ptr == text.data() + text.size()) {
      return exact;
    }
    try {
      parsed = csv::parse(text);
    } catch (const std::exception&) {
      throw fail();
    }
  } else if (value.is_number_float()) {
    parsed = value.get<double>();
  } else {
    throw fail();
  }
  if (!(parsed >= 0.0) || parsed >= 18446744073709551616.0 || std::floor(parsed) != parsed) {
    throw fail();
  }
  return static_cast<std::uint64_t>(parsed);
}

PipelineConfig make_config(const json& file, const json& flags) {
  PipelineConfig config;
  for (const auto& [source, settings] : {std::pair<std::string, const json*>{"config", &file}, {"flag", &flags}}) {
    if (settings->is_null()) {
      continue;
    }
    if (!settings->is_object()) {
      throw ConfigError("settings must be a JSON object");
    }
    for (const auto& [key, value] : settings->items()) {
      apply(config, key, value);
      config.sources[key] = source;
    }
  }
  return config;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file '" + path.string() + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

ResolvedRun resolve(const PipelineConfig& input) {
  ResolvedRun run;
  run.config = input;
  PipelineConfig& c = run.config;
  const auto mark = [&c](const std::string& key, const char* source) {
    if (!c.sources.contains(key)) {
      c.sources[key] = source;
    }
  };
  for (const auto& key : setting_keys()) {
    mark(key, "default");
  }

  if (c.data.has_value() == c.toy.has_value()) {
    throw ConfigError("specify exactly one of --data or --toy");
  }
  if (c.chains < 1) {
    throw ConfigError("chains must be at least 1");
  }
  if (c.n_bins < 1) {
    throw ConfigError("nbins must be at least 1");
  }
  if (c.iters < 1 || c.t_max < 1 || c.thin < 1) {
    throw ConfigError("iters, tmax and thin must be at least 1");
  }

  ProposalScales adapt_scales;
  ProposalScales sample_scales;
  if (c.toy) {
    const ToyTarget toy = toy_target(*c.toy);
    if (c.sources["rc"] != "default" && c.kind != CoordinateKind::ToyCoord) {
      throw ConfigError("toy targets only support --rc toy");
    }
    if (c.evidence_vs) {
      throw ConfigError("evidence ratios are only defined for mixture data");
    }
    c.kind = CoordinateKind::ToyCoord;
    run.model = toy.model;
    if (!c.z_min) {
      c.z_min = toy.z_min;
    }
    if (!c.z_max) {
      c.z_max = toy.z_max;
    }
    if (!c.toy_step) {
      c.toy_step = toy.step;
    }
    run.spec = ReactionCoordinateSpec::make(c.kind, *c.z_min, *c.z_max, c.n_bins, toy.coordinate);
    run.adapt_walk = RandomWalk::isotropic(c.adapt_scales.family.value_or(ProposalFamily::Gaussian), *c.toy_step,
                                           toy.model->dimension());
    run.sample_walk = RandomWalk::isotropic(c.sample_scales.family.value_or(ProposalFamily::Gaussian), *c.toy_step,
                                            toy.model->dimension());
    run.toy_start = toy.start;
  } else {
    if (c.kind == CoordinateKind::ToyCoord) {
      throw ConfigError("--rc toy requires --toy");
    }
    if (!std::filesystem::exists(*c.data)) {
      throw ConfigError("data file '" + c.data->string() + "' does not exist");
    }
    if (c.K < 1) {
      throw ConfigError("K must be at least 1");
    }
    Observations obs = load_observations(*c.data);
    PriorConfig prior = default_prior(obs, c.K);
    if (!c.z_min || !c.z_max) {
      const auto [lo, hi] = default_interval(c.kind, obs);
      if (!c.z_min) {
        c.z_min = lo;
        c.sources["zmin"] = "derived";
      }
      if (!c.z_max) {
        c.z_max = hi;
        c.sources["zmax"] = "derived";
      }
    }
    if (c.evidence_vs && (*c.evidence_vs != c.K - 1 || c.K < 2)) {
      throw ConfigError("--evidence-vs must equal K-1 (got " + std::to_string(*c.evidence_vs) + " for K=" +
                        std::to_string(c.K) + ")");
    }
    adapt_scales = with_overrides(ProposalScales::adaptive_defaults(obs), c.adapt_scales);
    sample_scales = with_overrides(ProposalScales::sampling_defaults(obs, prior.alpha), c.sample_scales);
    auto mixture = std::make_shared<const MixtureModel>(std::move(obs), prior);
    run.spec = ReactionCoordinateSpec::make(c.kind, *c.z_min, *c.z_max, c.n_bins);
    run.adapt_walk = RandomWalk::for_mixture(adapt_scales, mixture->layout());
    run.sample_walk = RandomWalk::for_mixture(sample_scales, mixture->layout());
    run.mixture = mixture;
    run.model = mixture;
    for (const char* key : {"adapt_tau_q", "adapt_tau_mu", "adapt_tau_v", "adapt_tau_beta", "sample_tau_q",
                            "sample_tau_mu", "sample_tau_v", "sample_tau_beta"}) {
      if (c.sources[key] == "default") {
        c.sources[key] = "derived";
      }
    }
    c.adapt_scales = {adapt_scales.tau_q, adapt_scales.tau_mu, adapt_scales.tau_v, adapt_scales.tau_beta,
                      adapt_scales.family};
    c.sample_scales = {sample_scales.tau_q, sample_scales.tau_mu, sample_scales.tau_v, sample_scales.tau_beta,
                       sample_scales.family};
  }

  run.scheme = scheme_for(c.kind, c.scheme);
  c.scheme = run.scheme;
  if (run.scheme == Scheme::ABF && c.kind == CoordinateKind::NegLogPost) {
    throw ConfigError("ABF needs the mean force, which is not available for the neglogpost coordinate; use abp");
  }

  if (!c.ncvg) {
    c.ncvg = std::max<std::uint64_t>(1, std::min<std::uint64_t>(1'000'000, c.iters / 10));
    c.sources["ncvg"] = "derived";
  }
  if (*c.ncvg < 1 || *c.ncvg > c.iters) {
    throw ConfigError("ncvg must lie in [1, iters]");
  }
  if (!c.burn_in) {
    c.burn_in = c.t_max / 100;
    c.sources["burn_in"] = "derived";
  }
  if (!c.clip) {
    c.clip = c.kind == CoordinateKind::NegLogPost ? 15.0 : kInf;
    c.sources["clip"] = "derived";
  }
  run.clip = *c.clip;

  run.adapt.total_iters = c.iters;
  run.adapt.check_interval = *c.ncvg;
  run.adapt.epsilon_stop = c.epsilon_stop;
  run.adapt.seed = c.seed;
  run.adapt.cache_check_every = c.cache_check_every;
  run.adapt.validate();

  run.sample.t_max = c.t_max;
  run.sample.thin = c.thin;
  run.sample.seed = c.seed;
  run.sample.stream = 1;
  run.sample.burn_in = *c.burn_in;
  run.sample.cache_check_every = c.cache_check_every;
  run.sample.validate();
  return run;
}

ordered_json ResolvedRun::echo() const {
  const PipelineConfig& c = config;
  ordered_json values;
  const auto optional_path = [](const std::optional<std::filesystem::path>& p) -> ordered_json {
    return p ? ordered_json(p->string()) : ordered_json(nullptr);
  };
  const auto scales = [](const ScaleOverrides& s) {
    return std::array<ordered_json, 5>{s.family ? ordered_json(to_string(*s.family)) : ordered_json(nullptr),
                                       s.tau_q ? ordered_json(*s.tau_q) : ordered_json(nullptr),
                                       s.tau_mu ? ordered_json(*s.tau_mu) : ordered_json(nullptr),
                                       s.tau_v ? ordered_json(*s.tau_v) : ordered_json(nullptr),
                                       s.tau_beta ? ordered_json(*s.tau_beta) : ordered_json(nullptr)};
  };
  const auto a = scales(c.adapt_scales);
  const auto s = scales(c.sample_scales);
  values["data"] = optional_path(c.data);
  values["toy"] = c.toy ? ordered_json(*c.toy) : ordered_json(nullptr);
  values["K"] = mixture ? ordered_json(c.K) : ordered_json(nullptr);
  values["rc"] = to_string(c.kind);
  values["zmin"] = spec.z_min;
  values["zmax"] = spec.z_max;
  values["nbins"] = spec.n_bins;
  values["scheme"] = to_string(scheme);
  values["iters"] = c.iters;
  values["ncvg"] = adapt.check_interval;
  values["epsilon_stop"] = c.epsilon_stop;
  values["tmax"] = c.t_max;
  values["thin"] = c.thin;
  values["burn_in"] = sample.burn_in;
  values["seed"] = c.seed;
  values["chains"] = c.chains;
  values["out"] = c.out.string();
  values["clip"] = std::isfinite(clip) ? ordered_json(clip) : ordered_json("inf");
  values["evidence_vs"] = c.evidence_vs ? ordered_json(*c.evidence_vs) : ordered_json(nullptr);
  values["bias"] = optional_path(c.bias);
  values["trace"] = optional_path(c.trace);
  values["toy_step"] = c.toy_step ? ordered_json(*c.toy_step) : ordered_json(nullptr);
  values["cache_check_every"] = c.cache_check_every;
  const char* names[] = {"family", "tau_q", "tau_mu", "tau_v", "tau_beta"};
  for (std::size_t i = 0; i < 5; ++i) {
    values[std::string("adapt_") + names[i]] = a[i];
  }
  for (std::size_t i = 0; i < 5; ++i) {
    values[std::string("sample_") + names[i]] = s[i];
  }

  ordered_json doc = ordered_json::object();
  for (const auto& [key, value] : values.items()) {
    const auto found = c.sources.find(key);
    doc[key] = ordered_json{{"value", value}, {"source", found == c.sources.end() ? "default" : found->second}};
  }
  return doc;
}

std::vector<double> initial_state(const ResolvedRun& run, std::uint64_t chain, bool inside) {
  if (!run.mixture) {
    return run.toy_start;
  }
  Rng rng = make_rng(run.config.seed, kInitialStream + chain);
  auto x = initial_mixture_state(*run.mixture, rng);
  if (inside) {
    const CoordinateBinding binding(*run.model, run.spec);
    x = enter_interval(binding, run.adapt_walk, std::move(x), rng);
  }
  return x;
}

AdaptOutcome cmd_adapt(const ResolvedRun& run) {
  ensure_directory(run.config.out);
  auto result =
      adapt_run(*run.model, run.spec, run.scheme, run.adapt_walk, run.adapt, initial_state(run, 0, true));
  AdaptOutcome outcome{result.grid.freeze(), std::move(result.convergence), result.converged,
                       result.trace.iterations, result.trace.acceptance_rate()};
  write_bias_csv(outcome.profile, run.config.out / "bias.csv");
  write_convergence_csv(outcome.convergence, run.config.out / "convergence.csv");
  write_text(run.config.out / "config.json", run.echo().dump(2));
  return outcome;
}

BiasProfile load_bias(const ResolvedRun& run) {
  const auto path = run.config.bias.value_or(run.config.out / "bias.csv");
  const BiasProfile profile = read_bias_csv(path, run.spec);
  return std::isfinite(run.clip) ? clip_profile(profile, run.clip) : profile;
}

ChainTrace cmd_sample(const ResolvedRun& run) {
  ensure_directory(run.config.out);
  const BiasProfile profile = load_bias(run);
  ChainTrace trace = sample_run(*run.model, profile, run.sample_walk, run.sample, initial_state(run, 1, false));
  write_trace_csv(trace, run.config.out / "trace.csv", weights_of(trace));
  return trace;
}

RunReport cmd_report(const ResolvedRun& run) {
  ensure_directory(run.config.out);
  const BiasProfile profile = load_bias(run);
  std::vector<ChainTrace> traces;
  if (run.config.trace) {
    traces.push_back(read_trace_csv(*run.config.trace));
  } else {
    std::vector<std::vector<double>> starts;
    for (std::size_t c = 0; c < run.config.chains; ++c) {
      starts.push_back(initial_state(run, 1 + c, false));
    }
    traces = sample_chains(*run.model, profile, run.sample_walk, run.sample, starts);
    for (std::size_t c = 0; c < traces.size(); ++c) {
      const std::string name = traces.size() == 1 ? "trace.csv" : "trace_" + std::to_string(c) + ".csv";
      write_trace_csv(traces[c], run.config.out / name, weights_of(traces[c]));
    }
  }

  std::vector<WeightedSample> samples;
  for (const auto& t : traces) {
    if (t.dimension() != run.model->dimension()) {
      throw ConfigError("trace dimension does not match the configured model");
    }
    samples.push_back(reweight(t, profile));
  }
  const ChainTrace pooled = concatenate(traces);
  const WeightedSample all = reweight(pooled, profile);

  RunReport report;
  report.ef_numerical = ef_numerical(all);
  report.ef_theoretical = ef_theoretical(profile);
  if (run.mixture) {
    const ThetaLayout layout = run.mixture->layout();
    report.posterior_expectations.emplace_back(
        "beta", expectation(all, [&](std::span<const double> x) { return x[layout.beta()]; }));
    for (int k = 0; k < layout.K; ++k) {
      report.posterior_expectations.emplace_back(
          "mu_sorted_" + std::to_string(k + 1), expectation(all, [&](std::span<const double> x) {
            std::vector<double> mu(x.begin() + static_cast<std::ptrdiff_t>(layout.mu(0)),
                                   x.begin() + static_cast<std::ptrdiff_t>(layout.mu(0)) + layout.K);
            std::nth_element(mu.begin(), mu.begin() + k, mu.end());
            return mu[static_cast<std::size_t>(k)];
          }));
    }
    report.diagnostics = diagnostics(all, *run.mixture, run.spec);
    report.diagnostics.switch_count = 0;
    for (const auto& t : traces) {
      report.diagnostics.switch_count += switch_count(t, *run.mixture);
    }
    if (run.config.evidence_vs) {
      report.log_evidence_ratios[run.config.K] = log_evidence_ratio(samples, *run.mixture);
    }
  } else {
    for (std::size_t i = 0; i < run.model->dimension(); ++i) {
      report.posterior_expectations.emplace_back(run.model->coordinate_name(i),
                                                 expectation(all, [i](std::span<const double> x) { return x[i]; }));
    }
    report.diagnostics.xi_uniformity = xi_uniformity_stat(pooled, run.spec);
  }
  report.records = pooled.size();
  report.iterations = pooled.iterations;
  report.acceptance_rate = pooled.acceptance_rate();
  report.ordering_switches = pooled.ordering_switches;
  report.seeds = {run.config.seed};
  report.config_json = run.echo().dump();
  write_text(run.config.out / "report.json", report.to_json());
  return report;
}

ordered_json cmd_oracle(const PipelineConfig& config) {
  namespace o = abfmix_oracles;
  ensure_directory(config.out);
  ordered_json doc;
  const auto y = o::evidence_fixture();
  const auto prior = o::reference_prior(y);
  const double z2 = o::log_evidence(y, 2, prior);
  const double z1 = o::log_evidence(y, 1, prior);
  doc["evidence_fixture"] = {{"data", y}, {"log_evidence_K2", z2}, {"log_evidence_K1", z1}, {"log_ratio", z2 - z1}};
  ordered_json toys = ordered_json::object();
  for (const auto& name : toy_target_names()) {
    toys[name] = {{"coordinate_mean", o::toy_coordinate_mean(name)}};
  }
  doc["toy_targets"] = toys;
  if (config.toy) {
    const ToyTarget toy = toy_target(*config.toy);
    const auto spec = ReactionCoordinateSpec::make(CoordinateKind::ToyCoord, config.z_min.value_or(toy.z_min),
                                                   config.z_max.value_or(toy.z_max), config.n_bins);
    std::vector<double> z(spec.n_bins);
    for (std::size_t i = 0; i < spec.n_bins; ++i) {
      z[i] = spec.midpoint(i);
    }
    write_bias_csv(BiasProfile(spec, o::toy_free_energy(*config.toy, z)),
                   config.out / ("oracle_free_energy_" + *config.toy + ".csv"));
  }
  write_text(config.out / "oracle.json", doc.dump(2));
  return doc;
}

}  // namespace abfmix
