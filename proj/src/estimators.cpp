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

#include <abfmix/estimators.hpp>

#include <abfmix/error.hpp>
#include <abfmix/numeric.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace abfmix {

namespace {

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) {
    return 0.0;
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

/// Per-record log weights for the K-component target and for each removed component.
struct EvidenceTerms {
  std::vector<double> log_w;
  /// removed[k][r] = log w_{-k} of record r, -inf when the record is excluded.
  std::vector<std::vector<double>> removed;
  std::size_t excluded = 0;
};

EvidenceTerms evidence_terms(const WeightedSample& ws, const MixtureModel& model) {
  const int K = model.prior().K;
  EvidenceTerms terms;
  terms.log_w = ws.log_weights;
  terms.removed.assign(static_cast<std::size_t>(K), std::vector<double>(ws.size()));
  for (std::size_t r = 0; r < ws.size(); ++r) {
    const auto x = ws.trace->state(r);
    const double full = model.log_likelihood(x, K);
    const Theta theta = unpack(x, K);
    for (int k = 0; k < K; ++k) {
      const auto reduced = remove_component(theta, k);
      auto& slot = terms.removed[static_cast<std::size_t>(k)][r];
      if (!reduced) {
        slot = -std::numeric_limits<double>::infinity();
        ++terms.excluded;
        continue;
      }
      slot = ws.log_weights[r] + model.log_likelihood(pack(*reduced), K - 1) - full;
    }
  }
  return terms;
}

/// log(I_K / I_{K-1}) over records [begin, end) of the concatenated terms.
double log_ratio(const std::vector<const EvidenceTerms*>& parts, std::size_t begin, std::size_t end) {
  std::vector<double> log_w;
  std::vector<std::vector<double>> removed(parts.front()->removed.size());
  std::size_t offset = 0;
  for (const auto* part : parts) {
    const std::size_t n = part->log_w.size();
    const std::size_t lo = std::clamp(begin, offset, offset + n) - offset;
    const std::size_t hi = std::clamp(end, offset, offset + n) - offset;
    log_w.insert(log_w.end(), part->log_w.begin() + static_cast<std::ptrdiff_t>(lo),
                 part->log_w.begin() + static_cast<std::ptrdiff_t>(hi));
    for (std::size_t k = 0; k < removed.size(); ++k) {
      for (std::size_t r = lo; r < hi; ++r) {
        if (std::isfinite(part->removed[k][r])) {
          removed[k].push_back(part->removed[k][r]);
        }
      }
    }
    offset += n;
  }
  const double log_i_k = log_sum_exp(log_w) - std::log(static_cast<double>(log_w.size()));
  std::vector<double> log_i_removed;
  for (const auto& values : removed) {
    if (!values.empty()) {
      log_i_removed.push_back(log_sum_exp(values) - std::log(static_cast<double>(values.size())));
    }
  }
  if (log_i_removed.empty()) {
    throw NumericError("every record was excluded from the reduced-model estimate");
  }
  const double log_i_reduced = log_sum_exp(log_i_removed) - std::log(static_cast<double>(log_i_removed.size()));
  return log_i_k - log_i_reduced;
}

}  // namespace

WeightedSample reweight(const ChainTrace& trace, const BiasProfile& profile) {
  if (trace.size() == 0) {
    throw ConfigError("cannot reweight an empty trace");
  }
  if (trace.profile_checksum != profile.checksum()) {
    throw ConfigError("trace was sampled with a different bias profile (checksum mismatch)");
  }
  WeightedSample ws;
  ws.trace = &trace;
  ws.log_weights.resize(trace.size());
  ws.weights.resize(trace.size());
  for (std::size_t r = 0; r < trace.size(); ++r) {
    ws.log_weights[r] = -trace.bias[r];
    ws.weights[r] = std::exp(ws.log_weights[r]);
  }
  return ws;
}

WeightedSample weighted_from(const ChainTrace& trace, std::vector<double> weights) {
  if (weights.size() != trace.size()) {
    throw ConfigError("weight count does not match the trace");
  }
  WeightedSample ws;
  ws.trace = &trace;
  ws.log_weights.resize(weights.size());
  for (std::size_t r = 0; r < weights.size(); ++r) {
    if (!(weights[r] > 0.0) || !std::isfinite(weights[r])) {
      throw ConfigError("importance weights must be positive and finite");
    }
    ws.log_weights[r] = std::log(weights[r]);
  }
  ws.weights = std::move(weights);
  return ws;
}

double expectation(const WeightedSample& ws, const TestFunction& h) {
  if (ws.size() == 0) {
    throw ConfigError("expectation of an empty sample");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t r = 0; r < ws.size(); ++r) {
    num += h(ws.trace->state(r)) * ws.weights[r];
    den += ws.weights[r];
  }
  if (!(den > 0.0)) {
    throw NumericError("importance weights sum to zero");
  }
  return num / den;
}

double batch_means_error(const WeightedSample& ws, const TestFunction& h, std::size_t batches) {
  if (batches < 2 || ws.size() < batches) {
    throw ConfigError("batch means needs at least two non-empty batches");
  }
  const std::size_t per_batch = ws.size() / batches;
  std::vector<double> estimates;
  for (std::size_t b = 0; b < batches; ++b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t r = b * per_batch; r < (b + 1) * per_batch; ++r) {
      num += h(ws.trace->state(r)) * ws.weights[r];
      den += ws.weights[r];
    }
    estimates.push_back(num / den);
  }
  return sample_sd(estimates) / std::sqrt(static_cast<double>(batches));
}

double ef_numerical(std::span<const double> weights) {
  if (weights.empty()) {
    throw ConfigError("efficiency factor of an empty sample");
  }
  // Scaled by the largest weight: equal weights then give exactly 1 and large weights cannot overflow.
  const double top = *std::max_element(weights.begin(), weights.end());
  if (!(top > 0.0) || !std::isfinite(top)) {
    throw NumericError("importance weights are zero or not finite");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double w : weights) {
    const double u = w / top;
    sum += u;
    sum_sq += u * u;
  }
  return (sum * sum) / (static_cast<double>(weights.size()) * sum_sq);
}

EvidenceEstimate log_evidence_ratio(std::span<const WeightedSample> samples, const MixtureModel& model) {
  if (model.prior().K < 2) {
    throw ConfigError("evidence ratio needs K >= 2");
  }
  if (samples.empty()) {
    throw ConfigError("evidence ratio needs at least one chain");
  }
  std::vector<EvidenceTerms> terms;
  std::size_t total = 0;
  for (const auto& ws : samples) {
    if (ws.size() == 0) {
      throw ConfigError("evidence ratio from an empty chain");
    }
    terms.push_back(evidence_terms(ws, model));
    total += ws.size();
  }
  std::vector<const EvidenceTerms*> all;
  for (const auto& t : terms) {
    all.push_back(&t);
  }

  EvidenceEstimate estimate;
  estimate.chains = samples.size();
  estimate.log_ratio = log_ratio(all, 0, total);
  for (const auto& t : terms) {
    estimate.excluded += t.excluded;
  }
  if (samples.size() >= 2) {
    for (const auto& t : terms) {
      estimate.per_chain.push_back(log_ratio({&t}, 0, t.log_w.size()));
    }
    estimate.std_error = sample_sd(estimate.per_chain) / std::sqrt(static_cast<double>(samples.size()));
  } else {
    constexpr std::size_t kBatches = 20;
    if (total >= kBatches) {
      const std::size_t per_batch = total / kBatches;
      std::vector<double> batch;
      for (std::size_t b = 0; b < kBatches; ++b) {
        batch.push_back(log_ratio(all, b * per_batch, (b + 1) * per_batch));
      }
      estimate.std_error = sample_sd(batch) / std::sqrt(static_cast<double>(kBatches));
    }
    estimate.per_chain.push_back(estimate.log_ratio);
  }
  return estimate;
}

std::uint64_t switch_count(const ChainTrace& trace, const TargetModel& model) {
  std::uint64_t count = 0;
  std::optional<std::uint64_t> last;
  for (std::size_t r = 0; r < trace.size(); ++r) {
    const auto key = model.ordering_key(trace.state(r));
    if (key && last && *key != *last) {
      ++count;
    }
    last = key;
  }
  return count;
}

double xi_uniformity_stat(const ChainTrace& trace, const ReactionCoordinateSpec& spec) {
  std::vector<std::uint64_t> counts(spec.n_bins, 0);
  std::uint64_t inside = 0;
  for (double xi : trace.xi) {
    if (const auto bin = bin_index(spec, xi)) {
      ++counts[*bin];
      ++inside;
    }
  }
  if (inside == 0) {
    return 1.0;
  }
  const double n = static_cast<double>(spec.n_bins);
  double worst = 0.0;
  for (auto c : counts) {
    const double freq = static_cast<double>(c) / static_cast<double>(inside);
    worst = std::max(worst, std::abs(freq - 1.0 / n) * n);
  }
  return worst;
}

double label_symmetry_stat(const WeightedSample& ws, const MixtureModel& model) {
  const ThetaLayout layout = model.layout();
  std::vector<double> means;
  std::vector<double> sds;
  for (int k = 0; k < layout.K; ++k) {
    const std::size_t idx = layout.mu(k);
    const double mean = expectation(ws, [idx](std::span<const double> x) { return x[idx]; });
    const double second = expectation(ws, [idx](std::span<const double> x) { return x[idx] * x[idx]; });
    means.push_back(mean);
    sds.push_back(std::sqrt(std::max(0.0, second - mean * mean)));
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      worst = std::max(worst, std::hypot(means[a] - means[b], sds[a] - sds[b]));
    }
  }
  return worst;
}

Diagnostics diagnostics(const WeightedSample& ws, const MixtureModel& model, const ReactionCoordinateSpec& spec) {
  Diagnostics d;
  d.switch_count = switch_count(*ws.trace, model);
  d.xi_uniformity = xi_uniformity_stat(*ws.trace, spec);
  d.label_symmetry = label_symmetry_stat(ws, model);
  return d;
}

std::string RunReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["ef_numerical"] = ef_numerical;
  doc["ef_theoretical"] = ef_theoretical;
  ordered_json expectations = ordered_json::object();
  for (const auto& [name, value] : posterior_expectations) {
    expectations[name] = value;
  }
  doc["posterior_expectations"] = expectations;
  ordered_json evidence = ordered_json::object();
  for (const auto& [K, est] : log_evidence_ratios) {
    ordered_json entry;
    entry["log_ratio"] = est.log_ratio;
    entry["std_error"] = est.std_error;
    entry["chains"] = est.chains;
    entry["per_chain"] = est.per_chain;
    entry["excluded_records"] = est.excluded;
    evidence["K" + std::to_string(K) + "_vs_K" + std::to_string(K - 1)] = entry;
  }
  doc["log_evidence_ratios"] = evidence;
  ordered_json diag;
  diag["switch_count"] = diagnostics.switch_count;
  diag["xi_uniformity_stat"] = diagnostics.xi_uniformity;
  diag["label_symmetry_stat"] = diagnostics.label_symmetry;
  diag["ordering_switches_all_iterations"] = ordering_switches;
  diag["acceptance_rate"] = acceptance_rate;
  doc["diagnostics"] = diag;
  doc["records"] = records;
  doc["iterations"] = iterations;
  doc["seeds"] = seeds;
  doc["config"] = config_json.empty() ? ordered_json::object() : ordered_json::parse(config_json);
  return doc.dump(2);
}

}  // namespace abfmix
