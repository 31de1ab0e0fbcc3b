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

#include <abfmix/model.hpp>

#include <abfmix/error.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string_view>

namespace abfmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool valid_flat(std::span<const double> x, int K) {
  const ThetaLayout layout{K};
  if (x.size() != layout.dimension()) {
    return false;
  }
  double q_sum = 0.0;
  for (int k = 0; k + 1 < K; ++k) {
    const double q = x[layout.q(k)];
    if (!(q >= 0.0) || !std::isfinite(q)) {
      return false;
    }
    q_sum += q;
  }
  if (q_sum > 1.0) {
    return false;
  }
  for (int k = 0; k < K; ++k) {
    if (!std::isfinite(x[layout.mu(k)])) {
      return false;
    }
    const double lambda = x[layout.lambda(k)];
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      return false;
    }
  }
  const double beta = x[layout.beta()];
  return beta > 0.0 && std::isfinite(beta);
}

double implicit_weight(std::span<const double> x, int K, int k) {
  const ThetaLayout layout{K};
  if (k + 1 < K) {
    return x[layout.q(k)];
  }
  double q_sum = 0.0;
  for (int j = 0; j + 1 < K; ++j) {
    q_sum += x[layout.q(j)];
  }
  return std::max(0.0, 1.0 - q_sum);
}

/// Per-component log q_k + log lambda_k / 2 and log lambda_k / 2.
struct ComponentTerms {
  std::vector<double> log_weighted;
  std::vector<double> half_log_lambda;
};

ComponentTerms component_terms(std::span<const double> x, int K) {
  const ThetaLayout layout{K};
  ComponentTerms terms;
  terms.log_weighted.resize(static_cast<std::size_t>(K));
  terms.half_log_lambda.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const double q = implicit_weight(x, K, k);
    const double half_log_lambda = 0.5 * std::log(x[layout.lambda(k)]);
    terms.half_log_lambda[static_cast<std::size_t>(k)] = half_log_lambda;
    terms.log_weighted[static_cast<std::size_t>(k)] = (q > 0.0 ? std::log(q) : kNegInf) + half_log_lambda;
  }
  return terms;
}

/// log sum_k q_k lambda_k^{1/2} exp(-lambda_k (y - mu_k)^2 / 2) with a max shift.
double log_mixture_density(double y, std::span<const double> x, int K, const ComponentTerms& terms,
                           std::span<double> scratch) {
  const ThetaLayout layout{K};
  double hi = kNegInf;
  for (int k = 0; k < K; ++k) {
    const double d = y - x[layout.mu(k)];
    const double a = terms.log_weighted[static_cast<std::size_t>(k)] - 0.5 * x[layout.lambda(k)] * d * d;
    scratch[static_cast<std::size_t>(k)] = a;
    hi = std::max(hi, a);
  }
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    sum += std::exp(scratch[static_cast<std::size_t>(k)] - hi);
  }
  return hi + std::log(sum);
}

double log_phi(double y, std::span<const double> x, const ThetaLayout& layout, int k,
               const ComponentTerms& terms) {
  const double d = y - x[layout.mu(k)];
  return terms.half_log_lambda[static_cast<std::size_t>(k)] - 0.5 * x[layout.lambda(k)] * d * d;
}

double prior_potential(std::span<const double> x, const PriorConfig& prior) {
  const ThetaLayout layout{prior.K};
  const double beta = x[layout.beta()];
  double log_lambda_sum = 0.0;
  double lambda_sum = 0.0;
  double mu_sq = 0.0;
  for (int k = 0; k < prior.K; ++k) {
    const double lambda = x[layout.lambda(k)];
    log_lambda_sum += std::log(lambda);
    lambda_sum += lambda;
    const double d = x[layout.mu(k)] - prior.m;
    mu_sq += d * d;
  }
  return -(prior.alpha - 1.0) * log_lambda_sum + 0.5 * prior.kappa * mu_sq + beta * (prior.h + lambda_sum) -
         (prior.K * prior.alpha + prior.g - 1.0) * std::log(beta);
}

}  // namespace

Observations Observations::from_values(std::vector<double> values) {
  if (values.empty()) {
    throw ConfigError("dataset is empty");
  }
  Observations obs;
  obs.n = values.size();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  obs.min = *lo;
  obs.max = *hi;
  obs.range = obs.max - obs.min;
  obs.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(obs.n);
  obs.values = std::move(values);
  return obs;
}

Observations load_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read dataset file '" + path.string() + "'");
  }
  std::vector<double> values;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') {
      continue;
    }
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (*begin == '+') {
      ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_number) + ": not a number: '" +
                        std::string(text) + "'");
    }
    values.push_back(value);
  }
  if (values.empty()) {
    throw ConfigError("dataset file '" + path.string() + "' contains no data");
  }
  return Observations::from_values(std::move(values));
}

void PriorConfig::validate() const {
  if (K < 1) {
    throw ConfigError("number of components K must be >= 1");
  }
  if (!(kappa > 0.0) || !(alpha > 0.0) || !(g > 0.0) || !(h > 0.0)) {
    throw ConfigError("prior hyperparameters kappa, alpha, g, h must be positive");
  }
  if (!std::isfinite(m) || !std::isfinite(kappa) || !std::isfinite(h)) {
    throw ConfigError("prior hyperparameters must be finite");
  }
}

PriorConfig default_prior(const Observations& obs, int K) {
  if (K < 1) {
    throw ConfigError("number of components K must be >= 1");
  }
  if (!(obs.range > 0.0)) {
    throw ConfigError("degenerate dataset: all observations are equal (range is 0)");
  }
  PriorConfig prior;
  prior.K = K;
  prior.m = obs.mean;
  prior.kappa = 4.0 / (obs.range * obs.range);
  prior.alpha = 2.0;
  prior.g = 0.2;
  prior.h = 100.0 * prior.g / (prior.alpha * obs.range * obs.range);
  return prior;
}

double Theta::weight(int k) const {
  if (k + 1 < components()) {
    return q[static_cast<std::size_t>(k)];
  }
  return 1.0 - std::accumulate(q.begin(), q.end(), 0.0);
}

bool Theta::in_support() const {
  const int K = components();
  if (K < 1 || static_cast<int>(q.size()) != K - 1 || static_cast<int>(lambda.size()) != K) {
    return false;
  }
  return valid_flat(pack(*this), K);
}

std::vector<double> pack(const Theta& theta) {
  std::vector<double> x;
  x.reserve(theta.q.size() + theta.mu.size() + theta.lambda.size() + 1);
  x.insert(x.end(), theta.q.begin(), theta.q.end());
  x.insert(x.end(), theta.mu.begin(), theta.mu.end());
  x.insert(x.end(), theta.lambda.begin(), theta.lambda.end());
  x.push_back(theta.beta);
  return x;
}

Theta unpack(std::span<const double> x, int K) {
  const ThetaLayout layout{K};
  if (x.size() != layout.dimension()) {
    throw ConfigError("state vector has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(layout.dimension()));
  }
  Theta theta;
  theta.q.assign(x.begin(), x.begin() + (K - 1));
  theta.mu.assign(x.begin() + (K - 1), x.begin() + (2 * K - 1));
  theta.lambda.assign(x.begin() + (2 * K - 1), x.begin() + (3 * K - 1));
  theta.beta = x[layout.beta()];
  return theta;
}

MixtureModel::MixtureModel(Observations obs, PriorConfig prior) : obs_(std::move(obs)), prior_(prior) {
  prior_.validate();
}

bool MixtureModel::in_support(std::span<const double> x) const { return valid_flat(x, prior_.K); }

double MixtureModel::log_likelihood(std::span<const double> x, int K) const {
  const auto terms = component_terms(x, K);
  std::vector<double> scratch(static_cast<std::size_t>(K));
  double total = 0.0;
  for (double y : obs_.values) {
    total += log_mixture_density(y, x, K, terms, scratch);
  }
  return total;
}

std::optional<double> MixtureModel::potential(std::span<const double> x) const {
  if (!in_support(x)) {
    return std::nullopt;
  }
  return prior_potential(x, prior_) - log_likelihood(x, prior_.K);
}

double MixtureModel::partial(std::span<const double> x, std::size_t index) const {
  if (!in_support(x)) {
    throw OutOfSupport();
  }
  const int K = prior_.K;
  const ThetaLayout layout{K};
  if (index >= layout.dimension()) {
    throw ConfigError("unknown coordinate index " + std::to_string(index));
  }
  const double beta = x[layout.beta()];
  if (index == layout.beta()) {
    double lambda_sum = 0.0;
    for (int k = 0; k < K; ++k) {
      lambda_sum += x[layout.lambda(k)];
    }
    return prior_.h + lambda_sum - (K * prior_.alpha + prior_.g - 1.0) / beta;
  }

  const auto terms = component_terms(x, K);
  std::vector<double> scratch(static_cast<std::size_t>(K));
  const auto slot = static_cast<int>(index);

  if (slot < K - 1) {
    // Weight q_j; q_K = 1 - sum(q) moves in the opposite direction.
    const int j = slot;
    double grad = 0.0;
    for (double y : obs_.values) {
      const double log_p = log_mixture_density(y, x, K, terms, scratch);
      grad += std::exp(log_phi(y, x, layout, j, terms) - log_p) - std::exp(log_phi(y, x, layout, K - 1, terms) - log_p);
    }
    return -grad;
  }
  if (slot < 2 * K - 1) {
    const int j = slot - (K - 1);
    const double mu = x[layout.mu(j)];
    const double lambda = x[layout.lambda(j)];
    double grad = 0.0;
    for (double y : obs_.values) {
      const double log_p = log_mixture_density(y, x, K, terms, scratch);
      const double resp = std::exp(scratch[static_cast<std::size_t>(j)] - log_p);
      grad += resp * lambda * (y - mu);
    }
    return prior_.kappa * (mu - prior_.m) - grad;
  }
  const int j = slot - (2 * K - 1);
  const double mu = x[layout.mu(j)];
  const double lambda = x[layout.lambda(j)];
  double grad = 0.0;
  for (double y : obs_.values) {
    const double log_p = log_mixture_density(y, x, K, terms, scratch);
    const double resp = std::exp(scratch[static_cast<std::size_t>(j)] - log_p);
    const double d = y - mu;
    grad += resp * (0.5 / lambda - 0.5 * d * d);
  }
  return -(prior_.alpha - 1.0) / lambda + beta - grad;
}

std::string MixtureModel::coordinate_name(std::size_t index) const {
  const int K = prior_.K;
  const ThetaLayout layout{K};
  if (index == layout.beta()) {
    return "beta";
  }
  const auto slot = static_cast<int>(index);
  if (slot < K - 1) {
    return "q" + std::to_string(slot + 1);
  }
  if (slot < 2 * K - 1) {
    return "mu" + std::to_string(slot - (K - 1) + 1);
  }
  if (slot < 3 * K - 1) {
    return "lambda" + std::to_string(slot - (2 * K - 1) + 1);
  }
  throw ConfigError("unknown coordinate index " + std::to_string(index));
}

std::optional<std::uint64_t> MixtureModel::ordering_key(std::span<const double> x) const {
  const int K = prior_.K;
  const ThetaLayout layout{K};
  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x[layout.mu(a)] < x[layout.mu(b)]; });
  std::uint64_t key = 0;
  for (int idx : order) {
    key = key * static_cast<std::uint64_t>(K) + static_cast<std::uint64_t>(idx);
  }
  return key;
}

double log_posterior_potential(const Theta& theta, const Observations& obs, const PriorConfig& prior) {
  if (theta.components() != prior.K || !theta.in_support()) {
    throw OutOfSupport();
  }
  const auto x = pack(theta);
  const auto terms = component_terms(x, prior.K);
  std::vector<double> scratch(static_cast<std::size_t>(prior.K));
  double log_lik = 0.0;
  for (double y : obs.values) {
    log_lik += log_mixture_density(y, x, prior.K, terms, scratch);
  }
  return prior_potential(x, prior) - log_lik;
}

double partial_potential(const Theta& theta, PartialCoordinate coord, const Observations& obs,
                         const PriorConfig& prior) {
  if (theta.components() != prior.K || !theta.in_support()) {
    throw OutOfSupport();
  }
  const ThetaLayout layout{prior.K};
  const MixtureModel model(obs, prior);
  const auto x = pack(theta);
  switch (coord) {
    case PartialCoordinate::Beta:
      return model.partial(x, layout.beta());
    case PartialCoordinate::Q1:
      if (prior.K < 2) {
        throw ConfigError("q1 is not a free parameter when K = 1");
      }
      return model.partial(x, layout.q(0));
    case PartialCoordinate::Mu1:
      return model.partial(x, layout.mu(0));
  }
  throw ConfigError("unknown coordinate");
}

std::optional<Theta> remove_component(const Theta& theta, int k) {
  const int K = theta.components();
  if (K < 2 || k < 0 || k >= K) {
    return std::nullopt;
  }
  const double removed = theta.weight(k);
  if (!(removed < 1.0)) {
    return std::nullopt;
  }
  const double scale = 1.0 / (1.0 - removed);
  Theta reduced;
  reduced.beta = theta.beta;
  for (int l = 0; l < K; ++l) {
    if (l == k) {
      continue;
    }
    reduced.mu.push_back(theta.mu[static_cast<std::size_t>(l)]);
    reduced.lambda.push_back(theta.lambda[static_cast<std::size_t>(l)]);
    if (static_cast<int>(reduced.q.size()) < K - 2) {
      reduced.q.push_back(theta.weight(l) * scale);
    }
  }
  return reduced;
}

}  // namespace abfmix
