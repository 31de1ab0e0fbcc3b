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

#include <abfmix/error.hpp>
#include <abfmix/estimators.hpp>
#include <abfmix/toy.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using abfmix::BiasProfile;
using abfmix::ChainTrace;
using abfmix::CoordinateKind;
using abfmix::ReactionCoordinateSpec;

ChainTrace synthetic_trace(const std::vector<std::vector<double>>& states, const std::vector<double>& bias) {
  ChainTrace trace;
  for (std::size_t i = 0; i < states.front().size(); ++i) {
    trace.coordinate_names.push_back("c" + std::to_string(i));
  }
  for (std::size_t r = 0; r < states.size(); ++r) {
    trace.iter.push_back(r + 1);
    trace.xi.push_back(states[r].front());
    trace.potential.push_back(0.0);
    trace.bias.push_back(bias[r]);
    trace.states.insert(trace.states.end(), states[r].begin(), states[r].end());
  }
  return trace;
}

TEST(Reweight, ZeroBiasGivesUnitWeights) {
  const auto spec = ReactionCoordinateSpec::make(CoordinateKind::ToyCoord, 0.0, 1.0, 4);
  const auto profile = BiasProfile::zero(spec);
  auto trace = synthetic_trace({{0.1}, {0.4}, {0.9}}, {0.0, 0.0, 0.0});
  trace.profile_checksum = profile.checksum();
  const auto ws = abfmix::reweight(trace, profile);
  EXPECT_EQ(ws.weights, (std::vector<double>{1.0, 1.0, 1.0}));
}

TEST(Reweight, ChecksumMismatchIsRejected) {
  const auto spec = ReactionCoordinateSpec::make(CoordinateKind::ToyCoord, 0.0, 1.0, 4);
  auto trace = synthetic_trace({{0.1}}, {0.0});
  trace.profile_checksum = 12345;
  EXPECT_THROW(abfmix::reweight(trace, BiasProfile::zero(spec)), abfmix::ConfigError);
  ChainTrace empty;
  empty.profile_checksum = BiasProfile::zero(spec).checksum();
  EXPECT_THROW(abfmix::reweight(empty, BiasProfile::zero(spec)), abfmix::ConfigError);
}

TEST(Expectation, ConstantFunctionIsExactlyOne) {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> w(0.1);
  std::vector<std::vector<double>> states;
  std::vector<double> weights;
  for (int i = 0; i < 1000; ++i) {
    states.push_back({static_cast<double>(i)});
    weights.push_back(w(rng) * 1e-3);
  }
  const auto trace = synthetic_trace(states, std::vector<double>(states.size(), 0.0));
  const auto ws = abfmix::weighted_from(trace, weights);
  EXPECT_EQ(abfmix::expectation(ws, [](std::span<const double>) { return 1.0; }), 1.0);
}

TEST(Expectation, UniformWeightsGivePlainAverage) {
  const auto trace = synthetic_trace({{1.0}, {2.0}, {6.0}}, {0.0, 0.0, 0.0});
  const auto ws = abfmix::weighted_from(trace, {2.5, 2.5, 2.5});
  EXPECT_DOUBLE_EQ(abfmix::expectation(ws, [](std::span<const double> x) { return x[0]; }), 3.0);
}

TEST(Expectation, ScaleInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<std::vector<double>> states;
  std::vector<double> weights;
  for (int i = 0; i < 500; ++i) {
    states.push_back({u(rng) * 10.0});
    weights.push_back(u(rng));
  }
  const auto trace = synthetic_trace(states, std::vector<double>(states.size(), 0.0));
  std::vector<double> scaled = weights;
  for (double& w : scaled) {
    w *= 7.3e5;
  }
  const auto a = abfmix::weighted_from(trace, weights);
  const auto b = abfmix::weighted_from(trace, scaled);
  const auto h = [](std::span<const double> x) { return x[0] * x[0]; };
  EXPECT_NEAR(abfmix::expectation(a, h), abfmix::expectation(b, h), 1e-12 * abfmix::expectation(a, h));
  EXPECT_NEAR(abfmix::ef_numerical(a), abfmix::ef_numerical(b), 1e-12);
}

TEST(WeightedFrom, RejectsInvalidWeights) {
  const auto trace = synthetic_trace({{1.0}, {2.0}}, {0.0, 0.0});
  EXPECT_THROW(abfmix::weighted_from(trace, {1.0}), abfmix::ConfigError);
  EXPECT_THROW(abfmix::weighted_from(trace, {1.0, 0.0}), abfmix::ConfigError);
  EXPECT_THROW(abfmix::weighted_from(trace, {1.0, -2.0}), abfmix::ConfigError);
}

TEST(EfNumerical, Examples) {
  EXPECT_EQ(abfmix::ef_numerical(std::vector<double>{3.0, 3.0, 3.0, 3.0}), 1.0);
  EXPECT_EQ(abfmix::ef_numerical(std::vector<double>(1000, 0.37)), 1.0);
  EXPECT_NEAR(abfmix::ef_numerical(std::vector<double>{1e300, 1e300, 1e-300}), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(abfmix::ef_numerical(std::vector<double>{1.0, 1.0, 1e-9, 1e-9}), 0.5, 1e-8);
  EXPECT_THROW(abfmix::ef_numerical(std::vector<double>{}), abfmix::ConfigError);
  std::mt19937_64 rng(4);
  std::lognormal_distribution<double> w(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> weights(50);
    for (double& v : weights) {
      v = w(rng);
    }
    const double ef = abfmix::ef_numerical(weights);
    EXPECT_GT(ef, 0.0);
    EXPECT_LE(ef, 1.0);
  }
}

TEST(BatchMeans, ZeroForConstantFunction) {
  std::vector<std::vector<double>> states;
  for (int i = 0; i < 200; ++i) {
    states.push_back({static_cast<double>(i % 7)});
  }
  const auto trace = synthetic_trace(states, std::vector<double>(200, 0.0));
  const auto ws = abfmix::weighted_from(trace, std::vector<double>(200, 1.0));
  EXPECT_EQ(abfmix::batch_means_error(ws, [](std::span<const double>) { return 2.0; }), 0.0);
  EXPECT_GT(abfmix::batch_means_error(ws, [](std::span<const double> x) { return x[0]; }), 0.0);
  EXPECT_THROW(abfmix::batch_means_error(ws, [](std::span<const double>) { return 2.0; }, 1), abfmix::ConfigError);
}

abfmix::MixtureModel evidence_model() {
  const auto obs = abfmix::Observations::from_values({-2.0, 0.0, 3.0});
  return abfmix::MixtureModel(obs, abfmix::default_prior(obs, 2));
}

TEST(LogEvidenceRatio, EmptyComponentLeavesWeightUnchanged) {
  const auto model = evidence_model();
  // q_2 = 0: removing component 2 leaves the likelihood unchanged, so w_{-2} = w.
  // Removing component 1 (weight 1) is impossible and the record is excluded.
  const auto x = abfmix::pack(abfmix::Theta{{1.0}, {0.5, 9.0}, {0.3, 2.0}, 0.5});
  const auto profile = BiasProfile::zero(ReactionCoordinateSpec::make(CoordinateKind::Beta, 0.0, 1.0, 2));
  ChainTrace trace = synthetic_trace({x, x}, {0.7, 0.7});
  trace.profile_checksum = profile.checksum();
  const auto ws = abfmix::reweight(trace, profile);
  const std::vector<abfmix::WeightedSample> samples{ws};
  const auto estimate = abfmix::log_evidence_ratio(samples, model);
  EXPECT_NEAR(estimate.log_ratio, 0.0, 1e-12);
  EXPECT_EQ(estimate.excluded, 2U);
}

TEST(LogEvidenceRatio, MatchesHandComputation) {
  const auto model = evidence_model();
  const auto x1 = abfmix::pack(abfmix::Theta{{0.3}, {-1.0, 2.0}, {0.5, 1.0}, 0.5});
  const auto x2 = abfmix::pack(abfmix::Theta{{0.6}, {0.0, 1.0}, {2.0, 0.2}, 0.9});
  const auto trace = synthetic_trace({x1, x2}, {0.0, 0.0});
  const auto ws = abfmix::weighted_from(trace, {1.0, 2.0});
  const std::vector<abfmix::WeightedSample> samples{ws};

  double i_k = 0.0;
  double i_reduced = 0.0;
  for (std::size_t r = 0; r < 2; ++r) {
    const auto x = trace.state(r);
    i_k += ws.weights[r] / 2.0;
    const auto theta = abfmix::unpack(x, 2);
    for (int k = 0; k < 2; ++k) {
      const auto reduced = *abfmix::remove_component(theta, k);
      const double ratio = std::exp(model.log_likelihood(abfmix::pack(reduced), 1) - model.log_likelihood(x, 2));
      i_reduced += ratio * ws.weights[r] / 4.0;
    }
  }
  EXPECT_NEAR(abfmix::log_evidence_ratio(samples, model).log_ratio, std::log(i_k / i_reduced), 1e-12);
}

TEST(LogEvidenceRatio, RequiresTwoComponents) {
  const auto obs = abfmix::Observations::from_values({-2.0, 0.0, 3.0});
  const abfmix::MixtureModel one(obs, abfmix::default_prior(obs, 1));
  const auto trace = synthetic_trace({{0.0, 1.0, 1.0}}, {0.0});
  const std::vector<abfmix::WeightedSample> samples{abfmix::weighted_from(trace, {1.0})};
  EXPECT_THROW(abfmix::log_evidence_ratio(samples, one), abfmix::ConfigError);
}

TEST(LogEvidenceRatio, ChainSpreadGivesStandardError) {
  const auto model = evidence_model();
  const auto x1 = abfmix::pack(abfmix::Theta{{0.3}, {-1.0, 2.0}, {0.5, 1.0}, 0.5});
  const auto x2 = abfmix::pack(abfmix::Theta{{0.6}, {0.0, 1.0}, {2.0, 0.2}, 0.9});
  const auto t1 = synthetic_trace({x1}, {0.0});
  const auto t2 = synthetic_trace({x2}, {0.0});
  const std::vector<abfmix::WeightedSample> samples{abfmix::weighted_from(t1, {1.0}),
                                                    abfmix::weighted_from(t2, {1.0})};
  const auto estimate = abfmix::log_evidence_ratio(samples, model);
  ASSERT_EQ(estimate.per_chain.size(), 2U);
  const double spread = std::abs(estimate.per_chain[0] - estimate.per_chain[1]);
  EXPECT_NEAR(estimate.std_error, spread / std::sqrt(2.0) / std::sqrt(2.0), 1e-12);
}

TEST(Diagnostics, SwitchCount) {
  const auto model = evidence_model();
  const auto a = abfmix::pack(abfmix::Theta{{0.5}, {-1.0, 2.0}, {1.0, 1.0}, 0.5});
  const auto b = abfmix::pack(abfmix::Theta{{0.5}, {2.0, -1.0}, {1.0, 1.0}, 0.5});
  EXPECT_EQ(abfmix::switch_count(synthetic_trace({a, a, a, a}, std::vector<double>(4, 0.0)), model), 0U);
  EXPECT_EQ(abfmix::switch_count(synthetic_trace({a, b, a, b, a}, std::vector<double>(5, 0.0)), model), 4U);
}

TEST(Diagnostics, XiUniformity) {
  const auto spec = ReactionCoordinateSpec::make(CoordinateKind::ToyCoord, 0.0, 1.0, 4);
  const auto flat = synthetic_trace({{0.1}, {0.3}, {0.6}, {0.9}, {5.0}}, std::vector<double>(5, 0.0));
  EXPECT_EQ(abfmix::xi_uniformity_stat(flat, spec), 0.0);
  const auto lumped = synthetic_trace({{0.1}, {0.1}, {0.6}, {0.9}}, std::vector<double>(4, 0.0));
  EXPECT_DOUBLE_EQ(abfmix::xi_uniformity_stat(lumped, spec), 1.0);
}

TEST(Diagnostics, LabelSymmetry) {
  const auto model = evidence_model();
  const auto a = abfmix::pack(abfmix::Theta{{0.5}, {-1.0, 2.0}, {1.0, 1.0}, 0.5});
  const auto b = abfmix::pack(abfmix::Theta{{0.5}, {2.0, -1.0}, {1.0, 1.0}, 0.5});
  const auto symmetric = synthetic_trace({a, b}, {0.0, 0.0});
  EXPECT_NEAR(abfmix::label_symmetry_stat(abfmix::weighted_from(symmetric, {1.0, 1.0}), model), 0.0, 1e-12);
  const auto stuck = synthetic_trace({a, a}, {0.0, 0.0});
  EXPECT_NEAR(abfmix::label_symmetry_stat(abfmix::weighted_from(stuck, {1.0, 1.0}), model), 3.0, 1e-12);
}

TEST(RunReport, StableKeyOrder) {
  abfmix::RunReport report;
  report.ef_numerical = 0.5;
  report.ef_theoretical = 0.6;
  report.posterior_expectations = {{"z", 1.0}, {"a", 2.0}};
  report.log_evidence_ratios[3] = {7.1, 0.2, 0, 5, {}};
  const auto text = report.to_json();
  EXPECT_LT(text.find("ef_numerical"), text.find("ef_theoretical"));
  EXPECT_LT(text.find("\"z\""), text.find("\"a\""));
  EXPECT_NE(text.find("K3_vs_K2"), std::string::npos);
  EXPECT_EQ(text, report.to_json());
}

}  // namespace
