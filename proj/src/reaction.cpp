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

#include <abfmix/reaction.hpp>

#include <abfmix/error.hpp>

#include <cmath>

namespace abfmix {

CoordinateKind parse_coordinate_kind(const std::string& token) {
  if (token == "beta") {
    return CoordinateKind::Beta;
  }
  if (token == "q1") {
    return CoordinateKind::Q1;
  }
  if (token == "mu1") {
    return CoordinateKind::Mu1;
  }
  if (token == "neglogpost") {
    return CoordinateKind::NegLogPost;
  }
  if (token == "toy") {
    return CoordinateKind::ToyCoord;
  }
  throw ConfigError("unknown reaction coordinate '" + token + "' (expected beta, q1, mu1 or neglogpost)");
}

std::string to_string(CoordinateKind kind) {
  switch (kind) {
    case CoordinateKind::Beta:
      return "beta";
    case CoordinateKind::Q1:
      return "q1";
    case CoordinateKind::Mu1:
      return "mu1";
    case CoordinateKind::NegLogPost:
      return "neglogpost";
    case CoordinateKind::ToyCoord:
      return "toy";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& token) {
  if (token == "abf") {
    return Scheme::ABF;
  }
  if (token == "abp") {
    return Scheme::ABP;
  }
  throw ConfigError("unknown scheme '" + token + "' (expected abf or abp)");
}

std::string to_string(Scheme scheme) { return scheme == Scheme::ABF ? "abf" : "abp"; }

ReactionCoordinateSpec ReactionCoordinateSpec::make(CoordinateKind kind, double z_min, double z_max,
                                                    std::size_t n_bins, std::size_t toy_index) {
  ReactionCoordinateSpec spec{kind, toy_index, z_min, z_max, n_bins};
  spec.validate();
  return spec;
}

void ReactionCoordinateSpec::validate() const {
  if (!std::isfinite(z_min) || !std::isfinite(z_max) || !(z_min < z_max)) {
    throw ConfigError("truncation interval requires finite z_min < z_max");
  }
  if (n_bins < 2) {
    throw ConfigError("at least two bins are required");
  }
}

std::optional<std::size_t> bin_index(const ReactionCoordinateSpec& spec, double z) {
  if (!(z >= spec.z_min) || !(z <= spec.z_max)) {
    return std::nullopt;
  }
  const std::size_t last = spec.n_bins - 1;
  if (z == spec.z_max) {
    return last;
  }
  auto i = static_cast<std::size_t>(std::floor((z - spec.z_min) / spec.delta_z()));
  if (i > last) {
    i = last;
  }
  // Align with the edges as computed by edge(), which may round differently.
  if (i > 0 && z < spec.edge(i)) {
    --i;
  } else if (i < last && z >= spec.edge(i + 1)) {
    ++i;
  }
  return i;
}

std::optional<std::size_t> projection_index(const ReactionCoordinateSpec& spec, const TargetModel& model) {
  if (spec.kind == CoordinateKind::NegLogPost) {
    return std::nullopt;
  }
  if (spec.kind == CoordinateKind::ToyCoord) {
    if (spec.toy_index >= model.dimension()) {
      throw ConfigError("coordinate index out of range for this target");
    }
    return spec.toy_index;
  }
  const auto* mixture = dynamic_cast<const MixtureModel*>(&model);
  if (mixture == nullptr) {
    throw ConfigError("coordinate '" + to_string(spec.kind) + "' requires the mixture posterior");
  }
  const ThetaLayout layout = mixture->layout();
  switch (spec.kind) {
    case CoordinateKind::Beta:
      return layout.beta();
    case CoordinateKind::Q1:
      if (layout.K < 2) {
        throw ConfigError("q1 is not a free parameter when K = 1");
      }
      return layout.q(0);
    case CoordinateKind::Mu1:
      return layout.mu(0);
    default:
      break;
  }
  throw ConfigError("unsupported coordinate");
}

double evaluate(const ReactionCoordinateSpec& spec, const Theta& theta, const Observations& obs,
                const PriorConfig& prior) {
  if (!theta.in_support()) {
    throw OutOfSupport();
  }
  switch (spec.kind) {
    case CoordinateKind::Beta:
      return theta.beta;
    case CoordinateKind::Q1:
      if (theta.q.empty()) {
        throw ConfigError("q1 is not a free parameter when K = 1");
      }
      return theta.q[0];
    case CoordinateKind::Mu1:
      return theta.mu[0];
    case CoordinateKind::NegLogPost:
      return log_posterior_potential(theta, obs, prior);
    case CoordinateKind::ToyCoord:
      return pack(theta).at(spec.toy_index);
  }
  throw ConfigError("unsupported coordinate");
}

std::pair<double, double> default_interval(CoordinateKind kind, const Observations& obs) {
  switch (kind) {
    case CoordinateKind::Beta: {
      const double r2 = obs.range * obs.range;
      return {r2 / 2000.0, r2 / 20.0};
    }
    case CoordinateKind::Q1:
      return {0.0, 1.0};
    case CoordinateKind::Mu1:
      return {obs.min, obs.max};
    case CoordinateKind::NegLogPost:
      throw ConfigError(
          "no default interval for neglogpost: the range of likely -log posterior values is not known a priori; "
          "supply --zmin and --zmax");
    case CoordinateKind::ToyCoord:
      throw ConfigError("no default interval for toy coordinates");
  }
  throw ConfigError("unsupported coordinate");
}

Scheme scheme_for(CoordinateKind kind, std::optional<Scheme> override_scheme) {
  if (override_scheme) {
    return *override_scheme;
  }
  return kind == CoordinateKind::NegLogPost ? Scheme::ABP : Scheme::ABF;
}

}  // namespace abfmix
