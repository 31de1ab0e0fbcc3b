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

// Command-line front end: abfmix {adapt|sample|report|oracle} [flags].

#include <abfmix/error.hpp>
#include <abfmix/pipeline.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

struct FlagHelp {
  const char* key;
  const char* help;
};

const FlagHelp kFlags[] = {
    {"config", "JSON file with settings; flags override its values"},
    {"data", "observations, one value per line"},
    {"toy", "built-in toy target instead of data (two_mode_1d, two_mode_2d)"},
    {"K", "number of mixture components"},
    {"rc", "reaction coordinate: beta, q1, mu1, neglogpost, toy"},
    {"zmin", "lower end of the bias interval"},
    {"zmax", "upper end of the bias interval"},
    {"nbins", "number of bins"},
    {"scheme", "abf or abp (default: abf, abp for neglogpost)"},
    {"iters", "adaptive iterations (scientific notation accepted)"},
    {"ncvg", "iterations between convergence checks"},
    {"epsilon-stop", "stop adapting once the relative bias change is below this"},
    {"tmax", "frozen-bias iterations per chain"},
    {"thin", "record every thin-th iteration"},
    {"burn-in", "unrecorded iterations before sampling (default tmax/100)"},
    {"seed", "64-bit seed"},
    {"chains", "independent chains run by report"},
    {"out", "output directory"},
    {"clip", "largest bias range kept before sampling, in nats (inf disables)"},
    {"evidence-vs", "also estimate log Z_K / Z_{K-1}; must equal K-1"},
    {"bias", "bias file (default <out>/bias.csv)"},
    {"trace", "existing trace file for report (skips sampling)"},
    {"toy-step", "random-walk step for toy targets"},
    {"cache-check-every", "verify cached chain state every this many steps (0 disables)"},
    {"adapt-family", "gaussian or cauchy"},
    {"adapt-tau-q", "weight step while adapting"},
    {"adapt-tau-mu", "mean step while adapting"},
    {"adapt-tau-v", "precision step while adapting"},
    {"adapt-tau-beta", "beta step while adapting"},
    {"sample-family", "gaussian or cauchy"},
    {"sample-tau-q", "weight step while sampling"},
    {"sample-tau-mu", "mean step while sampling"},
    {"sample-tau-v", "precision step while sampling"},
    {"sample-tau-beta", "beta step while sampling"},
};

std::string setting_key(std::string flag) {
  std::replace(flag.begin(), flag.end(), '-', '_');
  return flag;
}

void add_flags(CLI::App* cmd, std::map<std::string, std::string>& values) {
  for (const auto& flag : kFlags) {
    cmd->add_option(std::string("--") + flag.key, values[flag.key], flag.help);
  }
}

nlohmann::json collect(CLI::App* cmd, const std::map<std::string, std::string>& values) {
  nlohmann::json flags = nlohmann::json::object();
  for (const auto& flag : kFlags) {
    const std::string key = flag.key;
    if (key != "config" && cmd->get_option("--" + key)->count() > 0) {
      flags[setting_key(key)] = values.at(key);
    }
  }
  return flags;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive biasing samplers for Gaussian mixture posteriors"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> values;
  std::vector<CLI::App*> commands;
  for (const auto& [name, help] :
       {std::pair{"adapt", "learn the bias; writes bias.csv, convergence.csv, config.json"},
        std::pair{"sample", "run one chain against a frozen bias; writes trace.csv"},
        std::pair{"report", "reweight, estimate and diagnose; writes report.json"},
        std::pair{"oracle", "evaluate reference quadratures; writes oracle.json"}}) {
    auto* cmd = app.add_subcommand(name, help);
    add_flags(cmd, values[name]);
    commands.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    CLI::App* cmd = *std::find_if(commands.begin(), commands.end(), [](CLI::App* c) { return c->parsed(); });
    const std::string name = cmd->get_name();
    const auto& given = values[name];
    nlohmann::json file;
    if (cmd->get_option("--config")->count() > 0) {
      file = abfmix::read_config_file(given.at("config"));
    }
    const abfmix::PipelineConfig config = abfmix::make_config(file, collect(cmd, given));

    if (name == "oracle") {
      const auto doc = abfmix::cmd_oracle(config);
      std::cout << doc.dump(2) << '\n';
      return 0;
    }
    const abfmix::ResolvedRun run = abfmix::resolve(config);
    if (name == "adapt") {
      const auto outcome = abfmix::cmd_adapt(run);
      std::cout << "iterations " << outcome.iterations << ", acceptance " << outcome.acceptance_rate
                << (outcome.converged ? ", converged" : ", not converged");
      if (!outcome.convergence.empty()) {
        std::cout << ", last epsilon " << outcome.convergence.back().epsilon;
      }
      std::cout << "\nEF theoretical " << abfmix::ef_theoretical(outcome.profile) << '\n';
    } else if (name == "sample") {
      const auto trace = abfmix::cmd_sample(run);
      std::cout << "records " << trace.size() << ", acceptance " << trace.acceptance_rate() << '\n';
    } else {
      std::cout << abfmix::cmd_report(run).to_json() << '\n';
    }
    return 0;
  } catch (const abfmix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const abfmix::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericError;
  }
}
