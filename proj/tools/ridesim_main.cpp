// Copyright 2026 The ridesim Authors
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

// Command-line front end: ridesim <subcommand> -c run.ini [key=value ...]
// Exit status 0 on success, 1 on validation errors, 2 on runtime failures.

#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ridesim/ridesim.hpp"

namespace {

constexpr int kValidationError = 1;
constexpr int kRuntimeFailure = 2;

ridesim::RunConfig load_config(const std::string& path,
                               const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw ridesim::ValidationError("cannot open config " + path);
  auto config = ridesim::parse_config(is);
  ridesim::apply_overrides(config, overrides);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ride-hailing marketplace simulator with learned driver agents"};
  app.set_version_flag("--version", std::string(ridesim::kVersion));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;

  using Stage = void (ridesim::Pipeline::*)() const;
  const std::vector<std::tuple<std::string, std::string, Stage>> stages = {
      {"synth", "write a synthetic trip log with a known acceptance policy",
       &ridesim::Pipeline::synth},
      {"ingest", "parse and clean the trip log", &ridesim::Pipeline::ingest},
      {"fit", "fit demand distributions and the weekly time profile",
       &ridesim::Pipeline::fit},
      {"generate", "write a stand-alone ride stream", &ridesim::Pipeline::generate},
      {"train-bc", "clone driver behaviour from the cleaned log",
       &ridesim::Pipeline::train_bc},
      {"train-rl", "fine-tune the cloned agent in the simulator",
       &ridesim::Pipeline::train_rl_stage},
      {"evaluate", "replicate the simulation and report demand and acceptance",
       &ridesim::Pipeline::evaluate},
      {"sweep", "retrain and evaluate across values of one platform setting",
       &ridesim::Pipeline::sweep},
  };
  std::map<CLI::App*, Stage> by_command;
  for (const auto& [name, help, stage] : stages) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "INI run configuration")->required();
    sub->add_option("overrides", overrides, "section.key=value overrides");
    by_command[sub] = stage;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationError;
  }

  try {
    const ridesim::Pipeline pipeline(load_config(config_path, overrides));
    for (const auto& [sub, stage] : by_command) {
      if (sub->parsed()) (pipeline.*stage)();
    }
  } catch (const ridesim::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}
