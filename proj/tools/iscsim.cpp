// Copyright 2026 The iscsim Authors
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

// Command-line runner: iscsim <subcommand> --config <path> [--seed S] [--threads T] [--out DIR] [--validate]

#include <iostream>

#include <CLI11.hpp>

#include "iscsim/experiments.hpp"
#include "iscsim/parallel.hpp"

namespace ex = iscsim::experiments;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel simulation and side-information compression experiments"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::uint64_t seed = 0;
  unsigned threads = iscsim::default_threads();
  std::string out_dir = ".";
  bool validate_only = false;

  for (const auto& name : ex::kind_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "flat key = value configuration file")->required();
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory for CSV files");
    sub->add_flag("--validate", validate_only, "check the configuration and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const ex::Kind kind = *ex::kind_from_string(chosen->get_name());
  const bool seed_given = chosen->count("--seed") > 0;

  ex::Config config;
  try {
    config = ex::Config::load(config_path);
    if (seed_given) config.set("seed", std::to_string(seed));
  } catch (const ex::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kExitConfig;
  }

  const auto report = ex::validate(kind, config);
  if (!report.empty()) {
    for (const auto& line : report) std::cerr << config_path << ": " << line << '\n';
    return kExitConfig;
  }
  if (validate_only) {
    std::cout << config_path << ": ok\n";
    return 0;
  }

  try {
    ex::RunOptions options;
    options.out_dir = out_dir;
    options.threads = threads;
    const auto result = ex::run(kind, config, options, std::cerr);
    for (const auto& f : result.files) std::cout << f.string() << '\n';
  } catch (const ex::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
