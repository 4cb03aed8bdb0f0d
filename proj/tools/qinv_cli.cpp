// Copyright 2026 The qinv Authors.
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

// qinv run <config-file> [--seed S] [--out DIR] [--threads T]

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qinv/config.hpp"
#include "qinv/runner.hpp"

namespace {

int run_command(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> out,
                unsigned threads) {
  std::ifstream in{path};
  if (!in) {
    std::cerr << "error: cannot read config file " << path << '\n';
    return 2;
  }
  std::ostringstream text;
  text << in.rdbuf();
  qinv::ExperimentConfig config;
  try {
    config = qinv::parse_config(text.str());
    if (seed) {
      config.seed = *seed;
    }
    if (out) {
      config.out_dir = *out;
    }
    config.validate();
  } catch (const qinv::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  }
  try {
    const auto result = qinv::run(config, {threads});
    std::cout << config.experiment << ": " << (result.exit_code == 0 ? "pass" : "FAIL") << " (" << config.out_dir
              << ", config " << qinv::config_hash(config) << ")\n";
    return result.exit_code;
  } catch (const qinv::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-invariance experiments for truncated BBM and quintic NLS flows"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned threads = 1;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file (key = value lines or a flat JSON object)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out, "Override the output directory");
  run->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  return run_command(config_path, seed, out, threads);
}
