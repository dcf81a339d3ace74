// Copyright 2026 The outage-alloc Authors.
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

// outage: generate datasets, train predictors, sweep thresholds, self-check.

#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "outage/errors.hpp"
#include "outage/experiment.hpp"
#include "outage/verify.hpp"

namespace {

using outage::ExperimentConfig;

ExperimentConfig resolve_config(const std::string& path,
                                const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg =
      path.empty() ? ExperimentConfig{} : outage::load_experiment_config(path);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outage-aware resource allocation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool quick = false;
  std::string axis_name = "q_th";

  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Master seed (overrides the config)");

  auto* generate = app.add_subcommand("generate", "Simulate the training dataset");
  auto* train = app.add_subcommand("train", "Train predictors for every loss");
  auto* sweep = app.add_subcommand("sweep", "Evaluate outage over a parameter grid");
  sweep->add_option("--axis", axis_name, "q_th | gamma | l")
      ->check(CLI::IsMember({"q_th", "gamma", "l"}));
  auto* verify = app.add_subcommand("verify", "Run the self-check suite");
  verify->add_flag("--quick", quick, "Reduced sample sizes, wider tolerances");

  // Let the global flags also appear after the subcommand.
  for (auto* sub : {generate, train, sweep, verify}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? outage::kExitOk : outage::kExitConfig;
  }

  try {
    const std::filesystem::path out(out_dir);
    if (*verify) {
      outage::VerifyOptions opts;
      opts.quick = quick;
      if (seed) opts.seed = *seed;
      const auto results = outage::run_verify(opts, std::cout);
      std::size_t failed = 0;
      for (const auto& r : results) failed += r.passed ? 0 : 1;
      std::cout << (failed == 0 ? "all checks passed"
                                : std::to_string(failed) + " check(s) failed")
                << '\n';
      return failed == 0 ? outage::kExitOk : outage::kExitCheckFailed;
    }
    const ExperimentConfig cfg = resolve_config(config_path, seed);
    if (*generate) return outage::cmd_generate(cfg, out, std::cout);
    if (*train) return outage::cmd_train(cfg, out, std::cout);
    if (*sweep) {
      return outage::cmd_sweep(cfg, *outage::parse_sweep_axis(axis_name), out,
                               std::cout);
    }
  } catch (const outage::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return outage::kExitConfig;
  } catch (const outage::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return outage::kExitIo;
  } catch (const outage::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return outage::kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return outage::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return outage::kExitOk;
}
