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

// Experiment orchestration behind the `outage` command line tool.
//
// Output directory layout:
//   dataset.bin                 training windows (OUTAGEDS)
//   params/<loss>_r<i>.bin      trained predictors (OUTAGEQP)
//   history/<loss>_r<i>.csv     per-step training loss
//   sweep_<axis>.csv            sweep results
//   sweep_<axis>/<value>/...    predictors trained for gamma / l grid points

#ifndef OUTAGE_EXPERIMENT_HPP_
#define OUTAGE_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "outage/channel_sim.hpp"
#include "outage/trainer.hpp"

namespace outage {

// Exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitCheckFailed = 3,
  kExitIo = 4,
};

enum class SweepAxis { kQth, kGamma, kL };
std::optional<SweepAxis> parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct ExperimentConfig {
  std::uint64_t seed = 1;
  SimConfig sim;
  std::size_t n_windows = 12000;
  std::vector<LossKind> loss_kinds{std::begin(kAllLossKinds), std::end(kAllLossKinds)};
  TrainConfig train;
  // Evaluation
  std::size_t eval_resource_count = 6;
  double eval_q_th = 0.1;
  std::size_t n_episodes = 20000;
  IndependenceMode eval_mode = IndependenceMode::kSharedFft;
  unsigned workers = 1;
  // Sweep grids
  std::vector<double> q_th_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> gamma_grid{0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70};
  std::vector<std::size_t> l_grid{10, 20, 30, 40};

  void validate() const;
  // Simulation settings used for Monte Carlo evaluation.
  SimConfig eval_sim() const;
};

// Parses a JSON document. Unknown keys, wrong types and invalid values throw
// ConfigError; the message names the JSON path (and line/column for syntax
// errors).
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct SweepRow {
  double axis_value = 0.0;
  LossKind loss_kind = LossKind::kCustom;
  double mean_outage = 0.0;
  double stderr_outage = 0.0;
  double min_outage = 0.0;
  double max_outage = 0.0;
  std::size_t n_episodes = 0;
  std::size_t replicates = 0;
  double p1 = 0.0;               // empirical single-resource outage
  double theorem1_plugin = 0.0;  // q_th axis only
};

std::filesystem::path params_path(const std::filesystem::path& dir,
                                  LossKind kind, std::size_t replicate);

// Each command returns a process exit code and reports progress on `log`.
int cmd_generate(const ExperimentConfig& cfg, const std::filesystem::path& out,
                 std::ostream& log);
int cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out,
              std::ostream& log);
int cmd_sweep(const ExperimentConfig& cfg, SweepAxis axis,
              const std::filesystem::path& out, std::ostream& log);

// The sweep itself, without file output.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, SweepAxis axis,
                                const std::filesystem::path& out,
                                std::ostream& log);
void write_sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis,
                     const std::filesystem::path& path);

}  // namespace outage

#endif  // OUTAGE_EXPERIMENT_HPP_
