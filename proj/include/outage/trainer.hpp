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

#ifndef OUTAGE_TRAINER_HPP_
#define OUTAGE_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "outage/allocator.hpp"
#include "outage/channel_sim.hpp"
#include "outage/losses.hpp"
#include "outage/predictor.hpp"

namespace outage {

enum class LossKind { kCustom, kBce, kMse, kMae };

std::string_view to_string(LossKind kind);
std::optional<LossKind> parse_loss_kind(std::string_view name);
inline constexpr LossKind kAllLossKinds[] = {LossKind::kCustom, LossKind::kBce,
                                             LossKind::kMse, LossKind::kMae};

struct TrainConfig {
  LossKind loss_kind = LossKind::kCustom;
  double q_th_train = 0.5;  // custom loss only
  double alpha = 10.0;      // custom loss only
  std::size_t resource_count = 6;  // custom loss only
  std::size_t batch_size = 256;
  std::size_t epochs = 5;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double validation_fraction = 0.1;
  FeatureMode feature_mode = FeatureMode::kMagnitude;
  std::uint32_t hidden = 32;
  std::uint32_t dense = 16;
  std::uint64_t seed = 0;
  std::size_t replicate_count = 10;

  void validate() const;
};

struct AdamMoments {
  PredictorParams first;
  PredictorParams second;
  explicit AdamMoments(const Architecture& arch) : first(arch), second(arch) {}
};

// One bias-corrected ADAM update; step_index starts at 1.
void adam_step(PredictorParams& params, const ParamGradients& grads,
               AdamMoments& moments, std::size_t step_index,
               const TrainConfig& cfg);

struct StepRecord {
  std::size_t step = 0;  // global, from 0
  std::size_t epoch = 0;
  double loss = 0.0;
};

struct TrainHistory {
  LossKind loss_kind = LossKind::kCustom;
  std::vector<StepRecord> steps;
  std::vector<ConfusionTally> validation;  // one per epoch (Heaviside)
  double wall_clock_seconds = 0.0;
};

struct TrainResult {
  PredictorParams params;
  TrainHistory history;
};

// Mini-batch ADAM over shuffled batches (seeded by cfg.seed). The custom loss
// is a functional of the whole mini-batch and is differentiated through all
// members jointly. Throws NonFiniteLossError on a NaN/Inf loss.
TrainResult train(const TrainConfig& cfg, const Batch& data);

// Loss of a batch of outputs under cfg's loss kind.
LossValue evaluate_loss(const TrainConfig& cfg, std::span<const double> q,
                        std::span<const std::uint8_t> b);

void write_history_csv(const TrainHistory& history,
                       const std::filesystem::path& path);

struct EvalConfig {
  SimConfig sim;
  double q_th = 0.1;
  std::size_t n_episodes = 100000;
  IndependenceMode mode = IndependenceMode::kSharedFft;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct ReplicateSummary {
  std::vector<MonteCarloResult> replicates;
  std::vector<PredictorParams> params;
  double mean_outage = 0.0;
  double min_outage = 0.0;
  double max_outage = 0.0;
  double stddev_outage = 0.0;
};

// Summary statistics of per-replicate outage values.
void summarize(ReplicateSummary& summary);

// Trains replicate_count predictors with seeds seed+0 .. seed+r-1 and
// evaluates each on the same Monte Carlo episodes.
ReplicateSummary replicate_train_eval(const TrainConfig& cfg,
                                      const Batch& data,
                                      const EvalConfig& eval);

}  // namespace outage

#endif  // OUTAGE_TRAINER_HPP_
