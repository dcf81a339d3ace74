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

// Greedy single-user resource allocation and its Monte Carlo evaluation.
//
// Resources are scanned in index order; the first one whose predictor output
// is <= q_th is taken. If none is accepted the last resource is used anyway.
// The episode is in outage when the selected resource's future window falls
// below the rate threshold.

#ifndef OUTAGE_ALLOCATOR_HPP_
#define OUTAGE_ALLOCATOR_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "outage/analysis.hpp"
#include "outage/channel_sim.hpp"
#include "outage/predictor.hpp"

namespace outage {

struct Selection {
  std::size_t index = 1;  // 1-based resource index
  bool fallback = false;
};

struct AllocationOutcome {
  std::size_t selected_resource = 1;      // 1-based
  std::vector<double> predicted_outputs;  // prefix actually evaluated
  bool fallback_used = false;
  bool outage = false;
};

Selection greedy_select(std::span<const double> q_values, double q_th);

// Evaluates the classifier lazily, stopping at the first acceptance.
AllocationOutcome run_episode(const ChannelEpisode& episode,
                              const Classifier& classifier, double q_th,
                              double gamma_th, CapacityMode mode);
AllocationOutcome run_episode(const ChannelEpisode& episode,
                              const PredictorParams& params, double q_th,
                              double gamma_th, CapacityMode mode);

// Scores of every resource of n_episodes fresh episodes, for one or more
// classifiers, plus each resource's future-window capacity. Because scoring
// does not depend on q_th or gamma_th, one scoring pass can be evaluated at
// many thresholds; greedy selection on the full score vector matches lazy
// evaluation exactly.
struct ScoredEpisodes {
  std::size_t n_episodes = 0;
  std::size_t resource_count = 0;
  std::vector<double> future_capacity;      // n_episodes x |R|, row-major
  std::vector<std::vector<double>> scores;  // per classifier, same layout

  std::span<const double> capacities(std::size_t episode) const {
    return {future_capacity.data() + episode * resource_count, resource_count};
  }
  std::span<const double> episode_scores(std::size_t classifier,
                                         std::size_t episode) const {
    return {scores[classifier].data() + episode * resource_count,
            resource_count};
  }
};

// Episode e uses substream (seed, e); chunks are reduced in index order, so
// the output does not depend on `workers`.
ScoredEpisodes score_episodes(const SimConfig& cfg,
                              std::span<const Classifier* const> classifiers,
                              std::size_t n_episodes, IndependenceMode mode,
                              std::uint64_t seed, unsigned workers = 1);

struct MonteCarloResult {
  OutageEstimate outage;        // fraction of episodes in outage
  Proportion p1;                // over resource-1 windows
  Proportion fq;                // over resource-1 windows
  Proportion pinf;              // over accepted resource-1 windows
  bool pinf_defined = true;     // false when nothing was accepted
  OutageEstimate plugin;        // closed form fed with p1, fq, pinf
  std::size_t fallback_count = 0;
  std::vector<std::size_t> selection_counts;  // per resource

  // sqrt(se_mc^2 + se_plugin^2)
  double combined_standard_error() const;
};

MonteCarloResult evaluate_scores(const ScoredEpisodes& scored,
                                 std::size_t classifier, double q_th,
                                 double gamma_th);

MonteCarloResult monte_carlo(const SimConfig& cfg, const Classifier& classifier,
                             double q_th, std::size_t n_episodes,
                             IndependenceMode mode, std::uint64_t seed,
                             unsigned workers = 1);

}  // namespace outage

#endif  // OUTAGE_ALLOCATOR_HPP_
