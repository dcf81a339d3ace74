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

#include "outage/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "outage/parallel.hpp"

namespace outage {

namespace {

constexpr std::size_t kEpisodeChunk = 64;

}  // namespace

Selection greedy_select(std::span<const double> q_values, double q_th) {
  if (q_values.empty()) throw std::invalid_argument("greedy_select: no resources");
  for (std::size_t i = 0; i < q_values.size(); ++i) {
    if (q_values[i] <= q_th) return {i + 1, false};
  }
  return {q_values.size(), true};
}

AllocationOutcome run_episode(const ChannelEpisode& episode,
                              const Classifier& classifier, double q_th,
                              double gamma_th, CapacityMode mode) {
  const std::size_t r_count = episode.resource_count();
  if (r_count == 0) throw std::invalid_argument("run_episode: empty episode");
  AllocationOutcome out;
  out.fallback_used = true;
  out.selected_resource = r_count;
  for (std::size_t r = 0; r < r_count; ++r) {
    const double q = classifier.predict(episode.input(r));
    out.predicted_outputs.push_back(q);
    if (q <= q_th) {
      out.selected_resource = r + 1;
      out.fallback_used = false;
      break;
    }
  }
  out.outage = label(episode.future(out.selected_resource - 1), gamma_th, mode) == 1;
  return out;
}

AllocationOutcome run_episode(const ChannelEpisode& episode,
                              const PredictorParams& params, double q_th,
                              double gamma_th, CapacityMode mode) {
  return run_episode(episode, LstmClassifier(params), q_th, gamma_th, mode);
}

ScoredEpisodes score_episodes(const SimConfig& cfg,
                              std::span<const Classifier* const> classifiers,
                              std::size_t n_episodes, IndependenceMode mode,
                              std::uint64_t seed, unsigned workers) {
  cfg.validate();
  if (n_episodes < 1) throw std::invalid_argument("score_episodes: n_episodes < 1");
  const std::size_t r_count = cfg.resource_count;
  ScoredEpisodes out;
  out.n_episodes = n_episodes;
  out.resource_count = r_count;
  out.future_capacity.resize(n_episodes * r_count);
  out.scores.assign(classifiers.size(), std::vector<double>(n_episodes * r_count));

  SimConfig episode_cfg = cfg;
  episode_cfg.seed = seed;
  const std::size_t n_chunks = (n_episodes + kEpisodeChunk - 1) / kEpisodeChunk;
  parallel_for(n_chunks, workers, [&](std::size_t chunk) {
    const std::size_t begin = chunk * kEpisodeChunk;
    const std::size_t end = std::min(n_episodes, begin + kEpisodeChunk);
    std::vector<ChannelEpisode> episodes;
    episodes.reserve(end - begin);
    std::vector<std::span<const cplx>> windows;
    windows.reserve((end - begin) * r_count);
    for (std::size_t e = begin; e < end; ++e) {
      episodes.push_back(simulate_episode(episode_cfg, e, mode));
      const ChannelEpisode& ep = episodes.back();
      for (std::size_t r = 0; r < r_count; ++r) {
        out.future_capacity[e * r_count + r] =
            capacity(ep.future(r), cfg.capacity_mode);
      }
    }
    for (const ChannelEpisode& ep : episodes) {
      for (std::size_t r = 0; r < r_count; ++r) windows.push_back(ep.input(r));
    }
    for (std::size_t c = 0; c < classifiers.size(); ++c) {
      std::span<double> dst(out.scores[c].data() + begin * r_count,
                            windows.size());
      classifiers[c]->predict_batch(windows, dst);
    }
  });
  return out;
}

double MonteCarloResult::combined_standard_error() const {
  return std::sqrt(outage.standard_error * outage.standard_error +
                   plugin.standard_error * plugin.standard_error);
}

MonteCarloResult evaluate_scores(const ScoredEpisodes& scored,
                                 std::size_t classifier, double q_th,
                                 double gamma_th) {
  if (classifier >= scored.scores.size()) {
    throw std::out_of_range("evaluate_scores: classifier index");
  }
  const std::size_t n = scored.n_episodes;
  MonteCarloResult res;
  res.selection_counts.assign(scored.resource_count, 0);
  std::size_t outages = 0;
  std::size_t first_outages = 0;
  std::size_t first_accepted = 0;
  std::size_t first_accepted_outages = 0;
  for (std::size_t e = 0; e < n; ++e) {
    const auto q = scored.episode_scores(classifier, e);
    const auto cap = scored.capacities(e);
    const Selection sel = greedy_select(q, q_th);
    ++res.selection_counts[sel.index - 1];
    if (sel.fallback) ++res.fallback_count;
    if (cap[sel.index - 1] < gamma_th) ++outages;

    const bool first_outage = cap[0] < gamma_th;
    first_outages += first_outage ? 1 : 0;
    if (q[0] <= q_th) {
      ++first_accepted;
      first_accepted_outages += first_outage ? 1 : 0;
    }
  }
  const Proportion mc = make_proportion(outages, n);
  res.outage = {mc.value, n, mc.standard_error, EstimateMethod::kMonteCarlo};
  res.p1 = make_proportion(first_outages, n);
  res.fq = make_proportion(first_accepted, n);
  res.pinf_defined = first_accepted > 0;
  res.pinf = make_proportion(first_accepted_outages, first_accepted);
  res.plugin = theorem1_plugin(res.p1, res.fq, res.pinf, scored.resource_count);
  return res;
}

MonteCarloResult monte_carlo(const SimConfig& cfg, const Classifier& classifier,
                             double q_th, std::size_t n_episodes,
                             IndependenceMode mode, std::uint64_t seed,
                             unsigned workers) {
  const Classifier* list[] = {&classifier};
  const ScoredEpisodes scored =
      score_episodes(cfg, list, n_episodes, mode, seed, workers);
  return evaluate_scores(scored, 0, q_th, cfg.gamma_th);
}

}  // namespace outage
