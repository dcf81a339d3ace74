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

#include "outage/trainer.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "outage/errors.hpp"

namespace outage {

namespace {

// Substream tags under the training seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kShuffleStream = 3;

std::uint64_t batch_hash(std::span<const std::size_t> idx) {
  std::uint64_t h = 0;
  for (std::size_t i : idx) h = mix64(h ^ i);
  return h;
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kCustom: return "custom";
    case LossKind::kBce: return "bce";
    case LossKind::kMse: return "mse";
    case LossKind::kMae: return "mae";
  }
  return "?";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  for (LossKind k : kAllLossKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train.batch_size: must be >= 1");
  if (loss_kind == LossKind::kCustom && batch_size < 2) {
    throw ConfigError("train.batch_size: custom loss needs batch_size >= 2");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate: must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("train.alpha: must be > 0");
  if (!(q_th_train >= 0.0 && q_th_train <= 1.0)) {
    throw ConfigError("train.q_th_train: must lie in [0, 1]");
  }
  if (resource_count < 1) throw ConfigError("train.resource_count: must be >= 1");
  if (epochs < 1) throw ConfigError("train.epochs: must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("train.validation_fraction: must lie in [0, 1)");
  }
  if (replicate_count < 1) throw ConfigError("train.replicate_count: must be >= 1");
}

void adam_step(PredictorParams& params, const ParamGradients& grads,
               AdamMoments& moments, std::size_t step_index,
               const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != moments.first.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  const double t = static_cast<double>(step_index);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  auto theta = params.values();
  auto g = grads.values();
  auto m = moments.first.values();
  auto v = moments.second.values();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    theta[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
  }
}

LossValue evaluate_loss(const TrainConfig& cfg, std::span<const double> q,
                        std::span<const std::uint8_t> b) {
  switch (cfg.loss_kind) {
    case LossKind::kCustom:
      return custom_loss(q, b, cfg.q_th_train, cfg.alpha, cfg.resource_count);
    case LossKind::kBce: return bce(q, b);
    case LossKind::kMse: return mse(q, b);
    case LossKind::kMae: return mae(q, b);
  }
  throw std::logic_error("evaluate_loss: unknown loss kind");
}

TrainResult train(const TrainConfig& cfg, const Batch& data) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  const auto started = std::chrono::steady_clock::now();

  std::vector<Eigen::MatrixXd> features;
  std::vector<std::uint8_t> labels;
  features.reserve(data.size());
  labels.reserve(data.size());
  for (const LabeledWindow& w : data) {
    features.push_back(featurize(w.input, cfg.feature_mode));
    labels.push_back(w.label);
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng = make_rng(cfg.seed, kSplitStream);
  std::shuffle(order.begin(), order.end(), split_rng);
  auto n_val = static_cast<std::size_t>(
      std::floor(cfg.validation_fraction * static_cast<double>(data.size())));
  if (n_val >= data.size()) n_val = 0;
  std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  const std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());

  const Architecture arch = Architecture::for_mode(cfg.feature_mode, cfg.hidden, cfg.dense);
  Rng init_rng = make_rng(cfg.seed, kInitStream);
  TrainResult result{init_params(arch, init_rng), {}};
  result.history.loss_kind = cfg.loss_kind;
  PredictorParams& params = result.params;
  AdamMoments moments(arch);

  std::vector<Eigen::MatrixXd> batch_x;
  std::vector<std::uint8_t> batch_b;
  std::vector<double> q;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = make_rng(derive_seed(cfg.seed, kShuffleStream, epoch));
    std::shuffle(train_idx.begin(), train_idx.end(), shuffle_rng);
    for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(train_idx.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(train_idx.data() + start, end - start);
      batch_x.clear();
      batch_b.clear();
      for (std::size_t i : idx) {
        batch_x.push_back(features[i]);
        batch_b.push_back(labels[i]);
      }
      const bool finite_inputs = std::all_of(
          batch_x.begin(), batch_x.end(), [](const auto& x) { return x.allFinite(); });
      LossValue loss{std::numeric_limits<double>::quiet_NaN(), {}};
      ForwardCache cache;
      if (finite_inputs) {
        cache = forward_batch(params, batch_x);
        q.assign(cache.q.data(), cache.q.data() + cache.q.size());
        loss = evaluate_loss(cfg, q, batch_b);
      }
      if (!std::isfinite(loss.value)) {
        throw NonFiniteLossError(
            fmt::format("train: non-finite {} loss at step {} (batch hash {:#018x})",
                        to_string(cfg.loss_kind), step, batch_hash(idx)),
            step, batch_hash(idx));
      }
      const ParamGradients grads = backward_batch(params, cache, loss.grad);
      adam_step(params, grads, moments, step + 1, cfg);
      result.history.steps.push_back({step, epoch, loss.value});
      ++step;
    }

    ConfusionTally tally;
    tally.weighting = Weighting::heaviside();
    tally.q_th = cfg.q_th_train;
    if (!val_idx.empty()) {
      batch_x.clear();
      batch_b.clear();
      for (std::size_t i : val_idx) {
        batch_x.push_back(features[i]);
        batch_b.push_back(labels[i]);
      }
      const std::vector<double> val_q = predict_batch(params, batch_x);
      tally = confusion(val_q, batch_b, cfg.q_th_train, Weighting::heaviside());
    }
    result.history.validation.push_back(tally);
  }
  result.history.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

void write_history_csv(const TrainHistory& history,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "step,epoch,loss_kind,loss_value,val_tp,val_fp,val_tn,val_fn\n";
  for (std::size_t i = 0; i < history.steps.size(); ++i) {
    const StepRecord& s = history.steps[i];
    const bool epoch_end =
        i + 1 == history.steps.size() || history.steps[i + 1].epoch != s.epoch;
    out << fmt::format("{},{},{},{:.17g}", s.step, s.epoch,
                       to_string(history.loss_kind), s.loss);
    if (epoch_end && s.epoch < history.validation.size()) {
      const ConfusionTally& t = history.validation[s.epoch];
      out << fmt::format(",{:.0f},{:.0f},{:.0f},{:.0f}\n", t.tp, t.fp, t.tn, t.fn);
    } else {
      out << ",,,,\n";
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void summarize(ReplicateSummary& summary) {
  const auto& reps = summary.replicates;
  if (reps.empty()) return;
  double sum = 0.0;
  summary.min_outage = reps.front().outage.value;
  summary.max_outage = reps.front().outage.value;
  for (const auto& r : reps) {
    sum += r.outage.value;
    summary.min_outage = std::min(summary.min_outage, r.outage.value);
    summary.max_outage = std::max(summary.max_outage, r.outage.value);
  }
  const double n = static_cast<double>(reps.size());
  summary.mean_outage = sum / n;
  double ss = 0.0;
  for (const auto& r : reps) {
    const double d = r.outage.value - summary.mean_outage;
    ss += d * d;
  }
  summary.stddev_outage = reps.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

ReplicateSummary replicate_train_eval(const TrainConfig& cfg,
                                      const Batch& data,
                                      const EvalConfig& eval) {
  cfg.validate();
  ReplicateSummary summary;
  std::vector<LstmClassifier> models;
  models.reserve(cfg.replicate_count);
  for (std::size_t r = 0; r < cfg.replicate_count; ++r) {
    TrainConfig rep = cfg;
    rep.seed = cfg.seed + r;
    TrainResult trained = train(rep, data);
    summary.params.push_back(trained.params);
    models.emplace_back(std::move(trained.params));
  }
  std::vector<const Classifier*> list;
  for (const auto& m : models) list.push_back(&m);
  const ScoredEpisodes scored = score_episodes(eval.sim, list, eval.n_episodes,
                                               eval.mode, eval.seed, eval.workers);
  for (std::size_t r = 0; r < models.size(); ++r) {
    summary.replicates.push_back(
        evaluate_scores(scored, r, eval.q_th, eval.sim.gamma_th));
  }
  summarize(summary);
  return summary;
}

}  // namespace outage
