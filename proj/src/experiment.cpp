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

#include "outage/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "outage/errors.hpp"

namespace outage {

namespace {

using nlohmann::json;

// Substream tags under the master seed.
constexpr std::uint64_t kDatasetStream = 1;
constexpr std::uint64_t kEvalStream = 2;
constexpr std::uint64_t kTrainStream = 3;

// Reads the members of one JSON object, rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& dst) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      dst = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type (" + it->type_name() + ")");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string field(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(field(it.key().c_str()) + ": unknown key");
      }
    }
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename E>
E parse_enum(const std::string& field, const std::string& text,
             std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, value] : options) {
    if (text == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : options) {
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(field + ": \"" + text + "\" is not one of {" + allowed + "}");
}

std::string format_value(double v) { return fmt::format("{:.6g}", v); }

Batch relabel(const Batch& data, double gamma_th, CapacityMode mode) {
  Batch out = data;
  for (auto& w : out) w.label = label(w.future, gamma_th, mode);
  return out;
}

double label_rate(const Batch& batch) {
  double hits = 0.0;
  for (const auto& w : batch) hits += w.label;
  return batch.empty() ? 0.0 : hits / static_cast<double>(batch.size());
}

TrainConfig train_config_for(const ExperimentConfig& cfg, LossKind kind) {
  TrainConfig t = cfg.train;
  t.loss_kind = kind;
  t.seed = derive_seed(cfg.seed, kTrainStream);
  return t;
}

SimConfig dataset_sim(const ExperimentConfig& cfg) {
  SimConfig s = cfg.sim;
  s.seed = derive_seed(cfg.seed, kDatasetStream);
  return s;
}

// Trains (or loads from `dir`) every loss kind x replicate predictor.
std::vector<std::vector<LstmClassifier>> train_or_load(
    const ExperimentConfig& cfg, const Batch& data,
    const std::filesystem::path& dir, std::ostream& log) {
  std::filesystem::create_directories(dir / "params");
  std::filesystem::create_directories(dir / "history");
  std::vector<std::vector<LstmClassifier>> models;
  for (LossKind kind : cfg.loss_kinds) {
    std::vector<LstmClassifier> reps;
    const TrainConfig base = train_config_for(cfg, kind);
    for (std::size_t r = 0; r < base.replicate_count; ++r) {
      const auto path = params_path(dir, kind, r);
      if (std::filesystem::exists(path)) {
        reps.emplace_back(load_params(path));
        continue;
      }
      TrainConfig t = base;
      t.seed = base.seed + r;
      TrainResult res = train(t, data);
      save_params(res.params, path);
      write_history_csv(res.history, dir / "history" /
                                         fmt::format("{}_r{}.csv", to_string(kind), r));
      log << fmt::format("  trained {} replicate {} ({} steps, final loss {:.6g}, {:.1f}s)\n",
                         to_string(kind), r, res.history.steps.size(),
                         res.history.steps.back().loss, res.history.wall_clock_seconds);
      reps.emplace_back(std::move(res.params));
    }
    models.push_back(std::move(reps));
  }
  return models;
}

std::vector<const Classifier*> flatten(
    const std::vector<std::vector<LstmClassifier>>& models) {
  std::vector<const Classifier*> out;
  for (const auto& reps : models) {
    for (const auto& m : reps) out.push_back(&m);
  }
  return out;
}

// Rows for every loss kind at one grid point.
void append_rows(const ExperimentConfig& cfg, const ScoredEpisodes& scored,
                 const std::vector<std::vector<LstmClassifier>>& models,
                 double axis_value, double q_th, double gamma_th,
                 std::vector<SweepRow>& rows) {
  std::size_t offset = 0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    ReplicateSummary summary;
    double plugin = 0.0;
    double p1 = 0.0;
    for (std::size_t r = 0; r < models[k].size(); ++r) {
      summary.replicates.push_back(evaluate_scores(scored, offset + r, q_th, gamma_th));
      plugin += summary.replicates.back().plugin.value;
      p1 = summary.replicates.back().p1.value;
    }
    offset += models[k].size();
    summarize(summary);
    SweepRow row;
    row.axis_value = axis_value;
    row.loss_kind = cfg.loss_kinds[k];
    row.mean_outage = summary.mean_outage;
    row.n_episodes = scored.n_episodes;
    row.stderr_outage = std::sqrt(summary.mean_outage * (1.0 - summary.mean_outage) /
                                  static_cast<double>(scored.n_episodes));
    row.min_outage = summary.min_outage;
    row.max_outage = summary.max_outage;
    row.replicates = models[k].size();
    row.p1 = p1;
    row.theorem1_plugin = plugin / static_cast<double>(models[k].size());
    rows.push_back(row);
  }
}

}  // namespace

std::optional<SweepAxis> parse_sweep_axis(std::string_view name) {
  if (name == "q_th") return SweepAxis::kQth;
  if (name == "gamma") return SweepAxis::kGamma;
  if (name == "l") return SweepAxis::kL;
  return std::nullopt;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kQth: return "q_th";
    case SweepAxis::kGamma: return "gamma";
    case SweepAxis::kL: return "l";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  try {
    sim.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("sim.") + e.what());
  }
  if (eval_resource_count < 1 || eval_resource_count > sim.n_taps) {
    throw ConfigError("eval.resource_count: " + std::to_string(eval_resource_count) +
                      " must lie in [1, sim.n_taps=" + std::to_string(sim.n_taps) + "]");
  }
  train.validate();
  if (n_windows < 1) throw ConfigError("dataset.n_windows: must be >= 1");
  if (n_episodes < 1) throw ConfigError("eval.n_episodes: must be >= 1");
  if (!(eval_q_th >= 0.0 && eval_q_th <= 1.0)) {
    throw ConfigError("eval.q_th: must lie in [0, 1]");
  }
  if (loss_kinds.empty()) throw ConfigError("train.loss_kind: no loss kinds selected");
  if (q_th_grid.empty()) throw ConfigError("grid.q_th: must be nonempty");
  if (gamma_grid.empty()) throw ConfigError("grid.gamma_th: must be nonempty");
  if (l_grid.empty()) throw ConfigError("grid.l: must be nonempty");
  for (double q : q_th_grid) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("grid.q_th: values must lie in [0, 1]");
  }
  for (double g : gamma_grid) {
    if (!(g > 0.0)) throw ConfigError("grid.gamma_th: values must be > 0");
  }
  for (std::size_t l : l_grid) {
    if (l < 1) throw ConfigError("grid.l: values must be >= 1");
  }
}

SimConfig ExperimentConfig::eval_sim() const {
  SimConfig s = sim;
  s.resource_count = eval_resource_count;
  return s;
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
      if (json_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(fmt::format("config syntax error at line {}, column {}: {}",
                                  line, col, e.what()));
  }

  ExperimentConfig cfg;
  bool train_resources_set = false;
  ObjectReader root(doc, "");
  root.get("seed", cfg.seed);

  if (const json* sim = root.child("sim")) {
    ObjectReader r(*sim, "sim");
    r.get("n_taps", cfg.sim.n_taps);
    r.get("k", cfg.sim.k);
    r.get("l", cfg.sim.l);
    r.get("resource_count", cfg.sim.resource_count);
    r.get("phase_half_width", cfg.sim.phase_half_width);
    r.get("gamma_th", cfg.sim.gamma_th);
    std::string mode = cfg.sim.capacity_mode == CapacityMode::kMean ? "mean" : "sum";
    r.get("capacity_mode", mode);
    cfg.sim.capacity_mode = parse_enum<CapacityMode>(
        r.field("capacity_mode"), mode,
        {{"mean", CapacityMode::kMean}, {"sum", CapacityMode::kSum}});
    r.finish();
  }
  if (const json* ds = root.child("dataset")) {
    ObjectReader r(*ds, "dataset");
    r.get("n_windows", cfg.n_windows);
    r.finish();
  }
  if (const json* tr = root.child("train")) {
    ObjectReader r(*tr, "train");
    if (const json* kinds = r.child("loss_kind")) {
      std::vector<std::string> names;
      if (kinds->is_string()) {
        names.push_back(kinds->get<std::string>());
      } else if (kinds->is_array() &&
                 std::all_of(kinds->begin(), kinds->end(),
                             [](const json& j) { return j.is_string(); })) {
        names = kinds->get<std::vector<std::string>>();
      } else {
        throw ConfigError("train.loss_kind: expected a string or array of strings");
      }
      cfg.loss_kinds.clear();
      for (const auto& name : names) {
        if (name == "all") {
          cfg.loss_kinds.assign(std::begin(kAllLossKinds), std::end(kAllLossKinds));
          continue;
        }
        const auto kind = parse_loss_kind(name);
        if (!kind) {
          throw ConfigError("train.loss_kind: \"" + name +
                            "\" is not one of {custom, bce, mse, mae, all}");
        }
        cfg.loss_kinds.push_back(*kind);
      }
    }
    r.get("q_th_train", cfg.train.q_th_train);
    r.get("alpha", cfg.train.alpha);
    if (tr->contains("resource_count")) train_resources_set = true;
    r.get("resource_count", cfg.train.resource_count);
    r.get("batch_size", cfg.train.batch_size);
    r.get("epochs", cfg.train.epochs);
    r.get("learning_rate", cfg.train.learning_rate);
    r.get("beta1", cfg.train.beta1);
    r.get("beta2", cfg.train.beta2);
    r.get("adam_epsilon", cfg.train.adam_epsilon);
    r.get("validation_fraction", cfg.train.validation_fraction);
    r.get("replicate_count", cfg.train.replicate_count);
    r.get("hidden", cfg.train.hidden);
    r.get("dense", cfg.train.dense);
    std::string feature = cfg.train.feature_mode == FeatureMode::kMagnitude ? "magnitude" : "re_im";
    r.get("feature_mode", feature);
    cfg.train.feature_mode = parse_enum<FeatureMode>(
        r.field("feature_mode"), feature,
        {{"magnitude", FeatureMode::kMagnitude}, {"re_im", FeatureMode::kReIm}});
    r.finish();
  }
  if (const json* ev = root.child("eval")) {
    ObjectReader r(*ev, "eval");
    r.get("n_episodes", cfg.n_episodes);
    r.get("resource_count", cfg.eval_resource_count);
    r.get("q_th", cfg.eval_q_th);
    r.get("workers", cfg.workers);
    std::string mode = cfg.eval_mode == IndependenceMode::kSharedFft
                           ? "shared_fft" : "independent_episodes";
    r.get("independence_mode", mode);
    cfg.eval_mode = parse_enum<IndependenceMode>(
        r.field("independence_mode"), mode,
        {{"shared_fft", IndependenceMode::kSharedFft},
         {"independent_episodes", IndependenceMode::kIndependentEpisodes}});
    r.finish();
  }
  if (const json* grid = root.child("grid")) {
    ObjectReader r(*grid, "grid");
    r.get("q_th", cfg.q_th_grid);
    r.get("gamma_th", cfg.gamma_grid);
    r.get("l", cfg.l_grid);
    r.finish();
  }
  root.finish();
  if (!train_resources_set) cfg.train.resource_count = cfg.eval_resource_count;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::filesystem::path params_path(const std::filesystem::path& dir,
                                  LossKind kind, std::size_t replicate) {
  return dir / "params" / fmt::format("{}_r{}.bin", to_string(kind), replicate);
}

int cmd_generate(const ExperimentConfig& cfg, const std::filesystem::path& out,
                 std::ostream& log) {
  cfg.validate();
  std::filesystem::create_directories(out);
  const SimConfig sim = dataset_sim(cfg);
  const Batch batch = build_dataset(sim, cfg.n_windows, cfg.workers);
  const auto path = out / "dataset.bin";
  write_dataset(path, sim, batch);
  log << fmt::format("wrote {} records to {} (label rate {:.6f})\n", batch.size(),
                     path.string(), label_rate(batch));
  return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out,
              std::ostream& log) {
  cfg.validate();
  const auto path = out / "dataset.bin";
  if (!std::filesystem::exists(path)) {
    throw IoError("dataset " + path.string() + " not found; run `outage generate` first");
  }
  const Dataset ds = read_dataset(path);
  log << fmt::format("training on {} windows (label rate {:.6f})\n",
                     ds.records.size(), label_rate(ds.records));
  const auto models = train_or_load(cfg, ds.records, out, log);
  std::size_t n = 0;
  for (const auto& reps : models) n += reps.size();
  log << fmt::format("{} parameter files in {}\n", n, (out / "params").string());
  return kExitOk;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, SweepAxis axis,
                                const std::filesystem::path& out,
                                std::ostream& log) {
  cfg.validate();
  std::vector<SweepRow> rows;
  const std::uint64_t eval_seed = derive_seed(cfg.seed, kEvalStream);

  if (axis == SweepAxis::kQth) {
    std::vector<std::vector<LstmClassifier>> models;
    for (LossKind kind : cfg.loss_kinds) {
      std::vector<LstmClassifier> reps;
      for (std::size_t r = 0; r < cfg.train.replicate_count; ++r) {
        const auto path = params_path(out, kind, r);
        if (!std::filesystem::exists(path)) {
          throw IoError("trained parameters " + path.string() +
                        " not found; run `outage train` first");
        }
        reps.emplace_back(load_params(path));
      }
      models.push_back(std::move(reps));
    }
    const auto list = flatten(models);
    log << fmt::format("scoring {} episodes with {} predictors\n", cfg.n_episodes, list.size());
    const ScoredEpisodes scored = score_episodes(cfg.eval_sim(), list, cfg.n_episodes,
                                                 cfg.eval_mode, eval_seed, cfg.workers);
    for (double q_th : cfg.q_th_grid) {
      append_rows(cfg, scored, models, q_th, q_th, cfg.sim.gamma_th, rows);
    }
  } else if (axis == SweepAxis::kGamma) {
    const auto path = out / "dataset.bin";
    if (!std::filesystem::exists(path)) {
      throw IoError("dataset " + path.string() + " not found; run `outage generate` first");
    }
    const Dataset ds = read_dataset(path);
    for (double gamma : cfg.gamma_grid) {
      log << fmt::format("gamma_th = {}\n", format_value(gamma));
      const Batch data = relabel(ds.records, gamma, ds.header.capacity_mode);
      const auto dir = out / "sweep_gamma" / format_value(gamma);
      const auto models = train_or_load(cfg, data, dir, log);
      SimConfig sim = cfg.eval_sim();
      sim.gamma_th = gamma;
      const ScoredEpisodes scored = score_episodes(sim, flatten(models), cfg.n_episodes,
                                                   cfg.eval_mode, eval_seed, cfg.workers);
      append_rows(cfg, scored, models, gamma, cfg.eval_q_th, gamma, rows);
    }
  } else {
    for (std::size_t l : cfg.l_grid) {
      log << fmt::format("l = {}\n", l);
      ExperimentConfig point = cfg;
      point.sim.l = l;
      const Batch data = build_dataset(dataset_sim(point), point.n_windows, point.workers);
      const auto dir = out / "sweep_l" / std::to_string(l);
      const auto models = train_or_load(point, data, dir, log);
      const ScoredEpisodes scored = score_episodes(point.eval_sim(), flatten(models),
                                                   point.n_episodes, point.eval_mode,
                                                   eval_seed, point.workers);
      append_rows(point, scored, models, static_cast<double>(l), point.eval_q_th,
                  point.sim.gamma_th, rows);
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
    return static_cast<int>(a.loss_kind) < static_cast<int>(b.loss_kind);
  });
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const bool plugin = axis == SweepAxis::kQth;
  out << "axis_value,loss_kind,mean_outage,stderr,min,max,n_episodes,replicates,p1";
  out << (plugin ? ",theorem1_plugin\n" : "\n");
  for (const SweepRow& r : rows) {
    out << fmt::format("{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{:.17g}",
                       r.axis_value, to_string(r.loss_kind), r.mean_outage,
                       r.stderr_outage, r.min_outage, r.max_outage, r.n_episodes,
                       r.replicates, r.p1);
    if (plugin) out << fmt::format(",{:.17g}", r.theorem1_plugin);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

int cmd_sweep(const ExperimentConfig& cfg, SweepAxis axis,
              const std::filesystem::path& out, std::ostream& log) {
  const auto rows = run_sweep(cfg, axis, out, log);
  const auto path = out / fmt::format("sweep_{}.csv", to_string(axis));
  write_sweep_csv(rows, axis, path);
  log << fmt::format("wrote {} rows to {}\n", rows.size(), path.string());
  return kExitOk;
}

}  // namespace outage
