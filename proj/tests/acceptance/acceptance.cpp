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

// Acceptance suite. Runs every criterion (or one, with --criterion N) and
// prints one PASS/FAIL line per criterion. Exit status is nonzero if any
// selected criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "outage/allocator.hpp"
#include "outage/analysis.hpp"
#include "outage/channel_sim.hpp"
#include "outage/losses.hpp"
#include "outage/predictor.hpp"
#include "outage/trainer.hpp"

namespace {

using namespace outage;
namespace fs = std::filesystem;

// Tolerances and sample sizes.
constexpr std::size_t kClosedFormEpisodes = 100000;
constexpr double kClosedFormSigmas = 3.0;
constexpr std::size_t kEndpointEpisodes = 10000;
constexpr double kEndpointSigmas = 3.0;
constexpr double kSeriesTolerance = 1e-12;
constexpr std::size_t kGradientInstances = 10;
constexpr double kGradientStep = 1e-5;
constexpr double kGradientTolerance = 1e-4;
constexpr double kGradientFloor = 1e-6;
constexpr std::size_t kConfusionBatches = 100;
constexpr double kPartitionTolerance = 1e-9;
constexpr std::size_t kKsEpisodes = 10000;
// Asymptotic Kolmogorov quantile: P[K > 1.62762] = 0.01.
constexpr double kKsCritical99 = 1.62762;
constexpr double kTapTolerance = 1e-9;
constexpr std::size_t kBenefitWindows = 12000;
constexpr std::size_t kBenefitEpisodes = 20000;
constexpr std::size_t kBenefitReplicates = 10;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Closed form fed with Monte Carlo estimates vs Monte Carlo outage.
Outcome closed_form_equivalence() {
  struct Setting {
    const char* name;
    std::function<double(std::span<const cplx>)> stub;
    std::size_t resources;
    double q_th;
    double gamma;
  };
  const std::vector<Setting> settings{
      {"last-sample threshold",
       [](std::span<const cplx> w) { return std::abs(w.back()) < 0.7 ? 0.9 : 0.1; },
       2, 0.5, 0.575},
      {"power score",
       [](std::span<const cplx> w) { return 1.0 / (1.0 + std::norm(w.back())); },
       6, 0.45, 0.8},
      {"window mean",
       [](std::span<const cplx> w) {
         double m = 0.0;
         for (const cplx& h : w) m += std::abs(h);
         return std::exp(-m / static_cast<double>(w.size()));
       },
       10, 0.4, 0.8},
  };
  Outcome out{true, ""};
  std::uint64_t seed = 1001;
  for (const Setting& s : settings) {
    SimConfig sim;
    sim.n_taps = 64;
    sim.k = 10;
    sim.l = 10;
    sim.resource_count = s.resources;
    sim.gamma_th = s.gamma;
    const FunctionClassifier clf(s.stub);
    const MonteCarloResult mc = monte_carlo(sim, clf, s.q_th, kClosedFormEpisodes,
                                            IndependenceMode::kIndependentEpisodes,
                                            seed++);
    const double rejected_all =
        std::pow(1.0 - mc.fq.value, static_cast<double>(s.resources - 1));
    const double closed = mc.p1.value * rejected_all + mc.pinf.value * (1.0 - rejected_all);
    const double se = mc.combined_standard_error();
    const double z = std::abs(mc.outage.value - closed) / se;
    const bool ok = mc.pinf_defined && z < kClosedFormSigmas;
    out.passed = out.passed && ok;
    out.detail += fmt::format("[{} R={}: mc={:.5f} closed={:.5f} z={:.2f}] ", s.name,
                              s.resources, mc.outage.value, closed, z);
  }
  return out;
}

// 2. q_th = 0 and q_th = 1 reduce to the single-resource outage.
Outcome endpoint_limits() {
  SimConfig sim;  // full-size channel, |R| = 6
  Rng rng = make_rng(2002);
  const LstmClassifier clf(init_params(Architecture{}, rng));
  const Classifier* list[] = {&clf};
  const ScoredEpisodes scored = score_episodes(sim, list, kEndpointEpisodes,
                                               IndependenceMode::kSharedFft, 2003);
  Outcome out{true, ""};
  for (double q_th : {0.0, 1.0}) {
    const MonteCarloResult r = evaluate_scores(scored, 0, q_th, sim.gamma_th);
    const double se = std::hypot(r.outage.standard_error, r.p1.standard_error);
    const double z = std::abs(r.outage.value - r.p1.value) / se;
    out.passed = out.passed && z < kEndpointSigmas;
    out.detail += fmt::format("[q_th={}: mc={:.5f} p1={:.5f} z={:.2f}] ", q_th,
                              r.outage.value, r.p1.value, z);
  }
  return out;
}

// 3. Truncated geometric series.
Outcome geometric_series() {
  const double err = std::abs(geometric_series_check(0.2, 0.5, 60) - 0.2);
  return {err < kSeriesTolerance, fmt::format("|sum - p| = {:.3e}", err)};
}

// 4. Custom loss through the LSTM: analytic vs central differences.
Outcome lstm_gradient() {
  Rng rng = make_rng(4004);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  double worst = 0.0;
  for (std::size_t inst = 0; inst < kGradientInstances; ++inst) {
    PredictorParams p = init_params(Architecture{}, rng);
    std::vector<Eigen::MatrixXd> feats;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 6; ++i) {
      std::vector<cplx> w(16);
      for (cplx& x : w) x = {g(rng), g(rng)};
      feats.push_back(featurize(w, FeatureMode::kMagnitude));
      labels.push_back(static_cast<std::uint8_t>(i % 3 == 0));
    }
    auto loss_at = [&]() {
      return custom_loss(predict_batch(p, feats), labels, 0.5, 10.0, 6).value;
    };
    const ForwardCache cache = forward_batch(p, feats);
    const std::vector<double> q(cache.q.data(), cache.q.data() + cache.q.size());
    const ParamGradients grad =
        backward_batch(p, cache, custom_loss(q, labels, 0.5, 10.0, 6).grad);
    auto v = p.values();
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double saved = v[j];
      v[j] = saved + kGradientStep;
      const double up = loss_at();
      v[j] = saved - kGradientStep;
      const double down = loss_at();
      v[j] = saved;
      const double fd = (up - down) / (2.0 * kGradientStep);
      const double a = grad.values()[j];
      worst = std::max(worst, std::abs(a - fd) /
                                  std::max({std::abs(a), std::abs(fd), kGradientFloor}));
    }
  }
  return {worst < kGradientTolerance, fmt::format("max relative error {:.3e}", worst)};
}

// 5. Confusion tallies vs brute-force counting.
Outcome confusion_oracle() {
  Rng rng = make_rng(5005);
  std::uniform_int_distribution<int> grid(0, 20);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool exact = true;
  double worst_partition = 0.0;
  for (std::size_t trial = 0; trial < kConfusionBatches; ++trial) {
    const std::size_t n = 10 + trial;
    std::vector<double> q(n);
    std::vector<std::uint8_t> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = grid(rng) / 20.0;  // grid values so ties with q_th occur
      b[i] = u(rng) < 0.3 ? 1 : 0;
    }
    const double q_th = grid(rng) / 20.0;
    double tn = 0, fn = 0, tp = 0, fp = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (q[i] <= q_th) {
        (b[i] ? fn : tn) += 1;
      } else {
        (b[i] ? tp : fp) += 1;
      }
    }
    const ConfusionTally h = confusion(q, b, q_th, Weighting::heaviside());
    exact = exact && h.tn == tn && h.fn == fn && h.tp == tp && h.fp == fp;
    const ConfusionTally s = confusion(q, b, q_th, Weighting::logistic(10.0));
    worst_partition = std::max(worst_partition,
                               std::abs(s.tn + s.fn + s.tp + s.fp - static_cast<double>(n)));
  }
  return {exact && worst_partition < kPartitionTolerance,
          fmt::format("heaviside exact={} max partition error {:.3e}", exact,
                      worst_partition)};
}

// 6. Rayleigh marginal and magnitude-preserving drift.
Outcome channel_statistics() {
  SimConfig sim;
  sim.k = 1;
  sim.l = 1;
  sim.seed = 6006;
  std::vector<double> r(kKsEpisodes);
  for (std::size_t e = 0; e < kKsEpisodes; ++e) {
    r[e] = std::abs(simulate_episode(sim, e).at(3, 0));
  }
  std::sort(r.begin(), r.end());
  double d = 0.0;
  const double n = static_cast<double>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double cdf = 1.0 - std::exp(-r[i] * r[i]);  // Rayleigh, sigma^2 = 1/2
    d = std::max({d, cdf - static_cast<double>(i) / n,
                  static_cast<double>(i + 1) / n - cdf});
  }
  const double lambda = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));

  Rng rng = make_rng(6007);
  const TapVector start = init_impulse_response(1024, rng);
  TapVector v = start;
  for (int s = 0; s < 1000; ++s) v = advance(v, 0.1, rng);
  double drift = 0.0;
  for (std::size_t i = 0; i < v.taps.size(); ++i) {
    drift = std::max(drift, std::abs(std::abs(v.taps[i]) - std::abs(start.taps[i])));
  }
  return {lambda < kKsCritical99 && drift < kTapTolerance,
          fmt::format("KS D={:.5f} lambda={:.4f} (critical {}), tap drift {:.3e}", d,
                      lambda, kKsCritical99, drift)};
}

// 7. Custom-loss predictors vs BCE predictors at |R|=6, q_th=0.1,
// gamma=0.575, l=10.
Outcome training_benefit() {
  SimConfig sim;
  sim.resource_count = 6;
  sim.l = 10;
  sim.gamma_th = 0.575;
  sim.seed = derive_seed(7007, 1);
  const Batch data = build_dataset(sim, kBenefitWindows);

  EvalConfig eval;
  eval.sim = sim;
  eval.q_th = 0.1;
  eval.n_episodes = kBenefitEpisodes;
  eval.mode = IndependenceMode::kSharedFft;
  eval.seed = derive_seed(7007, 2);

  double mean[2] = {0.0, 0.0};
  std::string detail;
  const LossKind kinds[] = {LossKind::kCustom, LossKind::kBce};
  for (int i = 0; i < 2; ++i) {
    TrainConfig cfg;
    cfg.loss_kind = kinds[i];
    cfg.resource_count = 6;
    cfg.replicate_count = kBenefitReplicates;
    cfg.seed = derive_seed(7007, 3);
    const ReplicateSummary s = replicate_train_eval(cfg, data, eval);
    mean[i] = s.mean_outage;
    detail += fmt::format("{}: mean={:.5f} min={:.5f} max={:.5f} sd={:.5f}; ",
                          to_string(kinds[i]), s.mean_outage, s.min_outage,
                          s.max_outage, s.stddev_outage);
  }
  return {mean[0] <= mean[1], detail};
}

// 8. Two full pipeline runs produce identical files.
std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
#ifdef OUTAGE_CLI_PATH
  const fs::path root = fs::temp_directory_path() / "outage_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = root / "config.json";
  std::ofstream(config) << R"({
    "seed": 8008,
    "sim": {"n_taps": 64, "k": 20, "l": 10, "resource_count": 4},
    "dataset": {"n_windows": 800},
    "train": {"loss_kind": "all", "epochs": 2, "batch_size": 64, "replicate_count": 2,
              "hidden": 8, "dense": 4},
    "eval": {"n_episodes": 1000, "resource_count": 4, "q_th": 0.2},
    "grid": {"q_th": [0.0, 0.2, 0.5, 1.0], "gamma_th": [0.5, 0.6]}
  })";
  for (const char* run : {"a", "b"}) {
    const fs::path out = root / run;
    for (const char* step : {"generate", "train", "sweep --axis q_th", "sweep --axis gamma"}) {
      const std::string cmd = fmt::format("{} {} --config {} --out {} >/dev/null",
                                          OUTAGE_CLI_PATH, step, config.string(),
                                          out.string());
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        return {false, "command failed: " + cmd};
      }
    }
  }
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    if (slurp(entry.path()) != slurp(root / "b" / rel)) {
      return {false, "differs: " + rel.string()};
    }
    ++files;
  }
  std::size_t files_b = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "b")) {
    files_b += entry.is_regular_file() ? 1 : 0;
  }
  return {files > 0 && files == files_b,
          fmt::format("{} files byte-identical", files)};
#else
  return {false, "command line tool not built"};
#endif
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion criteria[] = {
      {"closed-form equivalence", closed_form_equivalence},
      {"endpoint limits", endpoint_limits},
      {"geometric series", geometric_series},
      {"lstm gradient", lstm_gradient},
      {"confusion oracle", confusion_oracle},
      {"channel statistics", channel_statistics},
      {"training benefit", training_benefit},
      {"determinism", determinism},
  };
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--criterion") only = std::atoi(argv[i + 1]);
  }
  if (only < 0 || only > 8) {
    std::cerr << "--criterion must be in 1..8\n";
    return 2;
  }
  int failures = 0;
  for (int i = 0; i < 8; ++i) {
    if (only != 0 && only != i + 1) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << fmt::format("{} {}. {} ({:.1f}s): {}\n", o.passed ? "PASS" : "FAIL",
                             i + 1, criteria[i].name, seconds_since(t0), o.detail);
    std::cout.flush();
    failures += o.passed ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
