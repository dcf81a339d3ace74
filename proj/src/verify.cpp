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

#include "outage/verify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "outage/allocator.hpp"
#include "outage/losses.hpp"
#include "outage/stats.hpp"

namespace outage {

namespace {

double last_magnitude(std::span<const cplx> w) { return std::abs(w.back()); }

Batch random_windows(std::size_t count, std::size_t k, Rng& rng) {
  SimConfig sim;
  sim.n_taps = 64;
  sim.k = k;
  sim.l = 4;
  sim.resource_count = 1;
  Batch out;
  for (std::size_t i = 0; i < count; ++i) {
    const ChannelEpisode ep = simulate_episode(sim, rng);
    LabeledWindow w;
    w.input.assign(ep.input(0).begin(), ep.input(0).end());
    w.future.assign(ep.future(0).begin(), ep.future(0).end());
    w.label = label(w.future, sim.gamma_th, sim.capacity_mode);
    out.push_back(std::move(w));
  }
  return out;
}

// Custom loss of an LSTM over a fixed batch.
double lstm_loss(const PredictorParams& params,
                 std::span<const Eigen::MatrixXd> features,
                 std::span<const std::uint8_t> labels) {
  const std::vector<double> q = predict_batch(params, features);
  return custom_loss(q, labels, 0.5, 10.0, 5).value;
}

CheckResult pass_if_below(std::string name, double measured, double threshold,
                          std::string detail = {}) {
  return {std::move(name), measured < threshold, measured, threshold,
          std::move(detail)};
}

}  // namespace

std::vector<StubSetting> default_stub_settings() {
  std::vector<StubSetting> out;
  out.push_back({"threshold_magnitude",
                 [](std::span<const cplx> w) {
                   return last_magnitude(w) < 0.6 ? 0.9 : 0.1;
                 },
                 2, 0.5, 0.575});
  out.push_back({"exp_power",
                 [](std::span<const cplx> w) {
                   const double m = last_magnitude(w);
                   return std::exp(-m * m);
                 },
                 6, 0.4, 0.8});
  out.push_back({"recent_mean",
                 [](std::span<const cplx> w) {
                   const std::size_t n = std::min<std::size_t>(4, w.size());
                   double m = 0.0;
                   for (std::size_t i = w.size() - n; i < w.size(); ++i) {
                     m += std::abs(w[i]);
                   }
                   return 1.0 / (1.0 + m / static_cast<double>(n));
                 },
                 10, 0.45, 0.4});
  return out;
}

SimConfig stub_check_sim(std::size_t resource_count, double gamma_th) {
  SimConfig sim;
  sim.n_taps = 64;
  sim.k = 10;
  sim.l = 10;
  sim.resource_count = resource_count;
  sim.gamma_th = gamma_th;
  return sim;
}

CheckResult check_theorem1(const StubSetting& setting, std::size_t n_episodes,
                           double sigmas, const VerifyOptions& opts) {
  const SimConfig sim = stub_check_sim(setting.resource_count, setting.gamma_th);
  const FunctionClassifier stub(setting.predictor);
  const MonteCarloResult mc =
      monte_carlo(sim, stub, setting.q_th, n_episodes,
                  IndependenceMode::kIndependentEpisodes,
                  derive_seed(opts.seed, setting.resource_count), opts.workers);
  CheckResult res;
  res.name = fmt::format("theorem1[{}, R={}, q_th={}, gamma={}]", setting.name,
                         setting.resource_count, setting.q_th,
                         setting.gamma_th);
  res.threshold = sigmas;
  if (!mc.pinf_defined) {
    res.detail = "no first-resource window was accepted";
    return res;
  }
  const double closed = opts.outage_formula(
      {mc.p1.value, mc.fq.value, mc.pinf.value, setting.resource_count});
  const double se = mc.combined_standard_error();
  const double gap = std::abs(mc.outage.value - closed);
  res.measured = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : INFINITY);
  res.passed = res.measured < sigmas;
  res.detail = fmt::format("mc={:.6f} closed_form={:.6f} se={:.2e} n={}",
                           mc.outage.value, closed, se, n_episodes);
  return res;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

double custom_loss_gradient_error(std::size_t batches, std::uint64_t seed) {
  constexpr std::size_t kBatch = 32;
  constexpr double kStep = 1e-6;
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.02, 0.98);
  std::bernoulli_distribution coin(0.3);
  double worst = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    std::vector<double> q(kBatch);
    std::vector<std::uint8_t> y(kBatch);
    for (std::size_t i = 0; i < kBatch; ++i) {
      q[i] = unif(rng);
      y[i] = coin(rng) ? 1 : 0;
    }
    const LossValue base = custom_loss(q, y, 0.5, 10.0, 5);
    for (std::size_t i = 0; i < kBatch; ++i) {
      std::vector<double> up = q, down = q;
      up[i] += kStep;
      down[i] -= kStep;
      const double fd = (custom_loss(up, y, 0.5, 10.0, 5).value -
                         custom_loss(down, y, 0.5, 10.0, 5).value) /
                        (2.0 * kStep);
      worst = std::max(worst, relative_error(base.grad[i], fd));
    }
  }
  return worst;
}

double lstm_gradient_error(std::size_t instances, std::uint64_t seed) {
  constexpr std::size_t kBatch = 4;
  constexpr std::size_t kSteps = 20;
  constexpr double kStep = 1e-5;
  Rng rng = make_rng(seed);
  double worst = 0.0;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const Architecture arch = Architecture::for_mode(FeatureMode::kMagnitude);
    PredictorParams params = init_params(arch, rng);
    const Batch windows = random_windows(kBatch, kSteps, rng);
    std::vector<Eigen::MatrixXd> features;
    std::vector<std::uint8_t> labels;
    for (std::size_t i = 0; i < kBatch; ++i) {
      features.push_back(featurize(windows[i].input, arch.feature_mode));
      // Mixed labels keep every ratio of the loss away from its guard.
      labels.push_back(i % 2 == 0 ? 1 : 0);
    }
    const ForwardCache cache = forward_batch(params, features);
    std::vector<double> q(cache.q.data(), cache.q.data() + kBatch);
    const LossValue loss = custom_loss(q, labels, 0.5, 10.0, 5);
    const ParamGradients grad = backward_batch(params, cache, loss.grad);

    auto values = params.values();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + kStep;
      const double up = lstm_loss(params, features, labels);
      values[j] = saved - kStep;
      const double down = lstm_loss(params, features, labels);
      values[j] = saved;
      const double fd = (up - down) / (2.0 * kStep);
      worst = std::max(worst, relative_error(grad.values()[j], fd));
    }
  }
  return worst;
}

std::vector<CheckResult> run_verify(const VerifyOptions& opts,
                                    std::ostream& log) {
  const std::size_t n_mc = opts.quick ? 20000 : 100000;
  const double sigmas = opts.quick ? 4.0 : 3.0;
  const std::size_t lstm_instances = opts.quick ? 3 : 10;
  const std::size_t ks_episodes = 10000;

  std::vector<CheckResult> results;
  auto report = [&](CheckResult r) {
    log << (r.passed ? "PASS " : "FAIL ") << r.name
        << fmt::format(" measured={:.3e} threshold={:.3e}", r.measured,
                       r.threshold);
    if (!r.detail.empty()) log << " (" << r.detail << ")";
    log << '\n';
    log.flush();
    results.push_back(std::move(r));
  };

  for (const StubSetting& s : default_stub_settings()) {
    report(check_theorem1(s, n_mc, sigmas, opts));
  }

  const double series = geometric_series_check(0.2, 0.5, 60);
  report(pass_if_below("geometric_series", std::abs(series - 0.2), 1e-12));

  report(pass_if_below("custom_loss_gradient",
                       custom_loss_gradient_error(20, derive_seed(opts.seed, 11)),
                       1e-6));
  report(pass_if_below(
      "lstm_gradient",
      lstm_gradient_error(lstm_instances, derive_seed(opts.seed, 12)), 1e-4));

  {
    SimConfig sim;
    sim.k = 1;
    sim.l = 1;
    sim.resource_count = 6;
    sim.seed = derive_seed(opts.seed, 13);
    std::vector<double> mags(ks_episodes);
    for (std::size_t e = 0; e < ks_episodes; ++e) {
      mags[e] = std::abs(simulate_episode(sim, e).at(2, 0));
    }
    const KsResult ks = ks_test(mags, [](double r) {
      return rayleigh_cdf(r, std::sqrt(0.5));
    });
    CheckResult r{"rayleigh_ks", ks.p_value > 0.01, ks.p_value, 0.01,
                  fmt::format("D={:.4f} n={}", ks.statistic, ks.n)};
    report(std::move(r));
  }

  {
    Rng rng = make_rng(derive_seed(opts.seed, 14));
    const TapVector start = init_impulse_response(1024, rng);
    TapVector v = start;
    for (int i = 0; i < 1000; ++i) advance_in_place(v, 0.1, rng);
    double worst = 0.0;
    for (std::size_t i = 0; i < v.taps.size(); ++i) {
      worst = std::max(worst,
                       std::abs(std::abs(v.taps[i]) - std::abs(start.taps[i])));
    }
    report(pass_if_below("tap_magnitude_invariance", worst, 1e-9));
  }
  return results;
}

}  // namespace outage
