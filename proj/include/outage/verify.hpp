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

// Self-checks run by `outage verify`.

#ifndef OUTAGE_VERIFY_HPP_
#define OUTAGE_VERIFY_HPP_

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "outage/analysis.hpp"
#include "outage/channel_sim.hpp"
#include "outage/predictor.hpp"

namespace outage {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyOptions {
  // Reduced sample sizes with widened tolerances.
  bool quick = false;
  std::uint64_t seed = 20240601;
  unsigned workers = 1;
  // Closed form checked against Monte Carlo; replaceable for mutation tests.
  std::function<double(const OutageInputs&)> outage_formula = theorem1_outage;
};

// A deterministic stub predictor used by the closed-form consistency checks.
struct StubSetting {
  std::string name;
  FunctionClassifier::Fn predictor;
  std::size_t resource_count;
  double q_th;
  double gamma_th;
};

// Three stubs paired with (|R|, q_th, gamma_th) settings for |R| in {2, 6, 10}.
std::vector<StubSetting> default_stub_settings();

// Small i.i.d.-resource channel used for the closed-form checks.
SimConfig stub_check_sim(std::size_t resource_count, double gamma_th);

// Monte Carlo outage vs the closed form fed with Monte Carlo estimates of
// (p1, fq, pinf); passes when the gap is below `sigmas` combined standard
// errors.
CheckResult check_theorem1(const StubSetting& setting, std::size_t n_episodes,
                           double sigmas, const VerifyOptions& opts);

// Worst relative error of the custom loss gradient w.r.t. predictor outputs
// against central differences.
double custom_loss_gradient_error(std::size_t batches, std::uint64_t seed);

// Worst relative error of the custom loss gradient w.r.t. every LSTM
// parameter against central differences (step 1e-5).
double lstm_gradient_error(std::size_t instances, std::uint64_t seed);

// Relative error used by the gradient checks: |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-6);

std::vector<CheckResult> run_verify(const VerifyOptions& opts, std::ostream& log);

}  // namespace outage

#endif  // OUTAGE_VERIFY_HPP_
