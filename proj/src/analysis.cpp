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

#include "outage/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "outage/errors.hpp"

namespace outage {

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void OutageInputs::validate() const {
  if (!in_unit(p1) || !in_unit(fq) || !in_unit(pinf)) {
    throw std::invalid_argument("OutageInputs: probabilities must lie in [0, 1]");
  }
  if (resource_count < 1) {
    throw std::invalid_argument("OutageInputs: resource_count must be >= 1");
  }
}

Proportion make_proportion(std::size_t hits, std::size_t n) {
  Proportion p;
  p.n = n;
  if (n == 0) return p;
  p.value = static_cast<double>(hits) / static_cast<double>(n);
  p.standard_error = std::sqrt(p.value * (1.0 - p.value) / static_cast<double>(n));
  return p;
}

double theorem1_outage(const OutageInputs& in) {
  in.validate();
  const double all_rejected =
      std::pow(1.0 - in.fq, static_cast<double>(in.resource_count - 1));
  return in.p1 * all_rejected + in.pinf * (1.0 - all_rejected);
}

OutageEstimate theorem1_plugin(const Proportion& p1, const Proportion& fq,
                               const Proportion& pinf,
                               std::size_t resource_count) {
  const OutageInputs in{p1.value, fq.value, pinf.value, resource_count};
  OutageEstimate est;
  est.method = EstimateMethod::kTheorem1Plugin;
  est.value = theorem1_outage(in);
  est.n_samples = p1.n;
  const double m = static_cast<double>(resource_count - 1);
  const double u = std::pow(1.0 - fq.value, m);
  const double du = resource_count > 1 ? -m * std::pow(1.0 - fq.value, m - 1.0) : 0.0;
  const double d_p1 = u;
  const double d_pinf = 1.0 - u;
  const double d_fq = (p1.value - pinf.value) * du;
  est.standard_error = std::sqrt(
      d_p1 * d_p1 * p1.standard_error * p1.standard_error +
      d_fq * d_fq * fq.standard_error * fq.standard_error +
      d_pinf * d_pinf * pinf.standard_error * pinf.standard_error);
  return est;
}

Proportion empirical_p1(std::span<const std::uint8_t> labels) {
  if (labels.empty()) throw std::invalid_argument("empirical_p1: no labels");
  std::size_t hits = 0;
  for (std::uint8_t b : labels) hits += b ? 1 : 0;
  return make_proportion(hits, labels.size());
}

Proportion empirical_fq(std::span<const double> q, double q_th) {
  if (q.empty()) throw std::invalid_argument("empirical_fq: no outputs");
  std::size_t accepted = 0;
  for (double qi : q) accepted += qi <= q_th ? 1 : 0;
  return make_proportion(accepted, q.size());
}

Proportion empirical_pinf(std::span<const double> q,
                          std::span<const std::uint8_t> labels, double q_th) {
  if (q.size() != labels.size()) {
    throw std::invalid_argument("empirical_pinf: length mismatch");
  }
  std::size_t accepted = 0;
  std::size_t accepted_outages = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= q_th) {
      ++accepted;
      if (labels[i]) ++accepted_outages;
    }
  }
  if (accepted == 0) {
    throw DegenerateEstimateError("empirical_pinf: acceptance set is empty");
  }
  return make_proportion(accepted_outages, accepted);
}

double geometric_series_check(double p, double fq, std::size_t n_terms) {
  double sum = 0.0;
  double reject_run = 1.0;  // (1-fq)^(i-1)
  for (std::size_t i = 1; i <= n_terms; ++i) {
    sum += p * reject_run * fq;
    reject_run *= 1.0 - fq;
  }
  return sum;
}

std::string_view to_string(EstimateMethod m) {
  return m == EstimateMethod::kMonteCarlo ? "monte_carlo" : "theorem1_plugin";
}

}  // namespace outage
