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

// Closed-form outage probability of the greedy allocator and the finite-sample
// estimators that feed it.

#ifndef OUTAGE_ANALYSIS_HPP_
#define OUTAGE_ANALYSIS_HPP_

#include <cstdint>
#include <span>
#include <string_view>

namespace outage {

struct OutageInputs {
  double p1 = 0.0;    // single-resource outage probability
  double fq = 0.0;    // acceptance probability P[Q <= q_th]
  double pinf = 0.0;  // P[outage | accepted]
  std::size_t resource_count = 1;

  void validate() const;
};

enum class EstimateMethod { kMonteCarlo, kTheorem1Plugin };

struct OutageEstimate {
  double value = 0.0;
  std::size_t n_samples = 0;
  double standard_error = 0.0;
  EstimateMethod method = EstimateMethod::kMonteCarlo;
};

// A binomial proportion with its standard error sqrt(p(1-p)/n).
struct Proportion {
  double value = 0.0;
  std::size_t n = 0;
  double standard_error = 0.0;
};

Proportion make_proportion(std::size_t hits, std::size_t n);

// p1 (1-fq)^(|R|-1) + pinf (1 - (1-fq)^(|R|-1)).
double theorem1_outage(const OutageInputs& in);

// Plug-in estimate with a delta-method standard error from the three
// estimators' binomial errors (treated as independent).
OutageEstimate theorem1_plugin(const Proportion& p1, const Proportion& fq,
                               const Proportion& pinf,
                               std::size_t resource_count);

Proportion empirical_p1(std::span<const std::uint8_t> labels);
Proportion empirical_fq(std::span<const double> q, double q_th);
// |T|/|V| with V = {q_i <= q_th}, T = {i in V : b_i = 1}. Throws
// DegenerateEstimateError when V is empty.
Proportion empirical_pinf(std::span<const double> q,
                          std::span<const std::uint8_t> labels, double q_th);

// sum_{i=1..n_terms} p (1-fq)^(i-1) fq, which tends to p.
double geometric_series_check(double p, double fq, std::size_t n_terms);

std::string_view to_string(EstimateMethod m);

}  // namespace outage

#endif  // OUTAGE_ANALYSIS_HPP_
