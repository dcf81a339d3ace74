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

// Confusion functionals and training losses over predictor outputs.
//
// For outputs q_i, labels b_i and a weighting f, the four functionals are
//   TN = sum f(q_th - q_i)(1 - b_i)    FN = sum f(q_th - q_i) b_i
//   TP = sum f(q_i - q_th) b_i         FP = sum f(q_i - q_th)(1 - b_i)
// With the Heaviside weighting they count classifications (q <= q_th means
// "accept, no outage predicted"); with the logistic weighting they are
// differentiable in q. The outage-probability loss combines the ratios
//   P1 = (TP+FN)/n, FQ = (TN+FN)/n, Pinf = FN/(TN+FN)
// as P1 (1-FQ)^(|R|-1) + Pinf (1 - (1-FQ)^(|R|-1)), which is the greedy
// allocator's outage probability with |R| i.i.d. resources.

#ifndef OUTAGE_LOSSES_HPP_
#define OUTAGE_LOSSES_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace outage {

// Guard added to ratio denominators and BCE logs.
inline constexpr double kRatioEpsilon = 1e-12;

enum class WeightKind { kHeaviside, kLogistic };

struct Weighting {
  WeightKind kind = WeightKind::kHeaviside;
  double alpha = 10.0;  // logistic slope

  static Weighting heaviside() { return {WeightKind::kHeaviside, 0.0}; }
  static Weighting logistic(double alpha);
};

struct ConfusionTally {
  double tn = 0.0;
  double fn = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  std::size_t n = 0;
  Weighting weighting;
  double q_th = 0.5;

  double total() const { return tn + fn + tp + fp; }
};

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // d value / d q_i
};

// 1 if x >= 0 else 0.
inline double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }

// 1 / (1 + exp(-alpha x)), evaluated without overflow. alpha must be > 0.
double logistic(double alpha, double x);

ConfusionTally confusion(std::span<const double> q,
                         std::span<const std::uint8_t> b, double q_th,
                         const Weighting& f);

double p1_hat(const ConfusionTally& t);
double fq_hat(const ConfusionTally& t);
// Throws DegenerateEstimateError for a Heaviside tally with TN+FN = 0.
double pinf_hat(const ConfusionTally& t);

// Outage-probability loss with logistic tallies and its exact gradient.
LossValue custom_loss(std::span<const double> q,
                      std::span<const std::uint8_t> b, double q_th,
                      double alpha, std::size_t resource_count);

LossValue bce(std::span<const double> q, std::span<const std::uint8_t> b);
LossValue mse(std::span<const double> q, std::span<const std::uint8_t> b);
LossValue mae(std::span<const double> q, std::span<const std::uint8_t> b);

}  // namespace outage

#endif  // OUTAGE_LOSSES_HPP_
