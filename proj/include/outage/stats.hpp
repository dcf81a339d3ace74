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

#ifndef OUTAGE_STATS_HPP_
#define OUTAGE_STATS_HPP_

#include <cmath>
#include <functional>
#include <span>

namespace outage {

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;
  std::size_t n = 0;
};

// Kolmogorov survival function Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 lambda^2}.
double kolmogorov_survival(double lambda);

// One-sample two-sided KS test against a continuous CDF. The p-value uses the
// asymptotic distribution with Stephens' finite-n correction.
KsResult ks_test(std::span<const double> samples,
                 const std::function<double(double)>& cdf);

// Rayleigh CDF with scale sigma.
inline double rayleigh_cdf(double r, double sigma) {
  return r <= 0.0 ? 0.0 : -std::expm1(-r * r / (2.0 * sigma * sigma));
}

// Lag-`lag` sample autocorrelation of a series, pooled mean and variance.
double autocorrelation(std::span<const double> series, std::size_t lag);

}  // namespace outage

#endif  // OUTAGE_STATS_HPP_
