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

#include "outage/stats.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace outage {

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;  // series is 1 to double precision
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples,
                 const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - f, f - di / n});
  }
  const double sqrt_n = std::sqrt(n);
  KsResult res;
  res.statistic = d;
  res.n = sorted.size();
  res.p_value = kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
  return res;
}

double autocorrelation(std::span<const double> series, std::size_t lag) {
  if (series.size() <= lag + 1) {
    throw std::invalid_argument("autocorrelation: series too short");
  }
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(series.size());
  double var = 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double d = series[i] - mean;
    var += d * d;
    if (i + lag < series.size()) cov += d * (series[i + lag] - mean);
  }
  return cov / var;
}

}  // namespace outage
