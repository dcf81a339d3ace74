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

#include "outage/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "outage/errors.hpp"

namespace outage {

namespace {

void check_batch(std::span<const double> q, std::span<const std::uint8_t> b) {
  if (q.size() != b.size()) {
    throw std::invalid_argument("loss: outputs and labels differ in length");
  }
  if (q.empty()) throw std::invalid_argument("loss: empty batch");
}

double guarded(double denom) { return std::max(denom, kRatioEpsilon); }

}  // namespace

Weighting Weighting::logistic(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("logistic: alpha must be > 0");
  return {WeightKind::kLogistic, alpha};
}

double logistic(double alpha, double x) {
  if (!(alpha > 0.0)) throw std::invalid_argument("logistic: alpha must be > 0");
  const double z = alpha * x;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ConfusionTally confusion(std::span<const double> q,
                         std::span<const std::uint8_t> b, double q_th,
                         const Weighting& f) {
  check_batch(q, b);
  ConfusionTally t;
  t.n = q.size();
  t.weighting = f;
  t.q_th = q_th;
  for (std::size_t i = 0; i < q.size(); ++i) {
    double accept;
    double reject;
    if (f.kind == WeightKind::kHeaviside) {
      // A tie q == q_th is an acceptance only, so each sample lands in
      // exactly one cell.
      accept = heaviside(q_th - q[i]);
      reject = 1.0 - accept;
    } else {
      accept = logistic(f.alpha, q_th - q[i]);
      reject = logistic(f.alpha, q[i] - q_th);
    }
    const double bi = b[i];
    t.tn += accept * (1.0 - bi);
    t.fn += accept * bi;
    t.tp += reject * bi;
    t.fp += reject * (1.0 - bi);
  }
  return t;
}

double p1_hat(const ConfusionTally& t) {
  if (t.n == 0) throw std::invalid_argument("p1_hat: empty batch");
  return (t.tp + t.fn) / guarded(t.total());
}

double fq_hat(const ConfusionTally& t) {
  if (t.n == 0) throw std::invalid_argument("fq_hat: empty batch");
  return (t.tn + t.fn) / guarded(t.total());
}

double pinf_hat(const ConfusionTally& t) {
  if (t.n == 0) throw std::invalid_argument("pinf_hat: empty batch");
  const double accepted = t.tn + t.fn;
  if (t.weighting.kind == WeightKind::kHeaviside && accepted == 0.0) {
    throw DegenerateEstimateError(
        "pinf_hat: no sample accepted (TN + FN = 0)");
  }
  return t.fn / guarded(accepted);
}

LossValue custom_loss(std::span<const double> q,
                      std::span<const std::uint8_t> b, double q_th,
                      double alpha, std::size_t resource_count) {
  check_batch(q, b);
  if (resource_count < 1) {
    throw std::invalid_argument("custom_loss: resource_count must be >= 1");
  }
  const std::size_t n = q.size();
  std::vector<double> accept(n);
  std::vector<double> reject(n);
  double tn = 0, fn = 0, tp = 0, fp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    accept[i] = logistic(alpha, q_th - q[i]);
    reject[i] = logistic(alpha, q[i] - q_th);
    const double bi = b[i];
    tn += accept[i] * (1.0 - bi);
    fn += accept[i] * bi;
    tp += reject[i] * bi;
    fp += reject[i] * (1.0 - bi);
  }
  const double total = guarded(tn + fn + tp + fp);
  const double accepted = guarded(tn + fn);
  const double p1 = (tp + fn) / total;
  const double fq = (tn + fn) / total;
  const double pinf = fn / accepted;
  const double m = static_cast<double>(resource_count - 1);
  const double u = std::pow(1.0 - fq, m);

  LossValue out;
  out.value = p1 * u + pinf * (1.0 - u);

  // Partials of the loss with respect to the four tallies.
  const double dl_dp1 = u;
  const double dl_dpinf = 1.0 - u;
  const double dl_du = p1 - pinf;
  const double du_dfq = resource_count > 1 ? -m * std::pow(1.0 - fq, m - 1.0) : 0.0;
  const double dl_dfq = dl_du * du_dfq;
  const double t2 = total * total;
  const double a2 = accepted * accepted;
  // p1 = (tp+fn)/S, fq = (tn+fn)/S, pinf = fn/(tn+fn), S = tn+fn+tp+fp.
  const double dp1_dtn = -(tp + fn) / t2;
  const double dp1_dfn = (total - (tp + fn)) / t2;
  const double dp1_dtp = dp1_dfn;
  const double dp1_dfp = dp1_dtn;
  const double dfq_dtn = (total - (tn + fn)) / t2;
  const double dfq_dfn = dfq_dtn;
  const double dfq_dtp = -(tn + fn) / t2;
  const double dfq_dfp = dfq_dtp;
  const double dpinf_dtn = -fn / a2;
  const double dpinf_dfn = tn / a2;

  const double dl_dtn = dl_dp1 * dp1_dtn + dl_dfq * dfq_dtn + dl_dpinf * dpinf_dtn;
  const double dl_dfn = dl_dp1 * dp1_dfn + dl_dfq * dfq_dfn + dl_dpinf * dpinf_dfn;
  const double dl_dtp = dl_dp1 * dp1_dtp + dl_dfq * dfq_dtp;
  const double dl_dfp = dl_dp1 * dp1_dfp + dl_dfq * dfq_dfp;

  out.grad.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double bi = b[i];
    const double daccept = -alpha * accept[i] * (1.0 - accept[i]);
    const double dreject = alpha * reject[i] * (1.0 - reject[i]);
    out.grad[i] = daccept * (dl_dtn * (1.0 - bi) + dl_dfn * bi) +
                  dreject * (dl_dtp * bi + dl_dfp * (1.0 - bi));
  }
  return out;
}

LossValue bce(std::span<const double> q, std::span<const std::uint8_t> b) {
  check_batch(q, b);
  const double n = static_cast<double>(q.size());
  LossValue out;
  out.grad.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = std::clamp(q[i], kRatioEpsilon, 1.0 - kRatioEpsilon);
    if (b[i]) {
      out.value -= std::log(qi);
      out.grad[i] = -1.0 / (qi * n);
    } else {
      out.value -= std::log(1.0 - qi);
      out.grad[i] = 1.0 / ((1.0 - qi) * n);
    }
  }
  out.value /= n;
  return out;
}

LossValue mse(std::span<const double> q, std::span<const std::uint8_t> b) {
  check_batch(q, b);
  const double n = static_cast<double>(q.size());
  LossValue out;
  out.grad.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double d = q[i] - b[i];
    out.value += d * d;
    out.grad[i] = 2.0 * d / n;
  }
  out.value /= n;
  return out;
}

LossValue mae(std::span<const double> q, std::span<const std::uint8_t> b) {
  check_batch(q, b);
  const double n = static_cast<double>(q.size());
  LossValue out;
  out.grad.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double d = q[i] - b[i];
    out.value += std::abs(d);
    out.grad[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
  }
  out.value /= n;
  return out;
}

}  // namespace outage
