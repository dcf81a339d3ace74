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

#include "outage/predictor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "binary_io.hpp"
#include "outage/errors.hpp"

namespace outage {

namespace {

constexpr char kParamsMagic[] = "OUTAGEQP";
constexpr std::size_t kPredictChunk = 256;

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return (1.0 + (-x.array()).exp()).inverse().matrix();
}

void check_features(const PredictorParams& params,
                    std::span<const Eigen::MatrixXd> features) {
  if (features.empty()) throw std::invalid_argument("forward: empty batch");
  const auto f = static_cast<Eigen::Index>(params.arch().input_dim);
  const Eigen::Index steps = features.front().cols();
  if (steps < 1) throw std::invalid_argument("forward: empty sequence");
  for (const auto& x : features) {
    if (x.rows() != f || x.cols() != steps) {
      throw std::invalid_argument("forward: feature shape mismatch");
    }
    if (!x.allFinite()) throw std::invalid_argument("forward: non-finite input");
  }
}

// Stacks column t of every sequence into an F x B matrix.
Eigen::MatrixXd gather_step(std::span<const Eigen::MatrixXd> features,
                            Eigen::Index t) {
  Eigen::MatrixXd x(features.front().rows(),
                    static_cast<Eigen::Index>(features.size()));
  for (std::size_t b = 0; b < features.size(); ++b) {
    x.col(static_cast<Eigen::Index>(b)) = features[b].col(t);
  }
  return x;
}

struct StepState {
  Eigen::MatrixXd gates;
  Eigen::MatrixXd cell;
  Eigen::MatrixXd hidden;
};

void lstm_step(const PredictorParams& p, const Eigen::MatrixXd& x,
               const Eigen::MatrixXd& h_prev, const Eigen::MatrixXd& c_prev,
               StepState& out) {
  const Eigen::Index h = p.arch().hidden;
  Eigen::MatrixXd a = p.input_weights() * x;
  a.noalias() += p.recurrent_weights() * h_prev;
  a.colwise() += p.lstm_bias();
  out.gates.resize(a.rows(), a.cols());
  out.gates.topRows(2 * h) = sigmoid(a.topRows(2 * h));
  out.gates.middleRows(2 * h, h) = a.middleRows(2 * h, h).array().tanh().matrix();
  out.gates.bottomRows(h) = sigmoid(a.bottomRows(h));
  const auto i = out.gates.topRows(h).array();
  const auto f = out.gates.middleRows(h, h).array();
  const auto g = out.gates.middleRows(2 * h, h).array();
  const auto o = out.gates.bottomRows(h).array();
  out.cell = (f * c_prev.array() + i * g).matrix();
  out.hidden = (o * out.cell.array().tanh()).matrix();
}

}  // namespace

Architecture Architecture::for_mode(FeatureMode mode, std::uint32_t hidden,
                                    std::uint32_t dense) {
  Architecture a;
  a.feature_mode = mode;
  a.input_dim = mode == FeatureMode::kMagnitude ? 1 : 2;
  a.hidden = hidden;
  a.dense = dense;
  return a;
}

std::size_t Architecture::parameter_count() const {
  const std::size_t f = input_dim, h = hidden, d = dense;
  return 4 * h * f + 4 * h * h + 4 * h + d * h + d + d + 1;
}

PredictorParams::Offsets PredictorParams::offsets_for(const Architecture& a) {
  const std::size_t f = a.input_dim, h = a.hidden, d = a.dense;
  Offsets o{};
  o.wx = 0;
  o.wh = o.wx + 4 * h * f;
  o.b = o.wh + 4 * h * h;
  o.d1 = o.b + 4 * h;
  o.c1 = o.d1 + d * h;
  o.d2 = o.c1 + d;
  o.c2 = o.d2 + d;
  o.end = o.c2 + 1;
  return o;
}

PredictorParams::PredictorParams(const Architecture& arch)
    : arch_(arch), off_(offsets_for(arch)) {
  const std::uint32_t expected_f =
      arch.feature_mode == FeatureMode::kMagnitude ? 1 : 2;
  if (arch.input_dim != expected_f || arch.hidden == 0 || arch.dense == 0) {
    throw std::invalid_argument("PredictorParams: inconsistent architecture");
  }
  values_.assign(off_.end, 0.0);
}

#define OUTAGE_PARAM_ACCESSORS(name, kind, offset, rows, cols)            \
  PredictorParams::kind PredictorParams::name() {                          \
    return {values_.data() + off_.offset, rows, cols};                     \
  }                                                                        \
  PredictorParams::Const##kind PredictorParams::name() const {             \
    return {values_.data() + off_.offset, rows, cols};                     \
  }

#define OUTAGE_VEC_ACCESSORS(name, offset, rows)                           \
  PredictorParams::VecMap PredictorParams::name() {                        \
    return {values_.data() + off_.offset, rows};                           \
  }                                                                        \
  PredictorParams::ConstVecMap PredictorParams::name() const {             \
    return {values_.data() + off_.offset, rows};                           \
  }

OUTAGE_PARAM_ACCESSORS(input_weights, Map, wx, 4 * arch_.hidden, arch_.input_dim)
OUTAGE_PARAM_ACCESSORS(recurrent_weights, Map, wh, 4 * arch_.hidden, arch_.hidden)
OUTAGE_VEC_ACCESSORS(lstm_bias, b, 4 * arch_.hidden)
OUTAGE_PARAM_ACCESSORS(dense1_weights, Map, d1, arch_.dense, arch_.hidden)
OUTAGE_VEC_ACCESSORS(dense1_bias, c1, arch_.dense)
OUTAGE_PARAM_ACCESSORS(dense2_weights, Map, d2, 1, arch_.dense)
OUTAGE_VEC_ACCESSORS(dense2_bias, c2, 1)

#undef OUTAGE_PARAM_ACCESSORS
#undef OUTAGE_VEC_ACCESSORS

bool PredictorParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::uint64_t PredictorParams::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values_) {
    h ^= std::bit_cast<std::uint64_t>(v);
    h *= 0x100000001b3ULL;
    h = mix64(h);
  }
  return h;
}

PredictorParams& PredictorParams::operator+=(const PredictorParams& other) {
  if (!(arch_ == other.arch_)) {
    throw std::invalid_argument("PredictorParams: architecture mismatch");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

PredictorParams& PredictorParams::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

PredictorParams init_params(const Architecture& arch, Rng& rng) {
  PredictorParams p(arch);
  auto glorot = [&rng](auto&& m) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    // Column-major fill so the draw order matches the file layout.
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = u(rng);
    }
  };
  glorot(p.input_weights());
  glorot(p.recurrent_weights());
  glorot(p.dense1_weights());
  glorot(p.dense2_weights());
  p.lstm_bias().segment(arch.hidden, arch.hidden).setOnes();
  return p;
}

Eigen::MatrixXd featurize(std::span<const cplx> window, FeatureMode mode) {
  if (window.empty()) throw std::invalid_argument("featurize: empty window");
  const auto k = static_cast<Eigen::Index>(window.size());
  if (mode == FeatureMode::kMagnitude) {
    Eigen::MatrixXd x(1, k);
    for (Eigen::Index t = 0; t < k; ++t) x(0, t) = std::abs(window[t]);
    return x;
  }
  Eigen::MatrixXd x(2, k);
  for (Eigen::Index t = 0; t < k; ++t) {
    x(0, t) = window[t].real();
    x(1, t) = window[t].imag();
  }
  return x;
}

ForwardCache forward_batch(const PredictorParams& params,
                           std::span<const Eigen::MatrixXd> features) {
  check_features(params, features);
  const Eigen::Index h = params.arch().hidden;
  const auto batch = static_cast<Eigen::Index>(features.size());
  const Eigen::Index steps = features.front().cols();

  ForwardCache cache;
  cache.batch = features.size();
  cache.steps = static_cast<std::size_t>(steps);
  cache.params_fingerprint = params.fingerprint();
  cache.inputs.reserve(cache.steps);
  cache.gates.reserve(cache.steps);
  cache.cells.reserve(cache.steps + 1);
  cache.hiddens.reserve(cache.steps + 1);
  cache.cells.push_back(Eigen::MatrixXd::Zero(h, batch));
  cache.hiddens.push_back(Eigen::MatrixXd::Zero(h, batch));

  StepState s;
  for (Eigen::Index t = 0; t < steps; ++t) {
    cache.inputs.push_back(gather_step(features, t));
    lstm_step(params, cache.inputs.back(), cache.hiddens.back(),
              cache.cells.back(), s);
    cache.gates.push_back(std::move(s.gates));
    cache.cells.push_back(std::move(s.cell));
    cache.hiddens.push_back(std::move(s.hidden));
  }
  cache.dense1_pre = params.dense1_weights() * cache.hiddens.back();
  cache.dense1_pre.colwise() += params.dense1_bias();
  cache.dense1_out = cache.dense1_pre.cwiseMax(0.0);
  Eigen::MatrixXd z2 = params.dense2_weights() * cache.dense1_out;
  z2.array() += params.dense2_bias()(0);
  cache.q = sigmoid(z2);
  return cache;
}

std::vector<double> predict_batch(const PredictorParams& params,
                                  std::span<const Eigen::MatrixXd> features) {
  check_features(params, features);
  const Eigen::Index h = params.arch().hidden;
  const auto batch = static_cast<Eigen::Index>(features.size());
  const Eigen::Index steps = features.front().cols();
  Eigen::MatrixXd hidden = Eigen::MatrixXd::Zero(h, batch);
  Eigen::MatrixXd cell = Eigen::MatrixXd::Zero(h, batch);
  StepState s;
  for (Eigen::Index t = 0; t < steps; ++t) {
    lstm_step(params, gather_step(features, t), hidden, cell, s);
    hidden.swap(s.hidden);
    cell.swap(s.cell);
  }
  Eigen::MatrixXd z1 = params.dense1_weights() * hidden;
  z1.colwise() += params.dense1_bias();
  Eigen::MatrixXd z2 = params.dense2_weights() * z1.cwiseMax(0.0);
  z2.array() += params.dense2_bias()(0);
  const Eigen::MatrixXd q = sigmoid(z2);
  return {q.data(), q.data() + q.size()};
}

std::pair<double, ForwardCache> forward(const PredictorParams& params,
                                        std::span<const cplx> window) {
  const Eigen::MatrixXd x = featurize(window, params.arch().feature_mode);
  ForwardCache cache = forward_batch(params, std::span(&x, 1));
  const double q = cache.q(0);
  return {q, std::move(cache)};
}

ParamGradients backward_batch(const PredictorParams& params,
                              const ForwardCache& cache,
                              std::span<const double> dl_dq) {
  if (cache.params_fingerprint != params.fingerprint() ||
      cache.gates.size() != cache.steps || cache.steps == 0) {
    throw std::invalid_argument("backward: cache does not match params");
  }
  if (dl_dq.size() != cache.batch) {
    throw std::invalid_argument("backward: dl_dq length != batch size");
  }
  const Eigen::Index h = params.arch().hidden;
  const auto batch = static_cast<Eigen::Index>(cache.batch);
  ParamGradients grads(params.arch());

  // Output sigmoid and dense layers.
  Eigen::RowVectorXd dz2(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    dz2(b) = dl_dq[static_cast<std::size_t>(b)] * cache.q(b) * (1.0 - cache.q(b));
  }
  grads.dense2_weights().noalias() = dz2 * cache.dense1_out.transpose();
  grads.dense2_bias()(0) = dz2.sum();
  Eigen::MatrixXd dz1 = params.dense2_weights().transpose() * dz2;
  dz1.array() *= (cache.dense1_pre.array() > 0.0).cast<double>();
  grads.dense1_weights().noalias() = dz1 * cache.hiddens.back().transpose();
  grads.dense1_bias() = dz1.rowwise().sum();

  // Backpropagation through time.
  Eigen::MatrixXd dh = params.dense1_weights().transpose() * dz1;
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(h, batch);
  Eigen::MatrixXd da(4 * h, batch);
  auto dwx = grads.input_weights();
  auto dwh = grads.recurrent_weights();
  for (std::size_t step = cache.steps; step-- > 0;) {
    const Eigen::MatrixXd& gates = cache.gates[step];
    const auto i = gates.topRows(h).array();
    const auto f = gates.middleRows(h, h).array();
    const auto g = gates.middleRows(2 * h, h).array();
    const auto o = gates.bottomRows(h).array();
    const Eigen::ArrayXXd tc = cache.cells[step + 1].array().tanh();

    dc.array() += dh.array() * o * (1.0 - tc.square());
    da.topRows(h) = (dc.array() * g * i * (1.0 - i)).matrix();
    da.middleRows(h, h) =
        (dc.array() * cache.cells[step].array() * f * (1.0 - f)).matrix();
    da.middleRows(2 * h, h) = (dc.array() * i * (1.0 - g.square())).matrix();
    da.bottomRows(h) = (dh.array() * tc * o * (1.0 - o)).matrix();

    dwx.noalias() += da * cache.inputs[step].transpose();
    dwh.noalias() += da * cache.hiddens[step].transpose();
    grads.lstm_bias() += da.rowwise().sum();

    dh.noalias() = params.recurrent_weights().transpose() * da;
    dc.array() *= f;
  }
  return grads;
}

ParamGradients backward(const PredictorParams& params,
                        const ForwardCache& cache, double dl_dq) {
  if (cache.batch != 1) {
    throw std::invalid_argument("backward: cache holds a batch; use backward_batch");
  }
  return backward_batch(params, cache, std::span(&dl_dq, 1));
}

void save_params(const PredictorParams& params,
                 const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.magic(std::string_view(kParamsMagic, 8));
  w.u32(kParamsVersion);
  w.u32(params.arch().input_dim);
  w.u32(params.arch().hidden);
  w.u32(params.arch().dense);
  w.u32(1);  // output width
  for (double v : params.values()) w.f64(v);
  w.save(path);
}

PredictorParams load_params(const std::filesystem::path& path) {
  auto r = detail::ByteReader::load(path);
  r.expect_magic(std::string_view(kParamsMagic, 8));
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kParamsVersion) {
    throw VersionError(version, kParamsVersion, version_at);
  }
  const std::uint64_t arch_at = r.offset();
  const std::uint32_t f = r.u32("input dim");
  const std::uint32_t hidden = r.u32("hidden size");
  const std::uint32_t dense = r.u32("dense size");
  const std::uint32_t out = r.u32("output size");
  if ((f != 1 && f != 2) || hidden == 0 || dense == 0 || out != 1 ||
      hidden > 4096 || dense > 4096) {
    throw FormatError("invalid architecture header", arch_at);
  }
  PredictorParams p(Architecture::for_mode(
      f == 1 ? FeatureMode::kMagnitude : FeatureMode::kReIm, hidden, dense));
  for (double& v : p.values()) v = r.f64("tensor data");
  r.expect_end();
  return p;
}

void Classifier::predict_batch(std::span<const std::span<const cplx>> windows,
                               std::span<double> out) const {
  for (std::size_t i = 0; i < windows.size(); ++i) out[i] = predict(windows[i]);
}

double LstmClassifier::predict(std::span<const cplx> window) const {
  const Eigen::MatrixXd x = featurize(window, params_.arch().feature_mode);
  return outage::predict_batch(params_, std::span(&x, 1)).front();
}

void LstmClassifier::predict_batch(
    std::span<const std::span<const cplx>> windows,
    std::span<double> out) const {
  std::vector<Eigen::MatrixXd> features;
  for (std::size_t start = 0; start < windows.size(); start += kPredictChunk) {
    const std::size_t end = std::min(windows.size(), start + kPredictChunk);
    features.clear();
    for (std::size_t i = start; i < end; ++i) {
      features.push_back(featurize(windows[i], params_.arch().feature_mode));
    }
    const std::vector<double> q = outage::predict_batch(params_, features);
    std::copy(q.begin(), q.end(), out.begin() + static_cast<std::ptrdiff_t>(start));
  }
}

}  // namespace outage
