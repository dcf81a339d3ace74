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

// Recurrent binary outage classifier.
//
// A single LSTM layer reads the featurized channel window; its final hidden
// state goes through dense(hidden -> dense, ReLU) and dense(dense -> 1,
// sigmoid). The output q in (0, 1) is compared against a threshold q_th by
// the allocator: q > q_th predicts an outage.
//
// Gate layout inside the stacked LSTM tensors is [input, forget, cell, output],
// each block `hidden` rows tall. All tensors are column-major.

#ifndef OUTAGE_PREDICTOR_HPP_
#define OUTAGE_PREDICTOR_HPP_

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "outage/random.hpp"

namespace outage {

using cplx = std::complex<double>;

enum class FeatureMode : std::uint8_t { kMagnitude = 0, kReIm = 1 };

struct Architecture {
  FeatureMode feature_mode = FeatureMode::kMagnitude;
  std::uint32_t input_dim = 1;
  std::uint32_t hidden = 32;
  std::uint32_t dense = 16;

  static Architecture for_mode(FeatureMode mode, std::uint32_t hidden = 32,
                               std::uint32_t dense = 16);
  std::size_t parameter_count() const;
  bool operator==(const Architecture&) const = default;
};

// All trainable tensors packed into one flat buffer, in file order:
//   lstm input weights   (4H x F)
//   lstm recurrent weights (4H x H)
//   lstm bias            (4H)
//   dense1 weights       (D x H)
//   dense1 bias          (D)
//   dense2 weights       (1 x D)
//   dense2 bias          (1)
// Gradients use the same type.
class PredictorParams {
 public:
  using Map = Eigen::Map<Eigen::MatrixXd>;
  using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  PredictorParams() : PredictorParams(Architecture{}) {}
  explicit PredictorParams(const Architecture& arch);  // all zeros

  const Architecture& arch() const { return arch_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  Map input_weights();
  Map recurrent_weights();
  VecMap lstm_bias();
  Map dense1_weights();
  VecMap dense1_bias();
  Map dense2_weights();
  VecMap dense2_bias();
  ConstMap input_weights() const;
  ConstMap recurrent_weights() const;
  ConstVecMap lstm_bias() const;
  ConstMap dense1_weights() const;
  ConstVecMap dense1_bias() const;
  ConstMap dense2_weights() const;
  ConstVecMap dense2_bias() const;

  bool all_finite() const;
  std::uint64_t fingerprint() const;

  PredictorParams& operator+=(const PredictorParams& other);
  PredictorParams& operator*=(double s);
  bool operator==(const PredictorParams&) const = default;

 private:
  struct Offsets {
    std::size_t wx, wh, b, d1, c1, d2, c2, end;
    bool operator==(const Offsets&) const = default;
  };
  static Offsets offsets_for(const Architecture& arch);

  Architecture arch_;
  Offsets off_{};
  std::vector<double> values_;
};

using ParamGradients = PredictorParams;

// Glorot-uniform weights, zero biases, forget-gate bias 1.
PredictorParams init_params(const Architecture& arch, Rng& rng);

// F x k matrix; column t is the feature vector of sample t.
Eigen::MatrixXd featurize(std::span<const cplx> window, FeatureMode mode);

// Activations of a forward pass over a batch of B equal-length sequences.
struct ForwardCache {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::uint64_t params_fingerprint = 0;
  std::vector<Eigen::MatrixXd> inputs;  // steps x (F x B)
  std::vector<Eigen::MatrixXd> gates;   // steps x (4H x B), post-activation
  std::vector<Eigen::MatrixXd> cells;   // steps+1 x (H x B); cells[0] = 0
  std::vector<Eigen::MatrixXd> hiddens; // steps+1 x (H x B); hiddens[0] = 0
  Eigen::MatrixXd dense1_pre;           // D x B
  Eigen::MatrixXd dense1_out;           // D x B
  Eigen::RowVectorXd q;                 // 1 x B
};

// Single window. q is strictly inside (0, 1) unless the sigmoid saturates in
// double precision.
std::pair<double, ForwardCache> forward(const PredictorParams& params,
                                        std::span<const cplx> window);

// Batch of featurized sequences (each F x k with the same k).
ForwardCache forward_batch(const PredictorParams& params,
                           std::span<const Eigen::MatrixXd> features);

// Outputs only; keeps no per-step cache.
std::vector<double> predict_batch(const PredictorParams& params,
                                  std::span<const Eigen::MatrixXd> features);

// Reverse-mode gradient of sum_b dl_dq[b] * q_b with respect to every
// parameter. Throws std::invalid_argument if the cache was not produced by
// forward() with these params.
ParamGradients backward(const PredictorParams& params,
                        const ForwardCache& cache, double dl_dq);
ParamGradients backward_batch(const PredictorParams& params,
                              const ForwardCache& cache,
                              std::span<const double> dl_dq);

inline constexpr std::uint32_t kParamsVersion = 1;

void save_params(const PredictorParams& params,
                 const std::filesystem::path& path);
PredictorParams load_params(const std::filesystem::path& path);

// Anything that maps a k-sample channel window to a score in [0, 1].
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual double predict(std::span<const cplx> window) const = 0;
  virtual void predict_batch(std::span<const std::span<const cplx>> windows,
                             std::span<double> out) const;
};

class LstmClassifier : public Classifier {
 public:
  explicit LstmClassifier(PredictorParams params)
      : params_(std::move(params)) {}
  const PredictorParams& params() const { return params_; }
  double predict(std::span<const cplx> window) const override;
  void predict_batch(std::span<const std::span<const cplx>> windows,
                     std::span<double> out) const override;

 private:
  PredictorParams params_;
};

class FunctionClassifier : public Classifier {
 public:
  using Fn = std::function<double(std::span<const cplx>)>;
  explicit FunctionClassifier(Fn fn) : fn_(std::move(fn)) {}
  double predict(std::span<const cplx> window) const override {
    return fn_(window);
  }

 private:
  Fn fn_;
};

}  // namespace outage

#endif  // OUTAGE_PREDICTOR_HPP_
