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

// Time-varying multipath channel synthesis.
//
// A vector of i.i.d. complex Gaussian impulse-response taps drifts in phase
// by an independent Unif(-delta, delta) rotation per tap per time step. Each
// step the taps are transformed to the frequency domain and |R| equally
// spaced bins are taken as the resources' channel samples. Magnitudes are
// Rayleigh at every (resource, time) and slowly decorrelate over time.

#ifndef OUTAGE_CHANNEL_SIM_HPP_
#define OUTAGE_CHANNEL_SIM_HPP_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "outage/random.hpp"

namespace outage {

using cplx = std::complex<double>;

struct TapVector {
  std::vector<cplx> taps;
  std::uint64_t time_index = 0;
};

enum class CapacityMode : std::uint8_t { kSum = 0, kMean = 1 };

// How the resources of one episode are produced.
//  kSharedFft: all resources are bins of one FFT snapshot (weakly correlated).
//  kIndependentEpisodes: every resource has its own tap vector, so resources
//  are exactly i.i.d.
enum class IndependenceMode { kSharedFft, kIndependentEpisodes };

struct SimConfig {
  std::size_t n_taps = 1024;
  std::size_t k = 100;
  std::size_t l = 10;
  std::size_t resource_count = 6;
  double phase_half_width = 0.1;  // radians
  double gamma_th = 0.575;        // bits/s/Hz
  CapacityMode capacity_mode = CapacityMode::kMean;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// |R| x (k+l) complex samples. Row i is resource i's series.
class ChannelEpisode {
 public:
  ChannelEpisode() = default;
  ChannelEpisode(std::size_t resource_count, std::size_t k, std::size_t l);

  std::size_t resource_count() const { return resource_count_; }
  std::size_t k() const { return k_; }
  std::size_t l() const { return l_; }
  std::size_t length() const { return k_ + l_; }

  cplx& at(std::size_t resource, std::size_t t) {
    return samples_[resource * length() + t];
  }
  const cplx& at(std::size_t resource, std::size_t t) const {
    return samples_[resource * length() + t];
  }
  std::span<const cplx> row(std::size_t resource) const {
    return {samples_.data() + resource * length(), length()};
  }
  // First k samples of a row.
  std::span<const cplx> input(std::size_t resource) const {
    return row(resource).first(k_);
  }
  // The l samples immediately after the input window.
  std::span<const cplx> future(std::size_t resource) const {
    return row(resource).subspan(k_, l_);
  }

  bool operator==(const ChannelEpisode&) const = default;

 private:
  std::size_t resource_count_ = 0;
  std::size_t k_ = 0;
  std::size_t l_ = 0;
  std::vector<cplx> samples_;
};

struct LabeledWindow {
  std::vector<cplx> input;
  std::vector<cplx> future;
  std::uint8_t label = 0;
  std::uint32_t resource_id = 0;
  std::uint64_t origin_time = 0;
};

using Batch = std::vector<LabeledWindow>;

constexpr bool is_power_of_two(std::size_t n) {
  return n != 0 && (n & (n - 1)) == 0;
}

// Taps are circularly-symmetric CN(0, 1): real and imaginary parts each have
// variance 1/2.
TapVector init_impulse_response(std::size_t n_taps, Rng& rng);

// Multiplies every tap by exp(j*zeta), zeta ~ Unif(-delta, delta).
TapVector advance(const TapVector& v, double delta, Rng& rng);
void advance_in_place(TapVector& v, double delta, Rng& rng);

// Unnormalized forward DFT, X[m] = sum_n v[n] exp(-j 2 pi n m / N).
// The length must be a power of two (radix-2 FFT).
std::vector<cplx> dft(std::span<const cplx> v);

// A single bin of dft(v), computed directly in O(N).
cplx dft_bin(std::span<const cplx> v, std::size_t bin);

// Bins floor(i N / |R|) for i = 0..|R|-1, i.e. 0, N/|R|, 2N/|R|, ... when |R|
// divides N. Throws ConfigError unless 1 <= |R| <= N.
std::vector<cplx> extract_resources(std::span<const cplx> freq,
                                    std::size_t resource_count);

// Runs init then k+l-1 advances; the frequency samples of every step are
// divided by sqrt(n_taps) so each resource sample has unit mean power.
ChannelEpisode simulate_episode(
    const SimConfig& cfg, Rng& rng,
    IndependenceMode mode = IndependenceMode::kSharedFft);

// Episode `index` of the stream seeded by cfg.seed.
ChannelEpisode simulate_episode(
    const SimConfig& cfg, std::uint64_t index,
    IndependenceMode mode = IndependenceMode::kSharedFft);

// Sum over the window of log2(1 + |h|^2); kMean divides by the window length.
double capacity(std::span<const cplx> window, CapacityMode mode);

// 1 (outage) iff capacity(future) < gamma_th.
std::uint8_t label(std::span<const cplx> future, double gamma_th,
                   CapacityMode mode);

// One window per resource per episode, episode-major, until n_windows records
// exist. Episodes come from substreams of cfg.seed, so the result does not
// depend on `workers`.
Batch build_dataset(const SimConfig& cfg, std::size_t n_windows,
                    unsigned workers = 1);

// Binary dataset file ("OUTAGEDS", little-endian).
struct DatasetHeader {
  std::uint64_t n = 0;
  std::uint32_t k = 0;
  std::uint32_t l = 0;
  CapacityMode capacity_mode = CapacityMode::kMean;
  double gamma_th = 0.0;
};

struct Dataset {
  DatasetHeader header;
  Batch records;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(const std::filesystem::path& path, const SimConfig& cfg,
                   const Batch& batch);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace outage

#endif  // OUTAGE_CHANNEL_SIM_HPP_
