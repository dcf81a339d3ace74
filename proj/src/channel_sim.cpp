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

#include "outage/channel_sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "binary_io.hpp"
#include "outage/errors.hpp"
#include "outage/parallel.hpp"

namespace outage {

namespace {

constexpr char kDatasetMagic[] = "OUTAGEDS";

// std::complex multiplication carries inf/nan recovery we never need.
inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

// exp(-j 2 pi (i * bin mod n) / n) for i = 0..n-1.
std::vector<cplx> bin_kernel(std::size_t n, std::size_t bin) {
  std::vector<cplx> kernel(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = -2.0 * std::numbers::pi *
                         static_cast<double>((i * bin) % n) /
                         static_cast<double>(n);
    kernel[i] = {std::cos(angle), std::sin(angle)};
  }
  return kernel;
}

cplx dot(std::span<const cplx> v, std::span<const cplx> kernel) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    re += v[i].real() * kernel[i].real() - v[i].imag() * kernel[i].imag();
    im += v[i].real() * kernel[i].imag() + v[i].imag() * kernel[i].real();
  }
  return {re, im};
}

// Iterative radix-2 decimation-in-time FFT with precomputed twiddles.
class Radix2Plan {
 public:
  explicit Radix2Plan(std::size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      bitrev_[i] = r;
    }
    for (std::size_t i = 0; i < n / 2; ++i) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(i) /
                           static_cast<double>(n);
      twiddle_[i] = {std::cos(angle), std::sin(angle)};
    }
  }

  void execute(std::span<const cplx> in, std::span<cplx> out) const {
    for (std::size_t i = 0; i < n_; ++i) out[bitrev_[i]] = in[i];
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          const cplx t = mul(twiddle_[j * stride], out[start + j + half]);
          const cplx u = out[start + j];
          out[start + j] = u + t;
          out[start + j + half] = u - t;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<cplx> twiddle_;
};

const Radix2Plan& plan_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, Radix2Plan> plans;
  auto it = plans.find(n);
  if (it == plans.end()) it = plans.emplace(n, Radix2Plan(n)).first;
  return it->second;
}

void check_resource_count(std::size_t n, std::size_t resource_count) {
  if (resource_count == 0 || resource_count > n) {
    throw ConfigError("resource_count: " + std::to_string(resource_count) +
                      " must lie in [1, n_taps=" + std::to_string(n) + "]");
  }
}

// floor(r * N / |R|): exact multiples of N/|R| when |R| divides N.
std::size_t resource_bin(std::size_t n, std::size_t resource_count,
                         std::size_t r) {
  return r * n / resource_count;
}

// Kernels of the |R| resource bins, cached per (N, |R|).
const std::vector<std::vector<cplx>>& resource_kernels(std::size_t n,
                                                       std::size_t count) {
  thread_local std::unordered_map<std::size_t, std::vector<std::vector<cplx>>>
      cache;
  auto& kernels = cache[n * (n + 1) + count];
  if (kernels.empty()) {
    for (std::size_t r = 0; r < count; ++r) {
      kernels.push_back(bin_kernel(n, resource_bin(n, count, r)));
    }
  }
  return kernels;
}

// Few resources: direct bin sums are cheaper than a full FFT.
bool use_direct_bins(std::size_t n, std::size_t count) {
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  return count <= log2n;
}

ChannelEpisode simulate_shared(const SimConfig& cfg, Rng& rng) {
  const std::size_t n = cfg.n_taps;
  const std::size_t count = cfg.resource_count;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ChannelEpisode episode(count, cfg.k, cfg.l);
  TapVector taps = init_impulse_response(n, rng);
  const bool direct = use_direct_bins(n, count);
  std::vector<cplx> freq(direct ? 0 : n);
  for (std::size_t t = 0; t < episode.length(); ++t) {
    if (t > 0) advance_in_place(taps, cfg.phase_half_width, rng);
    if (direct) {
      const auto& kernels = resource_kernels(n, count);
      for (std::size_t r = 0; r < count; ++r) {
        episode.at(r, t) = dot(taps.taps, kernels[r]) * scale;
      }
    } else {
      plan_for(n).execute(taps.taps, freq);
      for (std::size_t r = 0; r < count; ++r) {
        episode.at(r, t) = freq[resource_bin(n, count, r)] * scale;
      }
    }
  }
  return episode;
}

ChannelEpisode simulate_independent(const SimConfig& cfg, Rng& rng) {
  const std::size_t n = cfg.n_taps;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ChannelEpisode episode(cfg.resource_count, cfg.k, cfg.l);
  const auto& kernels = resource_kernels(n, cfg.resource_count);
  for (std::size_t r = 0; r < cfg.resource_count; ++r) {
    Rng sub(rng());
    TapVector taps = init_impulse_response(n, sub);
    for (std::size_t t = 0; t < episode.length(); ++t) {
      if (t > 0) advance_in_place(taps, cfg.phase_half_width, sub);
      episode.at(r, t) = dot(taps.taps, kernels[r]) * scale;
    }
  }
  return episode;
}

}  // namespace

void SimConfig::validate() const {
  if (!is_power_of_two(n_taps)) {
    throw ConfigError("n_taps: " + std::to_string(n_taps) +
                      " is not a power of two");
  }
  if (k < 1) throw ConfigError("k: must be >= 1");
  if (l < 1) throw ConfigError("l: must be >= 1");
  check_resource_count(n_taps, resource_count);
  if (!(phase_half_width > 0.0)) {
    throw ConfigError("phase_half_width: must be > 0");
  }
  if (!(gamma_th > 0.0)) throw ConfigError("gamma_th: must be > 0");
}

ChannelEpisode::ChannelEpisode(std::size_t resource_count, std::size_t k,
                               std::size_t l)
    : resource_count_(resource_count),
      k_(k),
      l_(l),
      samples_(resource_count * (k + l)) {}

TapVector init_impulse_response(std::size_t n_taps, Rng& rng) {
  if (!is_power_of_two(n_taps)) {
    throw ConfigError("n_taps: " + std::to_string(n_taps) +
                      " is not a power of two");
  }
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  TapVector v;
  v.taps.resize(n_taps);
  for (auto& tap : v.taps) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    tap = {re, im};
  }
  return v;
}

void advance_in_place(TapVector& v, double delta, Rng& rng) {
  for (auto& tap : v.taps) {
    // Top 53 bits -> u in [0, 1), zeta = delta (2u - 1).
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double zeta = delta * (2.0 * u - 1.0);
    tap = mul(tap, {std::cos(zeta), std::sin(zeta)});
  }
  ++v.time_index;
}

TapVector advance(const TapVector& v, double delta, Rng& rng) {
  TapVector out = v;
  advance_in_place(out, delta, rng);
  return out;
}

std::vector<cplx> dft(std::span<const cplx> v) {
  if (!is_power_of_two(v.size())) {
    throw std::invalid_argument("dft: length " + std::to_string(v.size()) +
                                " is not a power of two");
  }
  std::vector<cplx> out(v.size());
  plan_for(v.size()).execute(v, out);
  return out;
}

cplx dft_bin(std::span<const cplx> v, std::size_t bin) {
  return dot(v, bin_kernel(v.size(), bin));
}

std::vector<cplx> extract_resources(std::span<const cplx> freq,
                                    std::size_t resource_count) {
  check_resource_count(freq.size(), resource_count);
  std::vector<cplx> out(resource_count);
  for (std::size_t r = 0; r < resource_count; ++r) {
    out[r] = freq[resource_bin(freq.size(), resource_count, r)];
  }
  return out;
}

ChannelEpisode simulate_episode(const SimConfig& cfg, Rng& rng,
                                IndependenceMode mode) {
  cfg.validate();
  return mode == IndependenceMode::kSharedFft ? simulate_shared(cfg, rng)
                                              : simulate_independent(cfg, rng);
}

ChannelEpisode simulate_episode(const SimConfig& cfg, std::uint64_t index,
                                IndependenceMode mode) {
  Rng rng = make_rng(cfg.seed, index);
  return simulate_episode(cfg, rng, mode);
}

double capacity(std::span<const cplx> window, CapacityMode mode) {
  if (window.empty()) throw std::invalid_argument("capacity: empty window");
  double total = 0.0;
  for (const cplx& h : window) total += std::log2(1.0 + std::norm(h));
  return mode == CapacityMode::kMean
             ? total / static_cast<double>(window.size())
             : total;
}

std::uint8_t label(std::span<const cplx> future, double gamma_th,
                   CapacityMode mode) {
  return capacity(future, mode) < gamma_th ? 1 : 0;
}

Batch build_dataset(const SimConfig& cfg, std::size_t n_windows,
                    unsigned workers) {
  cfg.validate();
  if (n_windows < 1) throw std::invalid_argument("build_dataset: n_windows < 1");
  const std::size_t per_episode = cfg.resource_count;
  const std::size_t n_episodes = (n_windows + per_episode - 1) / per_episode;
  Batch batch(n_windows);
  parallel_for(n_episodes, workers, [&](std::size_t e) {
    const ChannelEpisode episode = simulate_episode(cfg, e);
    for (std::size_t r = 0; r < per_episode; ++r) {
      const std::size_t slot = e * per_episode + r;
      if (slot >= n_windows) break;
      LabeledWindow& w = batch[slot];
      const auto in = episode.input(r);
      const auto fut = episode.future(r);
      w.input.assign(in.begin(), in.end());
      w.future.assign(fut.begin(), fut.end());
      w.label = label(fut, cfg.gamma_th, cfg.capacity_mode);
      w.resource_id = static_cast<std::uint32_t>(r);
      w.origin_time = e;
    }
  });
  return batch;
}

void write_dataset(const std::filesystem::path& path, const SimConfig& cfg,
                   const Batch& batch) {
  detail::ByteWriter w;
  w.magic(std::string_view(kDatasetMagic, 8));
  w.u32(kDatasetVersion);
  w.u64(batch.size());
  w.u32(static_cast<std::uint32_t>(cfg.k));
  w.u32(static_cast<std::uint32_t>(cfg.l));
  w.u8(static_cast<std::uint8_t>(cfg.capacity_mode));
  w.f64(cfg.gamma_th);
  for (const LabeledWindow& rec : batch) {
    if (rec.input.size() != cfg.k || rec.future.size() != cfg.l) {
      throw std::invalid_argument("write_dataset: record shape mismatch");
    }
    for (const cplx& h : rec.input) {
      w.f64(h.real());
      w.f64(h.imag());
    }
    for (const cplx& h : rec.future) {
      w.f64(h.real());
      w.f64(h.imag());
    }
    w.u8(rec.label);
  }
  w.save(path);
}

Dataset read_dataset(const std::filesystem::path& path) {
  auto r = detail::ByteReader::load(path);
  r.expect_magic(std::string_view(kDatasetMagic, 8));
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kDatasetVersion) {
    throw VersionError(version, kDatasetVersion, version_at);
  }
  Dataset ds;
  ds.header.n = r.u64("record count");
  ds.header.k = r.u32("k");
  ds.header.l = r.u32("l");
  const std::uint64_t mode_at = r.offset();
  const std::uint8_t mode = r.u8("capacity_mode");
  if (mode > 1) throw FormatError("invalid capacity_mode byte", mode_at);
  ds.header.capacity_mode = static_cast<CapacityMode>(mode);
  ds.header.gamma_th = r.f64("gamma_th");
  const std::uint64_t record_bytes =
      16ULL * (ds.header.k + ds.header.l) + 1ULL;
  if (ds.header.k == 0 || ds.header.l == 0 ||
      r.remaining() / record_bytes < ds.header.n) {
    throw FormatError("record payload shorter than header declares",
                      r.offset());
  }
  ds.records.resize(ds.header.n);
  for (std::uint64_t i = 0; i < ds.header.n; ++i) {
    LabeledWindow& rec = ds.records[i];
    rec.input.resize(ds.header.k);
    rec.future.resize(ds.header.l);
    for (auto& h : rec.input) {
      const double re = r.f64("input");
      h = {re, r.f64("input")};
    }
    for (auto& h : rec.future) {
      const double re = r.f64("future");
      h = {re, r.f64("future")};
    }
    const std::uint64_t label_at = r.offset();
    rec.label = r.u8("label");
    if (rec.label > 1) throw FormatError("label byte is not 0/1", label_at);
    rec.origin_time = i;
  }
  r.expect_end();
  return ds;
}

}  // namespace outage
