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

#ifndef OUTAGE_ERRORS_HPP_
#define OUTAGE_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace outage {

// Invalid simulation / training / experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed binary file. offset() is the byte position where decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) +
                           ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class VersionError : public FormatError {
 public:
  VersionError(std::uint32_t found, std::uint32_t expected,
               std::uint64_t offset)
      : FormatError("unsupported file version " + std::to_string(found) +
                        ", expected " + std::to_string(expected),
                    offset),
        found_(found) {}
  std::uint32_t found() const { return found_; }

 private:
  std::uint32_t found_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A ratio estimator whose denominator set is empty (e.g. nothing accepted).
class DegenerateEstimateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Training produced a NaN/Inf loss.
class NonFiniteLossError : public std::runtime_error {
 public:
  NonFiniteLossError(const std::string& what, std::size_t step,
                     std::uint64_t batch_hash)
      : std::runtime_error(what), step_(step), batch_hash_(batch_hash) {}
  std::size_t step() const { return step_; }
  std::uint64_t batch_hash() const { return batch_hash_; }

 private:
  std::size_t step_;
  std::uint64_t batch_hash_;
};

}  // namespace outage

#endif  // OUTAGE_ERRORS_HPP_
