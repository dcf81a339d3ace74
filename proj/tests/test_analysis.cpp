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

#include <gtest/gtest.h>

#include <cmath>

#include "outage/analysis.hpp"
#include "outage/errors.hpp"
#include "outage/losses.hpp"

namespace outage {
namespace {

TEST(Theorem1Outage, DirectSubstitution) {
  EXPECT_NEAR(theorem1_outage({0.4, 0.5, 0.1, 3}), 0.175, 1e-15);
}

TEST(Theorem1Outage, Limits) {
  for (double fq : {0.0, 0.3, 1.0}) {
    EXPECT_EQ(theorem1_outage({0.37, fq, 0.05, 1}), 0.37);
  }
  for (std::size_t r : {1u, 2u, 10u}) {
    EXPECT_EQ(theorem1_outage({0.37, 0.0, 0.05, r}), 0.37);
  }
  // Many resources and a positive acceptance rate approach pinf.
  EXPECT_NEAR(theorem1_outage({0.37, 0.5, 0.05, 200}), 0.05, 1e-12);
}

TEST(Theorem1Outage, RejectsInvalidInputs) {
  EXPECT_THROW(theorem1_outage({1.5, 0.5, 0.1, 3}), std::invalid_argument);
  EXPECT_THROW(theorem1_outage({0.5, -0.1, 0.1, 3}), std::invalid_argument);
  EXPECT_THROW(theorem1_outage({0.5, 0.5, 0.1, 0}), std::invalid_argument);
}

TEST(Theorem1Plugin, ValueAndDeltaMethodError) {
  const Proportion p1 = make_proportion(400, 1000);
  const Proportion fq = make_proportion(500, 1000);
  const Proportion pinf = make_proportion(50, 500);
  const OutageEstimate e = theorem1_plugin(p1, fq, pinf, 3);
  EXPECT_NEAR(e.value, 0.175, 1e-15);
  EXPECT_EQ(e.method, EstimateMethod::kTheorem1Plugin);
  // Partials: u = 0.25, du/dfq = -2 * 0.5 = -1.
  const double d_p1 = 0.25, d_pinf = 0.75, d_fq = (0.4 - 0.1) * -1.0;
  const double expected = std::sqrt(
      d_p1 * d_p1 * 0.4 * 0.6 / 1000 + d_fq * d_fq * 0.25 / 1000 +
      d_pinf * d_pinf * 0.1 * 0.9 / 500);
  EXPECT_NEAR(e.standard_error, expected, 1e-15);
}

TEST(MakeProportion, BinomialStandardError) {
  const Proportion p = make_proportion(30, 100);
  EXPECT_EQ(p.value, 0.3);
  EXPECT_EQ(p.n, 100u);
  EXPECT_NEAR(p.standard_error, std::sqrt(0.3 * 0.7 / 100), 1e-16);
}

TEST(EmpiricalP1, Examples) {
  const std::vector<std::uint8_t> b{1, 0, 0, 1};
  EXPECT_EQ(empirical_p1(b).value, 0.5);
  EXPECT_EQ(empirical_p1(std::vector<std::uint8_t>(5, 0)).value, 0.0);
  const std::vector<double> q{0.1, 0.9, 0.5, 0.4};
  EXPECT_EQ(empirical_p1(b).value,
            p1_hat(confusion(q, b, 0.5, Weighting::heaviside())));
}

TEST(EmpiricalFq, Examples) {
  const std::vector<double> q{0.2, 0.7};
  EXPECT_EQ(empirical_fq(q, 0.5).value, 0.5);
  EXPECT_EQ(empirical_fq(q, 1.0).value, 1.0);
  EXPECT_EQ(empirical_fq(q, 0.0).value, 0.0);
  EXPECT_EQ(empirical_fq(std::vector<double>{0.5}, 0.5).value, 1.0);
}

TEST(EmpiricalPinf, Examples) {
  const std::vector<double> q{0.1, 0.2, 0.9};
  const std::vector<std::uint8_t> b{1, 0, 1};
  EXPECT_EQ(empirical_pinf(q, b, 0.5).value, 0.5);
  EXPECT_EQ(empirical_pinf(q, b, 0.5).n, 2u);
  const std::vector<std::uint8_t> zeros{0, 0, 0};
  EXPECT_EQ(empirical_pinf(q, zeros, 1.0).value, 0.0);
  EXPECT_THROW(empirical_pinf(q, b, 0.05), DegenerateEstimateError);
}

TEST(GeometricSeries, Examples) {
  EXPECT_NEAR(geometric_series_check(0.2, 0.5, 60), 0.2, 1e-12);
  EXPECT_EQ(geometric_series_check(0.3, 1.0, 1), 0.3);
  EXPECT_EQ(geometric_series_check(0.0, 0.4, 10), 0.0);
}

}  // namespace
}  // namespace outage
