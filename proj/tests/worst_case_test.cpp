// Copyright 2026 The segmetrics Authors. All Rights Reserved.
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

#include "segmetrics/worst_case.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace segmetrics {
namespace {

TEST(WorstCaseTest, Examples) {
  const std::vector<double> two{0.2, 0.8};
  EXPECT_DOUBLE_EQ(worst_case_mean(two, 10), 0.2);
  EXPECT_DOUBLE_EQ(worst_case_mean(two, 100), 0.5);
  const std::vector<double> four{1.0, 0.4, 0.1, 0.7};
  EXPECT_DOUBLE_EQ(worst_case_mean(four, 50), 0.25);
  EXPECT_THROW(worst_case_mean(std::vector<double>{}, 50), std::invalid_argument);
  EXPECT_THROW(worst_case_mean(two, 0), std::invalid_argument);
  EXPECT_THROW(worst_case_mean(two, 101), std::invalid_argument);
}

TEST(WorstCaseTest, CountFloorRule) {
  EXPECT_EQ(worst_case_count(2, 10), 1u);
  EXPECT_EQ(worst_case_count(2, 90), 1u);
  EXPECT_EQ(worst_case_count(2, 100), 2u);
  EXPECT_EQ(worst_case_count(10, 30), 3u);
  EXPECT_EQ(worst_case_count(7, 1), 1u);
  EXPECT_EQ(worst_case_count(1000, 5), 50u);
}

TEST(QuantileSuiteTest, ZeroAndOne) {
  const auto r = quantile_suite({{0.0, 1.0}});
  for (int q : kReportedQuantiles) {
    EXPECT_DOUBLE_EQ(r.per_class_q.at(q)[0].value(), q == 100 ? 0.5 : 0.0) << q;
  }
  EXPECT_DOUBLE_EQ(r.per_class_qbar[0].value(), 0.05);
  EXPECT_DOUBLE_EQ(r.miou_qbar.value(), 0.05);
}

TEST(QuantileSuiteTest, ConstantSingleAndEmpty) {
  const auto r = quantile_suite({{0.3, 0.3, 0.3}, {0.9}, {}});
  for (int q : kReportedQuantiles) {
    EXPECT_DOUBLE_EQ(r.per_class_q.at(q)[0].value(), 0.3);
    EXPECT_DOUBLE_EQ(r.per_class_q.at(q)[1].value(), 0.9);
    EXPECT_TRUE(r.per_class_q.at(q)[2].is_null());
    EXPECT_DOUBLE_EQ(r.miou_q.at(q).value(), 0.6);
  }
  EXPECT_DOUBLE_EQ(r.per_class_qbar[0].value(), 0.3);
  EXPECT_DOUBLE_EQ(r.per_class_qbar[1].value(), 0.9);
  EXPECT_TRUE(r.per_class_qbar[2].is_null());
  EXPECT_TRUE(quantile_suite({{}}).miou_qbar.is_null());
}

TEST(QuantileSuiteTest, NonNullValues) {
  const std::vector<Score> s{Score::null(), Score::of(0.5), Score::null(), Score::of(0.25)};
  EXPECT_EQ(non_null_values(s), (std::vector<double>{0.5, 0.25}));
}

// Oracle: sort, take the prefix by the floor rule, average.
double direct(std::vector<double> v, int q) {
  std::sort(v.begin(), v.end());
  const std::size_t n = std::max<std::size_t>(1, v.size() * static_cast<std::size_t>(q) / 100);
  return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n), 0.0) /
         static_cast<double>(n);
}

TEST(WorstCaseProperty, MonotoneFloorRuleAndFullMean) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> v(len(rng));
    for (double& x : v) x = u(rng);
    double prev = -1.0;
    for (int q = 1; q <= 100; ++q) {
      const double m = worst_case_mean(v, q);
      ASSERT_GE(m, prev - 1e-15) << "q=" << q;
      ASSERT_NEAR(m, direct(v, q), 1e-12);
      prev = m;
    }
    const auto r = quantile_suite({v});
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    ASSERT_NEAR(r.per_class_q.at(100)[0].value(), mean, 1e-12);
    ASSERT_LE(r.per_class_qbar[0].value(), r.per_class_q.at(100)[0].value() + 1e-12);
    auto shuffled = v;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    ASSERT_NEAR(worst_case_mean(shuffled, 30), worst_case_mean(v, 30), 1e-15);
  }
}

TEST(WorstCaseProperty, DuplicationWhereFloorsAlign) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(10);
    for (double& x : v) x = u(rng);
    auto doubled = v;
    doubled.insert(doubled.end(), v.begin(), v.end());
    for (int q : kQbarQuantiles) {
      ASSERT_NEAR(worst_case_mean(v, q), worst_case_mean(doubled, q), 1e-12);
    }
  }
}

}  // namespace
}  // namespace segmetrics
