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

#pragma once

#include <array>
#include <map>
#include <span>
#include <vector>

#include "segmetrics/types.hpp"

namespace segmetrics {

// Percent thresholds reported by quantile_suite. Only 10..100 enter q-bar.
inline constexpr std::array<int, 12> kReportedQuantiles = {1,  5,  10, 20, 30, 40,
                                                           50, 60, 70, 80, 90, 100};
inline constexpr std::array<int, 10> kQbarQuantiles = {10, 20, 30, 40, 50,
                                                       60, 70, 80, 90, 100};

// Number of lowest scores averaged at percent q: max(1, floor(n * q / 100)).
std::size_t worst_case_count(std::size_t n, int q_percent);

// Mean of the lowest worst_case_count(n, q) scores. Throws
// std::invalid_argument for an empty list or q outside (0, 100].
double worst_case_mean(std::span<const double> scores, int q_percent);

struct QuantileReport {
  std::map<int, std::vector<Score>> per_class_q;
  std::vector<Score> per_class_qbar;
  std::map<int, Score> miou_q;  // NULL when no class is scorable
  Score miou_qbar = Score::null();
};

// One list per class (or a single list for per-image scores). An empty list
// yields NULL for that class and is left out of the means.
QuantileReport quantile_suite(const std::vector<std::vector<double>>& per_unit_scores);

// Drops NULL entries.
std::vector<double> non_null_values(std::span<const Score> scores);

}  // namespace segmetrics
