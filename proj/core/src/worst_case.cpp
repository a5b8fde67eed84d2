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

#include <algorithm>
#include <stdexcept>

namespace segmetrics {
namespace {

// Prefix mean over an ascending list.
double prefix_mean(std::span<const double> sorted, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += sorted[i];
  return std::clamp(sum / static_cast<double>(n), 0.0, 1.0);
}

}  // namespace

std::size_t worst_case_count(std::size_t n, int q_percent) {
  if (q_percent <= 0 || q_percent > 100) {
    throw std::invalid_argument("quantile must be in (0, 100], got " +
                                std::to_string(q_percent));
  }
  // Integer arithmetic keeps the floor exact.
  return std::max<std::size_t>(1, n * static_cast<std::size_t>(q_percent) / 100);
}

double worst_case_mean(std::span<const double> scores, int q_percent) {
  if (scores.empty()) throw std::invalid_argument("worst_case_mean of an empty list");
  const std::size_t n = worst_case_count(scores.size(), q_percent);
  std::vector<double> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end());
  return prefix_mean(sorted, n);
}

std::vector<double> non_null_values(std::span<const Score> scores) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const Score& s : scores) {
    if (s.has_value()) out.push_back(s.value());
  }
  return out;
}

QuantileReport quantile_suite(const std::vector<std::vector<double>>& per_unit_scores) {
  const std::size_t num_classes = per_unit_scores.size();
  QuantileReport r;
  for (int q : kReportedQuantiles) r.per_class_q[q].assign(num_classes, Score::null());
  r.per_class_qbar.assign(num_classes, Score::null());

  for (std::size_t c = 0; c < num_classes; ++c) {
    if (per_unit_scores[c].empty()) continue;
    std::vector<double> sorted = per_unit_scores[c];
    std::stable_sort(sorted.begin(), sorted.end());
    for (int q : kReportedQuantiles) {
      r.per_class_q[q][c] =
          Score::of(prefix_mean(sorted, worst_case_count(sorted.size(), q)));
    }
    double acc = 0.0;
    for (int q : kQbarQuantiles) acc += r.per_class_q[q][c].value();
    r.per_class_qbar[c] =
        Score::of(std::clamp(acc / static_cast<double>(kQbarQuantiles.size()), 0.0, 1.0));
  }

  for (int q : kReportedQuantiles) r.miou_q.emplace(q, mean_of_values(r.per_class_q[q]));
  r.miou_qbar = mean_of_values(r.per_class_qbar);
  return r;
}

}  // namespace segmetrics
