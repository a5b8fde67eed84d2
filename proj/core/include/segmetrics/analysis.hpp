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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "segmetrics/fine_metrics.hpp"
#include "segmetrics/instance_metrics.hpp"
#include "segmetrics/types.hpp"

namespace segmetrics {

inline constexpr int kDefaultHistogramBins = 30;

struct HistogramReport {
  std::vector<double> bin_edges;  // percent scale, num_bins + 1 entries
  std::vector<Count> counts;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;       // population
  double skew = 0.0;      // biased g1
  double kurtosis = 0.0;  // biased excess g2
  bool degenerate = false;  // zero variance; skew and kurtosis reported as 0
};

// Uniform bins over [0, 100] on scores scaled to percent. Throws
// ValidationError with fewer than two non-NULL scores or num_bins < 1.
HistogramReport histogram(std::span<const Score> iou_i_scores, int num_bins);

struct RankedImage {
  std::string image_id;
  double iou_i = 0.0;

  friend bool operator==(const RankedImage&, const RankedImage&) = default;
};

// Ascending by IoU_i^I, ties by image id. NULL rows are skipped.
std::vector<RankedImage> rank_worst_images(const FineMetricReport& fine,
                                           std::size_t top_n);

struct ImbalanceReport {
  std::vector<std::optional<double>> r_d;
  std::vector<std::optional<double>> r_i;
  std::map<std::string, double> mean_log_ratio_by_group;
};

// Size ratios over ground-truth instance sizes. Classes without instances
// stay empty and are skipped in the group means; classes without a group tag
// are reported but not averaged.
ImbalanceReport size_imbalance(std::span<const InstanceCell> instances,
                               const std::map<ClassId, std::string>& groups,
                               ClassId num_classes);

struct CoverageReport {
  double mean_coverage_pct = 0.0;
  double normalized_std_pct = 0.0;  // std / mean * 100 (population std)
};

CoverageReport coverage(std::span<const LabelMap> gt_maps, ClassId num_classes);
// Same, from the number of distinct ground-truth classes in each image.
CoverageReport coverage_from_counts(std::span<const std::size_t> distinct_per_image,
                                    ClassId num_classes);

}  // namespace segmetrics
