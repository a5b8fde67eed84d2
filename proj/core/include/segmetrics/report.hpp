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

#include <optional>
#include <string>
#include <vector>

#include "segmetrics/analysis.hpp"
#include "segmetrics/fine_metrics.hpp"
#include "segmetrics/instance_metrics.hpp"
#include "segmetrics/manifest.hpp"
#include "segmetrics/pixel_metrics.hpp"
#include "segmetrics/worst_case.hpp"

namespace segmetrics {

inline constexpr const char* kVersion = "0.1.0";

struct ComputeOptions {
  std::optional<NullSemantics> semantics;  // overrides the manifest
  int bins = kDefaultHistogramBins;
  std::size_t top_worst = 10;
  bool use_instances = true;
  std::size_t jobs = 1;
};

struct MetricReport {
  std::string manifest_path;
  NullSemantics semantics = NullSemantics::kOurs;
  ClassId num_classes = 0;
  std::vector<std::string> class_names;

  PixelMetricReport pixel;
  FineMetricReport fine;
  std::optional<InstanceScoreSet> instance;
  QuantileReport worst_case_i;
  QuantileReport worst_case_c;
  std::optional<QuantileReport> worst_case_k;
  std::optional<HistogramReport> histogram;  // needs >= 2 scored images
  std::vector<RankedImage> worst_images;
  std::optional<ImbalanceReport> imbalance;
  CoverageReport coverage;
  std::vector<MislabelFinding> audit;
  std::vector<std::string> warnings;
};

// Loads every entry (up to options.jobs in parallel), then reduces in entry
// order. Errors carry the image id of the failing entry.
MetricReport run_compute(const DatasetManifest& manifest,
                         const std::string& manifest_path,
                         const ComputeOptions& options);

// Ground truth and instances only; predictions are not read.
std::vector<MislabelFinding> run_audit(const DatasetManifest& manifest,
                                       std::size_t jobs);

// Scores only through the fine metrics, then the histogram.
HistogramReport run_histogram(const DatasetManifest& manifest,
                              const ComputeOptions& options);

// Serializations. Metrics are in percent rounded to 2 decimals; NULL is JSON
// null or an empty CSV field. Output is byte-stable for a given report.
std::string report_to_json(const MetricReport& report);
std::string histogram_to_json(const HistogramReport& h);
std::string score_matrix_csv(const ScoreMatrix& sm);
std::string per_class_csv(const MetricReport& report);
std::string audit_csv(const std::vector<MislabelFinding>& findings,
                      const std::vector<std::string>& class_names);
std::string worst_images_csv(const std::vector<RankedImage>& ranked);
std::string instance_scores_csv(const InstanceScoreSet& scores,
                                const std::vector<std::string>& class_names);

}  // namespace segmetrics
