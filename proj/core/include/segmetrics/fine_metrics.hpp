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

#include <cstddef>
#include <string>
#include <vector>

#include "segmetrics/confusion.hpp"
#include "segmetrics/manifest.hpp"
#include "segmetrics/types.hpp"

namespace segmetrics {

enum class ScoringMode { kMultiClass, kBinaryForeground, kBinaryBackground };

/// Per-image-per-class IoU with the presence rules:
///
///   case  gt  pred   multi-class (ours)  multi-class (csurka)  binary fg
///   1     yes yes    IoU                 IoU                   IoU
///   2     no  no     NULL                NULL                  1
///   3     yes no     0                   0                     0
///   4     no  yes    NULL                0                     0
///
/// The binary background class follows the multi-class column.
Score score_cell(const ConfusionCell& cell, ScoringMode mode,
                 NullSemantics semantics);

ScoringMode scoring_mode_of(ClassId cls, const SegmentationMode& mode);

ScoreMatrix build_score_matrix(const DatasetConfusion& dc,
                               const SegmentationMode& mode,
                               NullSemantics semantics);
// Throws ValidationError when the class counts disagree.
ScoreMatrix build_score_matrix(const DatasetConfusion& dc,
                               const DatasetManifest& manifest);

struct FineMetricReport {
  ScoreMatrix score_matrix;
  std::vector<Score> iou_i_per_image;
  double miou_i = 0.0;
  std::vector<Score> iou_c_per_class;
  double miou_c = 0.0;
  // I_c: number of images with a non-NULL score for class c.
  std::vector<std::size_t> image_class_counts;
  // Rows that were entirely NULL and therefore left out of mIoU^I.
  std::vector<std::string> excluded_images;
};

// Throws Error("no scorable content") when every entry is NULL.
FineMetricReport compute_fine_metrics(ScoreMatrix sm);

}  // namespace segmetrics
