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

#include <vector>

#include "segmetrics/confusion.hpp"
#include "segmetrics/types.hpp"

namespace segmetrics {

struct PixelMetricReport {
  double acc = 0.0;
  double macc = 0.0;
  std::vector<Score> class_acc;  // NULL for classes without ground truth
  std::vector<Score> iou_d;      // NULL for classes with zero union
  double miou_d = 0.0;
};

// Dataset-level metrics from accumulated counts. Classes with zero union are
// left out of mIoU^D and classes with no ground truth are left out of mAcc.
// Throws Error("empty evaluation domain") when there is no ground truth.
PixelMetricReport compute_pixel_metrics(const DatasetConfusion& dc);

}  // namespace segmetrics
