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

#include <string>
#include <vector>

#include "segmetrics/types.hpp"

namespace segmetrics {

struct ImageConfusion {
  std::string image_id;
  std::vector<ConfusionCell> cells;  // one per class
};

struct DatasetConfusion {
  std::vector<ImageConfusion> per_image;
  std::vector<ConfusionCell> totals;

  std::size_t num_classes() const { return totals.size(); }
};

// Pixels whose ground truth is the ignore id are dropped entirely. A
// prediction equal to the ignore id counts as a miss for the ground-truth
// class and as a hit for nothing.
ImageConfusion confuse_image(std::string image_id, const LabelMap& gt,
                             const LabelMap& pred, ClassId num_classes);

DatasetConfusion accumulate(std::vector<ImageConfusion> images,
                            ClassId num_classes);

/// Streaming fold over ImageConfusion values. Partial accumulators may be
/// merged in any order; totals are exact integers so the result does not
/// depend on the reduction tree.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(ClassId num_classes, bool keep_per_image = true);

  void add(ImageConfusion image);
  void merge(ConfusionAccumulator&& other);
  const std::vector<ConfusionCell>& totals() const { return totals_; }
  DatasetConfusion finish() &&;

 private:
  ClassId num_classes_;
  bool keep_per_image_;
  std::vector<ImageConfusion> per_image_;
  std::vector<ConfusionCell> totals_;
};

}  // namespace segmetrics
