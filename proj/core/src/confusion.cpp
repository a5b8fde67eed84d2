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

#include "segmetrics/confusion.hpp"

#include <utility>

namespace segmetrics {

ImageConfusion confuse_image(std::string image_id, const LabelMap& gt,
                             const LabelMap& pred, ClassId num_classes) {
  if (!gt.same_shape(pred)) {
    throw ValidationError("image \"" + image_id + "\": ground truth is " +
                          gt.shape_string() + " but prediction is " +
                          pred.shape_string());
  }
  gt.validate(num_classes);
  pred.validate(num_classes);

  // Row (gt) x column (pred) histogram; the extra column collects predictions
  // equal to the ignore id.
  const std::size_t cols = static_cast<std::size_t>(num_classes) + 1;
  std::vector<Count> hist(static_cast<std::size_t>(num_classes) * cols, 0);
  const auto g = gt.labels();
  const auto p = pred.labels();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (gt.is_ignore(g[i])) continue;
    const std::size_t col = pred.is_ignore(p[i]) ? num_classes : p[i];
    ++hist[static_cast<std::size_t>(g[i]) * cols + col];
  }

  ImageConfusion out{std::move(image_id), std::vector<ConfusionCell>(num_classes)};
  for (ClassId r = 0; r < num_classes; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const Count n = hist[r * cols + c];
      if (n == 0) continue;
      if (c == r) {
        out.cells[r].tp += n;
      } else {
        out.cells[r].fn += n;
        if (c < num_classes) out.cells[c].fp += n;
      }
    }
  }
  return out;
}

ConfusionAccumulator::ConfusionAccumulator(ClassId num_classes, bool keep_per_image)
    : num_classes_(num_classes), keep_per_image_(keep_per_image), totals_(num_classes) {}

void ConfusionAccumulator::add(ImageConfusion image) {
  if (image.cells.size() != num_classes_) {
    throw ValidationError("image \"" + image.image_id + "\" has " +
                          std::to_string(image.cells.size()) + " classes, expected " +
                          std::to_string(num_classes_));
  }
  for (ClassId c = 0; c < num_classes_; ++c) totals_[c] += image.cells[c];
  if (keep_per_image_) per_image_.push_back(std::move(image));
}

void ConfusionAccumulator::merge(ConfusionAccumulator&& other) {
  if (other.num_classes_ != num_classes_) {
    throw ValidationError("cannot merge accumulators with different class counts");
  }
  for (ClassId c = 0; c < num_classes_; ++c) totals_[c] += other.totals_[c];
  for (auto& img : other.per_image_) per_image_.push_back(std::move(img));
  other.per_image_.clear();
}

DatasetConfusion ConfusionAccumulator::finish() && {
  return DatasetConfusion{std::move(per_image_), std::move(totals_)};
}

DatasetConfusion accumulate(std::vector<ImageConfusion> images, ClassId num_classes) {
  ConfusionAccumulator acc(num_classes);
  for (auto& img : images) acc.add(std::move(img));
  return std::move(acc).finish();
}

}  // namespace segmetrics
