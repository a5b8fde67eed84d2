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

#include "segmetrics/fine_metrics.hpp"

#include <utility>

namespace segmetrics {

Score score_cell(const ConfusionCell& cell, ScoringMode mode, NullSemantics semantics) {
  const bool in_gt = cell.tp + cell.fn > 0;
  const bool in_pred = cell.tp + cell.fp > 0;
  const bool foreground = mode == ScoringMode::kBinaryForeground;

  if (in_gt) {
    // Cases 1 and 3; case 3 has tp == 0 and lands on 0 naturally.
    return Score::of(static_cast<double>(cell.tp) /
                     static_cast<double>(cell.tp + cell.fp + cell.fn));
  }
  if (!in_pred) return foreground ? Score::of(1.0) : Score::null();  // case 2
  // Case 4.
  if (foreground || semantics == NullSemantics::kCsurka) return Score::of(0.0);
  return Score::null();
}

ScoringMode scoring_mode_of(ClassId cls, const SegmentationMode& mode) {
  if (const auto* bin = std::get_if<BinaryMode>(&mode)) {
    return cls == bin->foreground ? ScoringMode::kBinaryForeground
                                  : ScoringMode::kBinaryBackground;
  }
  return ScoringMode::kMultiClass;
}

ScoreMatrix build_score_matrix(const DatasetConfusion& dc, const SegmentationMode& mode,
                               NullSemantics semantics) {
  std::vector<std::string> ids;
  ids.reserve(dc.per_image.size());
  for (const auto& img : dc.per_image) ids.push_back(img.image_id);

  const std::size_t num_classes = dc.num_classes();
  ScoreMatrix sm(std::move(ids), num_classes);
  for (std::size_t i = 0; i < dc.per_image.size(); ++i) {
    const auto& cells = dc.per_image[i].cells;
    if (cells.size() != num_classes) {
      throw ValidationError("image \"" + dc.per_image[i].image_id +
                            "\" has a mismatched class count");
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      sm.set(i, c,
             score_cell(cells[c], scoring_mode_of(static_cast<ClassId>(c), mode), semantics));
    }
  }
  return sm;
}

ScoreMatrix build_score_matrix(const DatasetConfusion& dc, const DatasetManifest& manifest) {
  if (dc.num_classes() != manifest.num_classes) {
    throw ValidationError("confusion has " + std::to_string(dc.num_classes()) +
                          " classes but the manifest declares " +
                          std::to_string(manifest.num_classes));
  }
  return build_score_matrix(dc, manifest.mode, manifest.null_semantics);
}

FineMetricReport compute_fine_metrics(ScoreMatrix sm) {
  const std::size_t num_images = sm.num_images();
  const std::size_t num_classes = sm.num_classes();

  FineMetricReport r{std::move(sm), {}, 0.0, {}, 0.0, {}, {}};
  const ScoreMatrix& m = r.score_matrix;

  r.iou_i_per_image.reserve(num_images);
  for (std::size_t i = 0; i < num_images; ++i) {
    Score s = mean_of_values(m.row(i));
    if (s.is_null()) r.excluded_images.push_back(m.image_ids()[i]);
    r.iou_i_per_image.push_back(s);
  }
  r.iou_c_per_class.reserve(num_classes);
  r.image_class_counts.assign(num_classes, 0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::vector<Score> col = m.column(c);
    for (const Score& s : col) {
      if (s.has_value()) ++r.image_class_counts[c];
    }
    r.iou_c_per_class.push_back(mean_of_values(col));
  }

  const Score miou_i = mean_of_values(r.iou_i_per_image);
  const Score miou_c = mean_of_values(r.iou_c_per_class);
  if (miou_i.is_null() || miou_c.is_null()) throw Error("no scorable content");
  r.miou_i = miou_i.value();
  r.miou_c = miou_c.value();
  return r;
}

}  // namespace segmetrics
