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

#include "segmetrics/pixel_metrics.hpp"

namespace segmetrics {

PixelMetricReport compute_pixel_metrics(const DatasetConfusion& dc) {
  Count correct = 0;
  Count labelled = 0;
  for (const ConfusionCell& t : dc.totals) {
    correct += t.tp;
    labelled += t.tp + t.fn;
  }
  if (labelled == 0) throw Error("empty evaluation domain");

  PixelMetricReport r;
  r.acc = static_cast<double>(correct) / static_cast<double>(labelled);
  r.class_acc.reserve(dc.totals.size());
  r.iou_d.reserve(dc.totals.size());
  for (const ConfusionCell& t : dc.totals) {
    const Count gt = t.tp + t.fn;
    const Count uni = t.tp + t.fp + t.fn;
    r.class_acc.push_back(gt > 0 ? Score::of(static_cast<double>(t.tp) / gt) : Score::null());
    r.iou_d.push_back(uni > 0 ? Score::of(static_cast<double>(t.tp) / uni) : Score::null());
  }
  r.macc = mean_of_values(r.class_acc).value();
  r.miou_d = mean_of_values(r.iou_d).value();
  return r;
}

}  // namespace segmetrics
