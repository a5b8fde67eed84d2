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
#include <span>
#include <string>
#include <vector>

#include "segmetrics/confusion.hpp"
#include "segmetrics/types.hpp"

namespace segmetrics {

/// Exact per-instance counts. Only ground-truth pixels of the instance's own
/// class inside the instance mask count towards its size.
struct InstanceCell {
  std::string image_id;
  ClassId class_id = 0;
  InstanceId instance_id = 0;
  Count tp = 0;
  Count fn = 0;

  Count size() const { return tp + fn; }
};

// Reason codes follow the usual audit convention: 1 = object present in the
// instance labels but absent from the image labels, 2 = the reverse.
enum class MislabelReason { kPresentInInstanceOnly = 1, kPresentInImageOnly = 2 };

struct MislabelFinding {
  std::string image_id;
  ClassId class_id = 0;
  std::optional<InstanceId> instance_id;
  MislabelReason reason = MislabelReason::kPresentInInstanceOnly;

  friend bool operator==(const MislabelFinding&, const MislabelFinding&) = default;
};

/// Boolean mask over classes; empty means "no thing classes known yet".
using ClassMask = std::vector<bool>;

struct InstanceExtraction {
  std::vector<InstanceCell> cells;      // ordered by instance id
  std::vector<Count> fp_per_class;      // image-level FP per class
  std::vector<MislabelFinding> findings;
  std::vector<ClassId> instance_classes;  // sorted, unique
};

// Throws ValidationError on dimension mismatch. PresentInImageOnly findings
// are emitted only for classes set in thing_classes.
InstanceExtraction extract_instance_cells(const std::string& image_id,
                                          const LabelMap& gt,
                                          const LabelMap& pred,
                                          const InstanceMap& inst,
                                          ClassId num_classes,
                                          const ClassMask& thing_classes);

// Ground-truth-only audit: both discrepancy directions for one image.
std::vector<MislabelFinding> find_mislabels(const std::string& image_id,
                                            const LabelMap& gt,
                                            const InstanceMap& inst,
                                            ClassId num_classes,
                                            const ClassMask& thing_classes);

// PresentInImageOnly findings for thing classes that have ground-truth pixels
// but no instance in the image.
std::vector<MislabelFinding> image_only_findings(
    const std::string& image_id, const std::vector<bool>& gt_present,
    std::span<const ClassId> instance_classes, const ClassMask& thing_classes);

struct ContinuousAllocation {
  std::vector<double> fp;
  std::vector<double> iou;
  double total = 0.0;
};

struct IntegerAllocation {
  std::vector<Count> fp;
  std::vector<double> iou;
  double total = 0.0;
};

enum class Sense { kMin, kMax };

// FP shared in proportion to instance size (real-valued, no rounding).
ContinuousAllocation distribute_fp_proportional(std::span<const InstanceCell> cells,
                                                double fp);

// Integer allocation minimizing (greedy, one pixel at a time to the largest
// marginal decrease) or maximizing (best single-instance vertex) the summed
// instance IoU. Ties go to the lowest index.
IntegerAllocation distribute_fp_extremal(std::span<const InstanceCell> cells,
                                         Count fp, Sense sense);

// Real-valued minimizer of the summed IoU (water-filling on the KKT
// conditions). Its total is a lower bound for every feasible allocation.
ContinuousAllocation distribute_fp_min_continuous(std::span<const InstanceCell> cells,
                                                  double fp);

/// All instances of one class in one image plus the image-level FP.
struct InstanceGroup {
  std::string image_id;
  ClassId class_id = 0;
  std::vector<InstanceCell> cells;
  Count fp = 0;
};

struct InstanceScore {
  std::string image_id;
  ClassId class_id = 0;
  InstanceId instance_id = 0;
  double proportional = 0.0;
  double lower = 0.0;          // continuous-relaxation minimum
  double lower_integer = 0.0;  // integer greedy minimum
  double upper = 0.0;          // maximum (vertex)
};

struct InstanceScoreSet {
  std::vector<InstanceScore> scores;
  std::vector<Score> per_class_k;
  double miou_k = 0.0;
  // Per-unit scores feeding the worst-case suite: per-instance proportional
  // IoUs for thing classes, per-image IoU_{i,c} for the others.
  std::vector<std::vector<double>> per_class_units;
  std::vector<MislabelFinding> audit_findings;
  std::vector<std::string> notes;
};

InstanceScoreSet compute_instance_metrics(std::span<const InstanceGroup> groups,
                                          const ScoreMatrix& score_matrix_for_stuff,
                                          const ClassMask& thing_classes);

}  // namespace segmetrics
