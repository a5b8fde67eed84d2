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

#include "segmetrics/instance_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <utility>

namespace segmetrics {
namespace {

__extension__ typedef __int128 Wide;

bool is_thing(const ClassMask& mask, ClassId c) { return c < mask.size() && mask[c]; }

struct InstanceScan {
  std::map<InstanceId, InstanceCell> cells;  // every instance seen in the grid
  std::vector<bool> gt_present;
  std::vector<ClassId> instance_classes;
};

// One pass over gt and instances; pred is optional.
InstanceScan scan_instances(const std::string& image_id, const LabelMap& gt,
                            const LabelMap* pred, const InstanceMap& inst,
                            ClassId num_classes) {
  if (gt.width() != inst.width() || gt.height() != inst.height()) {
    throw ValidationError("image \"" + image_id + "\": ground truth is " + gt.shape_string() +
                          " but instance map is " + std::to_string(inst.width()) + "x" +
                          std::to_string(inst.height()));
  }
  for (const auto& [id, cls] : inst.instance_classes()) {
    if (cls >= num_classes) {
      throw ValidationError("image \"" + image_id + "\": instance " + std::to_string(id) +
                            " has class " + std::to_string(cls) + " out of range");
    }
  }

  InstanceScan scan;
  scan.gt_present.assign(num_classes, false);
  const auto g = gt.labels();
  const auto ids = inst.instance_ids();
  const auto& classes = inst.instance_classes();
  std::span<const ClassId> p;
  if (pred != nullptr) p = pred->labels();

  for (std::size_t i = 0; i < g.size(); ++i) {
    if (gt.is_ignore(g[i])) continue;
    scan.gt_present[g[i]] = true;
    const InstanceId k = ids[i];
    if (k == 0) continue;
    auto it = scan.cells.find(k);
    if (it == scan.cells.end()) {
      InstanceCell cell;
      cell.image_id = image_id;
      cell.instance_id = k;
      cell.class_id = classes.at(k);
      it = scan.cells.emplace(k, std::move(cell)).first;
    }
    InstanceCell& cell = it->second;
    if (g[i] != cell.class_id) continue;
    if (pred != nullptr && p[i] == cell.class_id) {
      ++cell.tp;
    } else {
      ++cell.fn;
    }
  }
  // Instances lying entirely on ignore pixels never reach the loop above.
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const InstanceId k = ids[i];
    if (k != 0 && !scan.cells.contains(k)) {
      InstanceCell cell;
      cell.image_id = image_id;
      cell.instance_id = k;
      cell.class_id = classes.at(k);
      scan.cells.emplace(k, std::move(cell));
    }
  }
  for (const auto& [k, cell] : scan.cells) scan.instance_classes.push_back(cell.class_id);
  std::sort(scan.instance_classes.begin(), scan.instance_classes.end());
  scan.instance_classes.erase(
      std::unique(scan.instance_classes.begin(), scan.instance_classes.end()),
      scan.instance_classes.end());
  return scan;
}

std::vector<MislabelFinding> instance_only_findings(const InstanceScan& scan) {
  std::vector<MislabelFinding> out;
  for (const auto& [k, cell] : scan.cells) {
    if (cell.size() == 0) {
      out.push_back({cell.image_id, cell.class_id, k,
                     MislabelReason::kPresentInInstanceOnly});
    }
  }
  return out;
}

double summed_iou(std::span<const InstanceCell> cells, std::span<const double> fp,
                  std::vector<double>& iou) {
  iou.resize(cells.size());
  double total = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double denom = static_cast<double>(cells[k].size()) + fp[k];
    iou[k] = denom > 0.0 ? static_cast<double>(cells[k].tp) / denom : 0.0;
    total += iou[k];
  }
  return total;
}

void require_sizes(std::span<const InstanceCell> cells) {
  if (cells.empty()) throw std::invalid_argument("instance group is empty");
  for (const InstanceCell& c : cells) {
    if (c.size() < 1) {
      throw std::invalid_argument("instance " + std::to_string(c.instance_id) +
                                  " has no ground-truth pixels");
    }
  }
}

}  // namespace

std::vector<MislabelFinding> image_only_findings(const std::string& image_id,
                                                 const std::vector<bool>& gt_present,
                                                 std::span<const ClassId> instance_classes,
                                                 const ClassMask& thing_classes) {
  std::vector<MislabelFinding> out;
  for (ClassId c = 0; c < gt_present.size(); ++c) {
    if (!gt_present[c] || !is_thing(thing_classes, c)) continue;
    if (std::binary_search(instance_classes.begin(), instance_classes.end(), c)) continue;
    out.push_back({image_id, c, std::nullopt, MislabelReason::kPresentInImageOnly});
  }
  return out;
}

InstanceExtraction extract_instance_cells(const std::string& image_id, const LabelMap& gt,
                                          const LabelMap& pred, const InstanceMap& inst,
                                          ClassId num_classes, const ClassMask& thing_classes) {
  if (!gt.same_shape(pred)) {
    throw ValidationError("image \"" + image_id + "\": ground truth is " + gt.shape_string() +
                          " but prediction is " + pred.shape_string());
  }
  gt.validate(num_classes);
  pred.validate(num_classes);
  InstanceScan scan = scan_instances(image_id, gt, &pred, inst, num_classes);

  InstanceExtraction out;
  out.fp_per_class.assign(num_classes, 0);
  const auto g = gt.labels();
  const auto p = pred.labels();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (gt.is_ignore(g[i]) || pred.is_ignore(p[i])) continue;
    if (p[i] != g[i]) ++out.fp_per_class[p[i]];
  }

  out.findings = instance_only_findings(scan);
  for (auto& f : image_only_findings(image_id, scan.gt_present, scan.instance_classes,
                                     thing_classes)) {
    out.findings.push_back(std::move(f));
  }
  for (auto& [k, cell] : scan.cells) {
    if (cell.size() > 0) out.cells.push_back(std::move(cell));
  }
  out.instance_classes = std::move(scan.instance_classes);
  return out;
}

std::vector<MislabelFinding> find_mislabels(const std::string& image_id, const LabelMap& gt,
                                            const InstanceMap& inst, ClassId num_classes,
                                            const ClassMask& thing_classes) {
  gt.validate(num_classes);
  const InstanceScan scan = scan_instances(image_id, gt, nullptr, inst, num_classes);
  std::vector<MislabelFinding> out = instance_only_findings(scan);
  for (auto& f :
       image_only_findings(image_id, scan.gt_present, scan.instance_classes, thing_classes)) {
    out.push_back(std::move(f));
  }
  return out;
}

ContinuousAllocation distribute_fp_proportional(std::span<const InstanceCell> cells,
                                                double fp) {
  require_sizes(cells);
  Count total_size = 0;
  for (const InstanceCell& c : cells) total_size += c.size();

  ContinuousAllocation out;
  out.fp.reserve(cells.size());
  for (const InstanceCell& c : cells) {
    out.fp.push_back(static_cast<double>(c.size()) / static_cast<double>(total_size) * fp);
  }
  out.total = summed_iou(cells, out.fp, out.iou);
  return out;
}

IntegerAllocation distribute_fp_extremal(std::span<const InstanceCell> cells, Count fp,
                                         Sense sense) {
  require_sizes(cells);
  if (fp < 0) throw std::invalid_argument("negative false-positive count");
  const std::size_t n = cells.size();

  IntegerAllocation out;
  out.fp.assign(n, 0);

  if (fp > 0 && sense == Sense::kMax) {
    // The objective is convex in the allocation, so its maximum over the
    // simplex sits on a vertex. Putting all FP on instance k loses
    // tp_k * F / (s_k * (s_k + F)); keep the vertex with the smallest loss.
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k) {
      const Wide sk = cells[k].size();
      const Wide sb = cells[best].size();
      const Wide lhs = Wide(cells[k].tp) * sb * (sb + fp);
      const Wide rhs = Wide(cells[best].tp) * sk * (sk + fp);
      if (lhs < rhs) best = k;
    }
    out.fp[best] = fp;
  } else if (fp > 0 && n == 1) {
    out.fp[0] = fp;
  } else if (fp > 0) {
    // Separable convex objective: handing out one pixel at a time to the
    // largest marginal decrease tp / (d * (d + 1)), d = s + f, is optimal.
    auto better = [&](std::size_t a, std::size_t b) {
      const Wide da = cells[a].size() + out.fp[a];
      const Wide db = cells[b].size() + out.fp[b];
      const Wide lhs = Wide(cells[a].tp) * db * (db + 1);
      const Wide rhs = Wide(cells[b].tp) * da * (da + 1);
      if (lhs != rhs) return lhs > rhs;
      return a < b;
    };
    auto heap_less = [&](std::size_t a, std::size_t b) { return better(b, a); };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(heap_less)> heap(
        heap_less);
    for (std::size_t k = 0; k < n; ++k) heap.push(k);
    for (Count unit = 0; unit < fp; ++unit) {
      const std::size_t k = heap.top();
      heap.pop();
      ++out.fp[k];
      heap.push(k);
    }
  }

  std::vector<double> fp_real(out.fp.begin(), out.fp.end());
  out.total = summed_iou(cells, fp_real, out.iou);
  return out;
}

ContinuousAllocation distribute_fp_min_continuous(std::span<const InstanceCell> cells,
                                                  double fp) {
  require_sizes(cells);
  if (fp < 0.0) throw std::invalid_argument("negative false-positive count");
  const std::size_t n = cells.size();

  ContinuousAllocation out;
  out.fp.assign(n, 0.0);

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < n; ++k) {
    if (cells[k].tp > 0) active.push_back(k);
  }

  if (fp > 0.0 && active.empty()) {
    // Every instance already scores 0; any feasible split is optimal.
    Count total_size = 0;
    for (const InstanceCell& c : cells) total_size += c.size();
    for (std::size_t k = 0; k < n; ++k) {
      out.fp[k] = static_cast<double>(cells[k].size()) / static_cast<double>(total_size) * fp;
    }
  } else if (fp > 0.0) {
    // Stationarity: tp_k / (s_k + f_k)^2 = lambda on the support, so
    // s_k + f_k = mu * sqrt(tp_k). Instance k joins the support once mu
    // exceeds its breakpoint s_k / sqrt(tp_k).
    auto breakpoint = [&](std::size_t k) {
      return static_cast<double>(cells[k].size()) / std::sqrt(static_cast<double>(cells[k].tp));
    };
    std::stable_sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
      return breakpoint(a) < breakpoint(b);
    });
    double sum_size = 0.0;
    double sum_root = 0.0;
    double mu = 0.0;
    std::size_t support = 0;
    for (std::size_t m = 0; m < active.size(); ++m) {
      sum_size += static_cast<double>(cells[active[m]].size());
      sum_root += std::sqrt(static_cast<double>(cells[active[m]].tp));
      mu = (fp + sum_size) / sum_root;
      support = m + 1;
      if (m + 1 == active.size() || mu <= breakpoint(active[m + 1])) break;
    }
    for (std::size_t m = 0; m < support; ++m) {
      const std::size_t k = active[m];
      out.fp[k] = std::max(
          0.0, mu * std::sqrt(static_cast<double>(cells[k].tp)) -
                   static_cast<double>(cells[k].size()));
    }
  }
  out.total = summed_iou(cells, out.fp, out.iou);
  return out;
}

InstanceScoreSet compute_instance_metrics(std::span<const InstanceGroup> groups,
                                          const ScoreMatrix& sm,
                                          const ClassMask& thing_classes) {
  const std::size_t num_classes = sm.num_classes();
  InstanceScoreSet out;
  out.per_class_units.assign(num_classes, {});
  std::vector<double> sums(num_classes, 0.0);
  std::vector<std::size_t> counts(num_classes, 0);

  for (const InstanceGroup& g : groups) {
    if (g.class_id >= num_classes) {
      throw ValidationError("instance group class " + std::to_string(g.class_id) +
                            " out of range");
    }
    if (!is_thing(thing_classes, g.class_id) || g.cells.empty()) continue;
    const auto prop = distribute_fp_proportional(g.cells, static_cast<double>(g.fp));
    const auto lo = distribute_fp_min_continuous(g.cells, static_cast<double>(g.fp));
    const auto lo_int = distribute_fp_extremal(g.cells, g.fp, Sense::kMin);
    const auto hi = distribute_fp_extremal(g.cells, g.fp, Sense::kMax);
    for (std::size_t k = 0; k < g.cells.size(); ++k) {
      out.scores.push_back({g.image_id, g.class_id, g.cells[k].instance_id, prop.iou[k],
                            lo.iou[k], lo_int.iou[k], hi.iou[k]});
      sums[g.class_id] += prop.iou[k];
      ++counts[g.class_id];
      out.per_class_units[g.class_id].push_back(prop.iou[k]);
    }
  }

  out.per_class_k.reserve(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (is_thing(thing_classes, static_cast<ClassId>(c))) {
      if (counts[c] == 0) {
        out.per_class_k.push_back(Score::null());
        out.notes.push_back("thing class " + std::to_string(c) +
                            " has no instances in the dataset");
      } else {
        out.per_class_k.push_back(
            Score::of(std::min(1.0, sums[c] / static_cast<double>(counts[c]))));
      }
    } else {
      const std::vector<Score> col = sm.column(c);
      out.per_class_k.push_back(mean_of_values(col));
      for (const Score& s : col) {
        if (s.has_value()) out.per_class_units[c].push_back(s.value());
      }
    }
  }
  const Score miou = mean_of_values(out.per_class_k);
  if (miou.is_null()) throw Error("no scorable content for instance-level metrics");
  out.miou_k = miou.value();
  return out;
}

}  // namespace segmetrics
