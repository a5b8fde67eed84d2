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

#include "segmetrics/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "segmetrics/worst_case.hpp"

namespace segmetrics {

HistogramReport histogram(std::span<const Score> iou_i_scores, int num_bins) {
  if (num_bins < 1) throw ValidationError("histogram needs at least one bin");
  std::vector<double> v = non_null_values(iou_i_scores);
  if (v.size() < 2) {
    throw ValidationError("histogram needs at least two scored images, got " +
                          std::to_string(v.size()));
  }
  for (double& x : v) x *= 100.0;

  HistogramReport h;
  h.bin_edges.resize(static_cast<std::size_t>(num_bins) + 1);
  for (int b = 0; b <= num_bins; ++b) h.bin_edges[b] = 100.0 * b / num_bins;
  h.counts.assign(num_bins, 0);
  for (double x : v) {
    auto b = static_cast<int>(std::floor(x / 100.0 * num_bins));
    ++h.counts[std::clamp(b, 0, num_bins - 1)];
  }

  const double n = static_cast<double>(v.size());
  h.min = *std::min_element(v.begin(), v.end());
  h.max = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  h.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - h.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  h.std = std::sqrt(m2);
  // Relative threshold: constant inputs can leave round-off in m2.
  if (m2 <= 1e-24 * std::max(1.0, h.mean * h.mean)) {
    h.std = 0.0;
    h.degenerate = true;
    return h;
  }
  h.skew = m3 / std::pow(m2, 1.5);
  h.kurtosis = m4 / (m2 * m2) - 3.0;
  return h;
}

std::vector<RankedImage> rank_worst_images(const FineMetricReport& fine, std::size_t top_n) {
  if (top_n < 1) throw ValidationError("top_n must be >= 1");
  const auto& ids = fine.score_matrix.image_ids();
  std::vector<RankedImage> all;
  for (std::size_t i = 0; i < fine.iou_i_per_image.size(); ++i) {
    const Score& s = fine.iou_i_per_image[i];
    if (s.has_value()) all.push_back({ids[i], s.value()});
  }
  auto order = [](const RankedImage& a, const RankedImage& b) {
    if (a.iou_i != b.iou_i) return a.iou_i < b.iou_i;
    return a.image_id < b.image_id;
  };
  const std::size_t n = std::min(top_n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), order);
  all.resize(n);
  return all;
}

ImbalanceReport size_imbalance(std::span<const InstanceCell> instances,
                               const std::map<ClassId, std::string>& groups,
                               ClassId num_classes) {
  struct Range {
    Count lo = 0;
    Count hi = 0;
  };
  std::vector<std::optional<Range>> dataset(num_classes);
  std::map<std::pair<std::string, ClassId>, Range> per_image;

  for (const InstanceCell& cell : instances) {
    if (cell.class_id >= num_classes) {
      throw ValidationError("instance class " + std::to_string(cell.class_id) + " out of range");
    }
    const Count s = cell.size();
    if (s < 1) throw ValidationError("instance sizes must be >= 1");
    auto& d = dataset[cell.class_id];
    if (!d) {
      d = Range{s, s};
    } else {
      d->lo = std::min(d->lo, s);
      d->hi = std::max(d->hi, s);
    }
    auto [it, inserted] = per_image.try_emplace({cell.image_id, cell.class_id}, Range{s, s});
    if (!inserted) {
      it->second.lo = std::min(it->second.lo, s);
      it->second.hi = std::max(it->second.hi, s);
    }
  }

  ImbalanceReport r;
  r.r_d.assign(num_classes, std::nullopt);
  r.r_i.assign(num_classes, std::nullopt);
  for (ClassId c = 0; c < num_classes; ++c) {
    if (dataset[c]) {
      r.r_d[c] = static_cast<double>(dataset[c]->hi) / static_cast<double>(dataset[c]->lo);
    }
  }
  for (const auto& [key, range] : per_image) {
    const double ratio = static_cast<double>(range.hi) / static_cast<double>(range.lo);
    auto& ri = r.r_i[key.second];
    ri = ri ? std::max(*ri, ratio) : ratio;
  }

  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& [cls, tag] : groups) {
    if (cls >= num_classes || !r.r_d[cls]) continue;
    auto& [sum, n] = acc[tag];
    sum += std::log(*r.r_d[cls] / *r.r_i[cls]);
    ++n;
  }
  for (const auto& [tag, sn] : acc) {
    r.mean_log_ratio_by_group[tag] = sn.first / static_cast<double>(sn.second);
  }
  return r;
}

CoverageReport coverage_from_counts(std::span<const std::size_t> distinct_per_image,
                                    ClassId num_classes) {
  if (distinct_per_image.empty()) throw ValidationError("coverage needs at least one image");
  if (num_classes < 1) throw ValidationError("coverage needs at least one class");
  const double n = static_cast<double>(distinct_per_image.size());
  std::vector<double> pct;
  pct.reserve(distinct_per_image.size());
  double sum = 0.0;
  for (std::size_t k : distinct_per_image) {
    pct.push_back(100.0 * static_cast<double>(k) / static_cast<double>(num_classes));
    sum += pct.back();
  }
  CoverageReport r;
  r.mean_coverage_pct = sum / n;
  double var = 0.0;
  for (double p : pct) var += (p - r.mean_coverage_pct) * (p - r.mean_coverage_pct);
  const double stddev = std::sqrt(var / n);
  r.normalized_std_pct = r.mean_coverage_pct > 0.0 ? stddev / r.mean_coverage_pct * 100.0 : 0.0;
  return r;
}

CoverageReport coverage(std::span<const LabelMap> gt_maps, ClassId num_classes) {
  std::vector<std::size_t> distinct;
  distinct.reserve(gt_maps.size());
  for (const LabelMap& gt : gt_maps) {
    std::vector<bool> seen(num_classes, false);
    for (ClassId v : gt.labels()) {
      if (!gt.is_ignore(v) && v < num_classes) seen[v] = true;
    }
    distinct.push_back(static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true)));
  }
  return coverage_from_counts(distinct, num_classes);
}

}  // namespace segmetrics
