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

#include "segmetrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"
#include "segmetrics/confusion.hpp"
#include "segmetrics/io.hpp"

namespace segmetrics {
namespace {

using Json = nlohmann::ordered_json;

struct LoadedImage {
  ImageConfusion confusion;
  std::optional<InstanceExtraction> instances;
};

// Rethrows the active exception with the image id prepended, keeping its
// category so the CLI exit code is preserved.
[[noreturn]] void rethrow_with_context(const std::string& image_id) {
  const std::string prefix = "image \"" + image_id + "\": ";
  try {
    throw;
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const ParseError& e) {
    throw ParseError(prefix + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  } catch (const std::exception& e) {
    throw Error(prefix + e.what());
  }
}

void require_valid(const DatasetManifest& manifest, const ValidateOptions& options) {
  const auto findings = validate_manifest(manifest, options);
  if (findings.empty()) return;
  std::string msg = "manifest validation failed:";
  for (const auto& f : findings) {
    msg += "\n  [" + f.rule + "]" + (f.entry.empty() ? "" : " " + f.entry) + ": " + f.message;
  }
  // Missing inputs are an I/O failure, not a malformed manifest.
  const bool only_missing = std::all_of(findings.begin(), findings.end(),
                                        [](const ValidationFinding& f) { return f.rule == "missing_file"; });
  if (only_missing) throw IoError(msg);
  throw ValidationError(msg);
}

std::vector<LoadedImage> load_all(const DatasetManifest& m, bool use_instances,
                                  std::size_t jobs) {
  std::vector<LoadedImage> out(m.entries.size());
  parallel_for(m.entries.size(), jobs, [&](std::size_t i) {
    const ManifestEntry& e = m.entries[i];
    try {
      const LabelMap gt = load_label_map(m.resolve(e.gt), m.num_classes, m.ignore_id);
      const LabelMap pred = load_label_map(m.resolve(*e.pred), m.num_classes, m.ignore_id);
      out[i].confusion = confuse_image(e.id, gt, pred, m.num_classes);
      if (use_instances && e.instances) {
        const InstanceMap inst = load_instance_map(m.resolve(*e.instances), m.instance_encoding);
        out[i].instances = extract_instance_cells(e.id, gt, pred, inst, m.num_classes, {});
      }
    } catch (...) {
      rethrow_with_context(e.id);
    }
  });
  return out;
}

ClassMask make_mask(ClassId num_classes, const std::vector<ClassId>& classes) {
  ClassMask mask(num_classes, false);
  for (ClassId c : classes) {
    if (c < num_classes) mask[c] = true;
  }
  return mask;
}

std::vector<bool> gt_presence(const ImageConfusion& ic) {
  std::vector<bool> present(ic.cells.size());
  for (std::size_t c = 0; c < ic.cells.size(); ++c) present[c] = ic.cells[c].tp + ic.cells[c].fn > 0;
  return present;
}

std::vector<std::vector<double>> columns_of(const ScoreMatrix& sm) {
  std::vector<std::vector<double>> out(sm.num_classes());
  for (std::size_t c = 0; c < sm.num_classes(); ++c) out[c] = non_null_values(sm.column(c));
  return out;
}

double round_to(double v, double scale) { return std::round(v * scale) / scale; }

Json pct(double fraction) { return round_to(fraction * 100.0, 100.0); }

Json pct(const Score& s) { return s.is_null() ? Json(nullptr) : pct(s.value()); }

Json opt_ratio(const std::optional<double>& v) {
  return v ? Json(round_to(*v, 1e4)) : Json(nullptr);
}

std::string pct_field(const Score& s) {
  if (s.is_null()) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", round_to(s.value() * 100.0, 100.0));
  return buf;
}

std::string pct_field(double v) { return pct_field(Score::of(std::clamp(v, 0.0, 1.0))); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

Json quantile_json(const QuantileReport& q) {
  Json j = Json::object();
  for (const auto& [k, v] : q.miou_q) j["q" + std::to_string(k)] = pct(v);
  j["qbar"] = pct(q.miou_qbar);
  return j;
}

Json histogram_json(const HistogramReport& h) {
  Json edges = Json::array();
  for (double e : h.bin_edges) edges.push_back(round_to(e, 1e6));
  return Json{{"edges", edges},
              {"counts", h.counts},
              {"stats",
               {{"min", round_to(h.min, 1e4)},
                {"max", round_to(h.max, 1e4)},
                {"mean", round_to(h.mean, 1e4)},
                {"std", round_to(h.std, 1e4)},
                {"skew", round_to(h.skew, 1e4)},
                {"kurtosis", round_to(h.kurtosis, 1e4)}}},
              {"degenerate", h.degenerate}};
}

}  // namespace

MetricReport run_compute(const DatasetManifest& manifest, const std::string& manifest_path,
                         const ComputeOptions& options) {
  require_valid(manifest, {.check_paths = true, .require_predictions = true});
  const ClassId num_classes = manifest.num_classes;

  MetricReport r;
  r.manifest_path = manifest_path;
  r.semantics = options.semantics.value_or(manifest.null_semantics);
  r.num_classes = num_classes;
  r.class_names = manifest.class_names;

  std::vector<LoadedImage> images = load_all(manifest, options.use_instances, options.jobs);

  ConfusionAccumulator acc(num_classes);
  std::vector<std::size_t> distinct;
  distinct.reserve(images.size());
  for (LoadedImage& img : images) {
    const auto present = gt_presence(img.confusion);
    distinct.push_back(static_cast<std::size_t>(std::count(present.begin(), present.end(), true)));
    acc.add(img.confusion);
  }
  const DatasetConfusion dc = std::move(acc).finish();

  r.pixel = compute_pixel_metrics(dc);
  r.fine = compute_fine_metrics(build_score_matrix(dc, manifest.mode, r.semantics));
  for (const auto& id : r.fine.excluded_images) {
    r.warnings.push_back("image \"" + id + "\" has no scorable class and is left out of mIoU^I");
  }

  r.worst_case_i = quantile_suite({non_null_values(r.fine.iou_i_per_image)});
  r.worst_case_c = quantile_suite(columns_of(r.fine.score_matrix));
  if (non_null_values(r.fine.iou_i_per_image).size() >= 2) {
    r.histogram = histogram(r.fine.iou_i_per_image, options.bins);
  } else {
    r.warnings.push_back("fewer than two scored images; histogram skipped");
  }
  r.worst_images = rank_worst_images(r.fine, std::max<std::size_t>(1, options.top_worst));
  r.coverage = coverage_from_counts(distinct, num_classes);

  // Instance level.
  std::vector<ClassId> things;
  if (manifest.thing_classes) {
    things = *manifest.thing_classes;
  } else {
    std::set<ClassId> seen;
    for (const LoadedImage& img : images) {
      if (img.instances) seen.insert(img.instances->instance_classes.begin(),
                                     img.instances->instance_classes.end());
    }
    things.assign(seen.begin(), seen.end());
  }
  const bool any_instances = std::any_of(images.begin(), images.end(),
                                         [](const LoadedImage& i) { return i.instances.has_value(); });
  if (!options.use_instances || !any_instances) return r;

  const ClassMask mask = make_mask(num_classes, things);
  std::vector<InstanceGroup> groups;
  std::vector<InstanceCell> sizes;
  for (const LoadedImage& img : images) {
    const std::string& id = img.confusion.image_id;
    if (!img.instances) continue;
    const InstanceExtraction& ex = *img.instances;
    for (const auto& f : ex.findings) r.audit.push_back(f);
    for (auto& f : image_only_findings(id, gt_presence(img.confusion), ex.instance_classes, mask)) {
      r.audit.push_back(std::move(f));
    }
    for (ClassId c = 0; c < num_classes; ++c) {
      if (!mask[c]) continue;
      InstanceGroup g{id, c, {}, ex.fp_per_class[c]};
      for (const InstanceCell& cell : ex.cells) {
        if (cell.class_id == c) g.cells.push_back(cell);
      }
      if (!g.cells.empty()) groups.push_back(std::move(g));
    }
  }
  r.instance = compute_instance_metrics(groups, r.fine.score_matrix, mask);
  r.instance->audit_findings = r.audit;
  for (const auto& note : r.instance->notes) r.warnings.push_back(note);
  r.worst_case_k = quantile_suite(r.instance->per_class_units);

  // Size ratios: true instances for thing classes; for the other classes the
  // whole per-image region acts as a single instance.
  std::map<ClassId, std::string> tags;
  for (ClassId c = 0; c < num_classes; ++c) tags[c] = mask[c] ? "thing" : "stuff";
  for (const InstanceGroup& g : groups) sizes.insert(sizes.end(), g.cells.begin(), g.cells.end());
  for (const ImageConfusion& ic : dc.per_image) {
    for (ClassId c = 0; c < num_classes; ++c) {
      if (mask[c] || ic.cells[c].tp + ic.cells[c].fn == 0) continue;
      sizes.push_back({ic.image_id, c, 0, ic.cells[c].tp, ic.cells[c].fn});
    }
  }
  r.imbalance = size_imbalance(sizes, tags, num_classes);
  return r;
}

std::vector<MislabelFinding> run_audit(const DatasetManifest& m, std::size_t jobs) {
  require_valid(m, {.check_paths = true, .require_predictions = false});

  struct Scan {
    std::vector<MislabelFinding> instance_only;
    std::vector<bool> gt_present;
    std::vector<ClassId> instance_classes;
    bool has_instances = false;
  };
  std::vector<Scan> scans(m.entries.size());
  parallel_for(m.entries.size(), jobs, [&](std::size_t i) {
    const ManifestEntry& e = m.entries[i];
    if (!e.instances) return;
    try {
      const LabelMap gt = load_label_map(m.resolve(e.gt), m.num_classes, m.ignore_id);
      const InstanceMap inst = load_instance_map(m.resolve(*e.instances), m.instance_encoding);
      Scan& s = scans[i];
      s.has_instances = true;
      s.instance_only = find_mislabels(e.id, gt, inst, m.num_classes, {});
      s.gt_present.assign(m.num_classes, false);
      for (ClassId v : gt.labels()) {
        if (!gt.is_ignore(v)) s.gt_present[v] = true;
      }
      std::set<ClassId> cls;
      for (InstanceId k : inst.instance_ids()) {
        if (k != 0) cls.insert(inst.instance_classes().at(k));
      }
      s.instance_classes.assign(cls.begin(), cls.end());
    } catch (...) {
      rethrow_with_context(e.id);
    }
  });

  std::vector<ClassId> things;
  if (m.thing_classes) {
    things = *m.thing_classes;
  } else {
    std::set<ClassId> seen;
    for (const Scan& s : scans) seen.insert(s.instance_classes.begin(), s.instance_classes.end());
    things.assign(seen.begin(), seen.end());
  }
  const ClassMask mask = make_mask(m.num_classes, things);

  std::vector<MislabelFinding> out;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    if (!scans[i].has_instances) continue;
    for (auto& f : scans[i].instance_only) out.push_back(std::move(f));
    for (auto& f : image_only_findings(m.entries[i].id, scans[i].gt_present,
                                       scans[i].instance_classes, mask)) {
      out.push_back(std::move(f));
    }
  }
  return out;
}

HistogramReport run_histogram(const DatasetManifest& manifest, const ComputeOptions& options) {
  require_valid(manifest, {.check_paths = true, .require_predictions = true});
  std::vector<LoadedImage> images = load_all(manifest, false, options.jobs);
  std::vector<ImageConfusion> confusions;
  confusions.reserve(images.size());
  for (auto& img : images) confusions.push_back(std::move(img.confusion));
  const DatasetConfusion dc = accumulate(std::move(confusions), manifest.num_classes);
  const FineMetricReport fine = compute_fine_metrics(build_score_matrix(
      dc, manifest.mode, options.semantics.value_or(manifest.null_semantics)));
  return histogram(fine.iou_i_per_image, options.bins);
}

std::string report_to_json(const MetricReport& r) {
  Json metrics = Json::object();
  metrics["acc"] = pct(r.pixel.acc);
  metrics["macc"] = pct(r.pixel.macc);
  metrics["miou_d"] = pct(r.pixel.miou_d);
  metrics["miou_i"] = pct(r.fine.miou_i);
  metrics["miou_c"] = pct(r.fine.miou_c);
  metrics["miou_k"] = r.instance ? pct(r.instance->miou_k) : Json(nullptr);
  auto add_worst = [&metrics](const std::string& prefix, const QuantileReport* q) {
    metrics[prefix + "_qbar"] = q ? pct(q->miou_qbar) : Json(nullptr);
    metrics[prefix + "_q5"] = q ? pct(q->miou_q.at(5)) : Json(nullptr);
    metrics[prefix + "_q1"] = q ? pct(q->miou_q.at(1)) : Json(nullptr);
  };
  add_worst("miou_i", &r.worst_case_i);
  add_worst("miou_c", &r.worst_case_c);
  add_worst("miou_k", r.worst_case_k ? &*r.worst_case_k : nullptr);

  Json per_class = Json::array();
  for (ClassId c = 0; c < r.num_classes; ++c) {
    Json row = Json::object();
    row["id"] = c;
    row["name"] = r.class_names[c];
    row["acc"] = pct(r.pixel.class_acc[c]);
    row["iou_d"] = pct(r.pixel.iou_d[c]);
    row["iou_c"] = pct(r.fine.iou_c_per_class[c]);
    row["iou_k"] = r.instance ? pct(r.instance->per_class_k[c]) : Json(nullptr);
    row["images"] = r.fine.image_class_counts[c];
    row["iou_c_qbar"] = pct(r.worst_case_c.per_class_qbar[c]);
    row["iou_c_q5"] = pct(r.worst_case_c.per_class_q.at(5)[c]);
    row["iou_c_q1"] = pct(r.worst_case_c.per_class_q.at(1)[c]);
    if (r.imbalance) {
      row["r_d"] = opt_ratio(r.imbalance->r_d[c]);
      row["r_i"] = opt_ratio(r.imbalance->r_i[c]);
    }
    per_class.push_back(std::move(row));
  }

  Json images = Json::array();
  for (std::size_t i = 0; i < r.fine.iou_i_per_image.size(); ++i) {
    images.push_back({{"id", r.fine.score_matrix.image_ids()[i]},
                      {"iou_i", pct(r.fine.iou_i_per_image[i])}});
  }

  Json worst = Json::array();
  for (std::size_t k = 0; k < r.worst_images.size(); ++k) {
    worst.push_back({{"rank", k + 1},
                     {"image_id", r.worst_images[k].image_id},
                     {"iou_i", pct(r.worst_images[k].iou_i)}});
  }

  Json analysis = Json::object();
  analysis["histogram"] = r.histogram ? histogram_json(*r.histogram) : Json(nullptr);
  analysis["worst_images"] = std::move(worst);
  analysis["coverage"] = {{"mean_pct", round_to(r.coverage.mean_coverage_pct, 100.0)},
                          {"normalized_std_pct", round_to(r.coverage.normalized_std_pct, 100.0)}};
  if (r.imbalance) {
    Json groups = Json::object();
    for (const auto& [tag, v] : r.imbalance->mean_log_ratio_by_group) groups[tag] = round_to(v, 1e4);
    analysis["mean_log_size_ratio"] = std::move(groups);
  } else {
    analysis["mean_log_size_ratio"] = nullptr;
  }

  Json audit = Json::array();
  for (const MislabelFinding& f : r.audit) {
    audit.push_back({{"image_id", f.image_id},
                     {"class", r.class_names[f.class_id]},
                     {"instance_id", f.instance_id ? Json(*f.instance_id) : Json(nullptr)},
                     {"reason", static_cast<int>(f.reason)}});
  }

  Json doc = Json::object();
  doc["provenance"] = {{"manifest", r.manifest_path},
                       {"semantics", to_string(r.semantics)},
                       {"version", kVersion},
                       {"num_images", r.fine.score_matrix.num_images()},
                       {"num_classes", r.num_classes}};
  doc["metrics"] = std::move(metrics);
  doc["worst_case"] = {{"i", quantile_json(r.worst_case_i)},
                       {"c", quantile_json(r.worst_case_c)},
                       {"k", r.worst_case_k ? quantile_json(*r.worst_case_k) : Json(nullptr)}};
  doc["per_class"] = std::move(per_class);
  doc["images"] = std::move(images);
  doc["analysis"] = std::move(analysis);
  doc["audit"] = std::move(audit);
  doc["warnings"] = r.warnings;
  return doc.dump(2) + "\n";
}

std::string histogram_to_json(const HistogramReport& h) { return histogram_json(h).dump(2) + "\n"; }

std::string score_matrix_csv(const ScoreMatrix& sm) {
  std::ostringstream out;
  out << "image_id";
  for (std::size_t c = 0; c < sm.num_classes(); ++c) out << ",class_" << c;
  out << "\n";
  for (std::size_t i = 0; i < sm.num_images(); ++i) {
    out << csv_escape(sm.image_ids()[i]);
    for (std::size_t c = 0; c < sm.num_classes(); ++c) out << "," << pct_field(sm.at(i, c));
    out << "\n";
  }
  return out.str();
}

std::string per_class_csv(const MetricReport& r) {
  std::ostringstream out;
  out << "class_id,name,acc,iou_d,iou_c,iou_k,images,iou_c_qbar,iou_c_q5,iou_c_q1\n";
  for (ClassId c = 0; c < r.num_classes; ++c) {
    out << c << "," << csv_escape(r.class_names[c]) << "," << pct_field(r.pixel.class_acc[c]) << ","
        << pct_field(r.pixel.iou_d[c]) << "," << pct_field(r.fine.iou_c_per_class[c]) << ","
        << (r.instance ? pct_field(r.instance->per_class_k[c]) : "") << ","
        << r.fine.image_class_counts[c] << "," << pct_field(r.worst_case_c.per_class_qbar[c])
        << "," << pct_field(r.worst_case_c.per_class_q.at(5)[c]) << ","
        << pct_field(r.worst_case_c.per_class_q.at(1)[c]) << "\n";
  }
  return out.str();
}

std::string audit_csv(const std::vector<MislabelFinding>& findings,
                      const std::vector<std::string>& class_names) {
  std::ostringstream out;
  out << "image_id,class,instance_id,reason\n";
  for (const MislabelFinding& f : findings) {
    const std::string cls =
        f.class_id < class_names.size() ? class_names[f.class_id] : std::to_string(f.class_id);
    out << csv_escape(f.image_id) << "," << csv_escape(cls) << ","
        << (f.instance_id ? std::to_string(*f.instance_id) : "") << ","
        << static_cast<int>(f.reason) << "\n";
  }
  return out.str();
}

std::string worst_images_csv(const std::vector<RankedImage>& ranked) {
  std::ostringstream out;
  out << "rank,image_id,iou_i\n";
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    out << k + 1 << "," << csv_escape(ranked[k].image_id) << "," << pct_field(ranked[k].iou_i)
        << "\n";
  }
  return out.str();
}

std::string instance_scores_csv(const InstanceScoreSet& s,
                                const std::vector<std::string>& class_names) {
  std::ostringstream out;
  out << "image_id,class,instance_id,proportional,lower,lower_integer,upper\n";
  for (const InstanceScore& x : s.scores) {
    out << csv_escape(x.image_id) << "," << csv_escape(class_names.at(x.class_id)) << ","
        << x.instance_id << "," << pct_field(x.proportional) << "," << pct_field(x.lower) << ","
        << pct_field(x.lower_integer) << "," << pct_field(x.upper) << "\n";
  }
  return out.str();
}

}  // namespace segmetrics
