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

#include "segmetrics/manifest.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace segmetrics {
namespace {

using nlohmann::json;

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + key + ": missing required field");
  return *it;
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ParseError(field + ": expected string");
  return v.get<std::string>();
}

ClassId as_class_id(const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) throw ParseError(field + ": expected non-negative integer");
  const auto x = v.get<std::uint64_t>();
  if (x > std::numeric_limits<ClassId>::max()) throw ParseError(field + ": value too large");
  return static_cast<ClassId>(x);
}

SegmentationMode parse_mode(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "multiclass") return MultiClassMode{};
    throw ParseError("mode: expected \"multiclass\" or {\"binary\": {...}}");
  }
  if (v.is_object() && v.contains("binary")) {
    const json& b = v.at("binary");
    if (!b.is_object()) throw ParseError("mode.binary: expected object");
    return BinaryMode{as_class_id(require(b, "foreground", "mode.binary."),
                                  "mode.binary.foreground")};
  }
  throw ParseError("mode: expected \"multiclass\" or {\"binary\": {...}}");
}

InstanceEncoding parse_encoding(const json& v) {
  if (v.is_string() && v.get<std::string>() == "sidecar") return SidecarEncoding{};
  if (v.is_object() && v.contains("panoptic")) {
    const json& p = v.at("panoptic");
    PanopticEncoding enc;
    if (p.is_object() && p.contains("divisor")) {
      enc.divisor = as_class_id(p.at("divisor"), "instance_encoding.panoptic.divisor");
    }
    if (enc.divisor == 0) throw ParseError("instance_encoding.panoptic.divisor: must be > 0");
    return enc;
  }
  throw ParseError("instance_encoding: expected \"sidecar\" or {\"panoptic\": {...}}");
}

}  // namespace

std::filesystem::path DatasetManifest::resolve(const std::string& p) const {
  std::filesystem::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path;
  return base_dir / path;
}

std::vector<ValidationFinding> validate_manifest(const DatasetManifest& m,
                                                 const ValidateOptions& options) {
  std::vector<ValidationFinding> out;
  auto add = [&out](std::string entry, std::string rule, std::string message) {
    out.push_back({std::move(entry), std::move(rule), std::move(message)});
  };

  if (m.num_classes < 1) add("", "num_classes", "num_classes must be >= 1");
  if (m.class_names.size() != m.num_classes) {
    add("", "class_names",
        "expected " + std::to_string(m.num_classes) + " class names, got " +
            std::to_string(m.class_names.size()));
  }
  if (const auto* bin = std::get_if<BinaryMode>(&m.mode)) {
    if (m.num_classes < 2) add("", "binary_mode", "binary mode requires num_classes >= 2");
    if (bin->foreground >= m.num_classes) {
      add("", "binary_mode",
          "foreground class " + std::to_string(bin->foreground) + " out of range");
    }
  }
  if (m.ignore_id && *m.ignore_id < m.num_classes) {
    add("", "ignore_id",
        "ignore_id " + std::to_string(*m.ignore_id) + " collides with a class id");
  }
  if (m.thing_classes) {
    for (ClassId c : *m.thing_classes) {
      if (c >= m.num_classes) {
        add("", "thing_classes", "thing class " + std::to_string(c) + " out of range");
      }
    }
  }
  if (m.entries.empty()) add("", "entries", "manifest has no entries");

  std::set<std::string> seen;
  for (const ManifestEntry& e : m.entries) {
    if (e.id.empty()) add(e.id, "entry_id", "entry id must be non-empty");
    if (!seen.insert(e.id).second) add(e.id, "duplicate_id", "duplicate image id \"" + e.id + "\"");
    if (options.require_predictions && !e.pred) {
      add(e.id, "missing_pred", "entry \"" + e.id + "\" has no prediction path");
    }
    if (!options.check_paths) continue;
    auto check = [&](const std::string& p, const char* field) {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(m.resolve(p), ec)) {
        add(e.id, "missing_file",
            std::string(field) + " path \"" + p + "\" of entry \"" + e.id + "\" does not exist");
      }
    };
    check(e.gt, "gt");
    if (e.pred && options.require_predictions) check(*e.pred, "pred");
    if (e.instances) check(*e.instances, "instances");
  }
  return out;
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("manifest is not valid JSON at " + line_column(text, e.byte) + ": " +
                     e.what());
  }
  if (!doc.is_object()) throw ParseError("manifest: expected a JSON object");

  DatasetManifest m;
  m.base_dir = base_dir;
  m.num_classes = as_class_id(require(doc, "num_classes", ""), "num_classes");

  const json& names = require(doc, "class_names", "");
  if (!names.is_array()) throw ParseError("class_names: expected array");
  for (std::size_t i = 0; i < names.size(); ++i) {
    m.class_names.push_back(as_string(names[i], "class_names[" + std::to_string(i) + "]"));
  }

  if (doc.contains("mode")) m.mode = parse_mode(doc.at("mode"));
  if (doc.contains("null_semantics")) {
    m.null_semantics =
        parse_null_semantics(as_string(doc.at("null_semantics"), "null_semantics"));
  }
  if (doc.contains("ignore_id")) {
    const json& ig = doc.at("ignore_id");
    m.ignore_id = ig.is_null() ? std::nullopt
                               : std::optional<ClassId>(as_class_id(ig, "ignore_id"));
  }
  if (doc.contains("thing_classes")) {
    const json& tc = doc.at("thing_classes");
    if (!tc.is_array()) throw ParseError("thing_classes: expected array");
    std::vector<ClassId> things;
    for (std::size_t i = 0; i < tc.size(); ++i) {
      things.push_back(as_class_id(tc[i], "thing_classes[" + std::to_string(i) + "]"));
    }
    m.thing_classes = std::move(things);
  }
  if (doc.contains("instance_encoding")) {
    m.instance_encoding = parse_encoding(doc.at("instance_encoding"));
  }

  const json& entries = require(doc, "entries", "");
  if (!entries.is_array()) throw ParseError("entries: expected array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string where = "entries[" + std::to_string(i) + "].";
    const json& e = entries[i];
    if (!e.is_object()) throw ParseError("entries[" + std::to_string(i) + "]: expected object");
    ManifestEntry entry;
    entry.id = as_string(require(e, "id", where), where + "id");
    entry.gt = as_string(require(e, "gt", where), where + "gt");
    if (e.contains("pred") && !e.at("pred").is_null()) {
      entry.pred = as_string(e.at("pred"), where + "pred");
    }
    if (e.contains("instances") && !e.at("instances").is_null()) {
      entry.instances = as_string(e.at("instances"), where + "instances");
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

std::string serialize_manifest(const DatasetManifest& m) {
  json doc = json::object();
  doc["num_classes"] = m.num_classes;
  doc["class_names"] = m.class_names;
  if (const auto* bin = std::get_if<BinaryMode>(&m.mode)) {
    doc["mode"] = {{"binary", {{"foreground", bin->foreground}}}};
  } else {
    doc["mode"] = "multiclass";
  }
  doc["null_semantics"] = to_string(m.null_semantics);
  doc["ignore_id"] = m.ignore_id ? json(*m.ignore_id) : json(nullptr);
  if (m.thing_classes) doc["thing_classes"] = *m.thing_classes;
  if (const auto* pan = std::get_if<PanopticEncoding>(&m.instance_encoding)) {
    doc["instance_encoding"] = {{"panoptic", {{"divisor", pan->divisor}}}};
  } else {
    doc["instance_encoding"] = "sidecar";
  }
  json entries = json::array();
  for (const ManifestEntry& e : m.entries) {
    json je = {{"id", e.id}, {"gt", e.gt}};
    if (e.pred) je["pred"] = *e.pred;
    if (e.instances) je["instances"] = *e.instances;
    entries.push_back(std::move(je));
  }
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

}  // namespace segmetrics
