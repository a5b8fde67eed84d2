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

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "segmetrics/types.hpp"

namespace segmetrics {

struct MultiClassMode {
  friend bool operator==(const MultiClassMode&, const MultiClassMode&) = default;
};

struct BinaryMode {
  ClassId foreground = 1;
  friend bool operator==(const BinaryMode&, const BinaryMode&) = default;
};

using SegmentationMode = std::variant<MultiClassMode, BinaryMode>;

/// Instance ids come from a grid plus a `<stem>.json` sidecar mapping id to
/// class.
struct SidecarEncoding {
  friend bool operator==(const SidecarEncoding&, const SidecarEncoding&) = default;
};

/// Panoptic-style ids: value = class * divisor + index. Values below the
/// divisor carry no instance.
struct PanopticEncoding {
  std::uint32_t divisor = 1000;
  friend bool operator==(const PanopticEncoding&, const PanopticEncoding&) = default;
};

using InstanceEncoding = std::variant<SidecarEncoding, PanopticEncoding>;

struct ManifestEntry {
  std::string id;
  std::string gt;
  std::optional<std::string> pred;
  std::optional<std::string> instances;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  ClassId num_classes = 0;
  std::vector<std::string> class_names;
  SegmentationMode mode = MultiClassMode{};
  NullSemantics null_semantics = NullSemantics::kOurs;
  std::optional<ClassId> ignore_id = kDefaultIgnoreId;
  // Absent: every class owning an instance somewhere in the dataset is a
  // thing class.
  std::optional<std::vector<ClassId>> thing_classes;
  InstanceEncoding instance_encoding = SidecarEncoding{};
  std::vector<ManifestEntry> entries;

  // Relative entry paths resolve against this directory. Not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& p) const;

  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.num_classes == b.num_classes && a.class_names == b.class_names &&
           a.mode == b.mode && a.null_semantics == b.null_semantics &&
           a.ignore_id == b.ignore_id && a.thing_classes == b.thing_classes &&
           a.instance_encoding == b.instance_encoding && a.entries == b.entries;
  }
};

struct ValidationFinding {
  // Entry id, or empty for manifest-level rules.
  std::string entry;
  std::string rule;
  std::string message;
};

struct ValidateOptions {
  bool check_paths = true;
  bool require_predictions = true;
};

std::vector<ValidationFinding> validate_manifest(
    const DatasetManifest& manifest, const ValidateOptions& options = {});

// Throws ParseError with the offending field (and JSON line/column for syntax
// errors).
DatasetManifest parse_manifest(const std::string& json_text,
                               const std::filesystem::path& base_dir = {});
// Throws IoError when the file cannot be read.
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string serialize_manifest(const DatasetManifest& manifest);

}  // namespace segmetrics
