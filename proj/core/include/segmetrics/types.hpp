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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace segmetrics {

using ClassId = std::uint32_t;
using InstanceId = std::uint32_t;
// 64-bit so that dataset-wide sums over large high-resolution datasets never
// overflow.
using Count = std::int64_t;

inline constexpr ClassId kDefaultIgnoreId = 255;

// Error hierarchy. The CLI maps ValidationError/ParseError to exit code 1 and
// IoError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Per-pixel class ids for one image, row-major. Pixels equal to the ignore
/// id are excluded from every count.
class LabelMap {
 public:
  LabelMap(std::uint32_t width, std::uint32_t height,
           std::vector<ClassId> labels,
           std::optional<ClassId> ignore_id = kDefaultIgnoreId);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::size_t size() const { return labels_.size(); }
  std::span<const ClassId> labels() const { return labels_; }
  std::optional<ClassId> ignore_id() const { return ignore_id_; }

  ClassId at(std::uint32_t x, std::uint32_t y) const {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  bool is_ignore(ClassId label) const {
    return ignore_id_.has_value() && label == *ignore_id_;
  }
  bool same_shape(const LabelMap& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  // Throws ValidationError naming the first pixel whose non-ignore label is
  // >= num_classes.
  void validate(ClassId num_classes) const;

  std::string shape_string() const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<ClassId> labels_;
  std::optional<ClassId> ignore_id_;
};

/// Per-pixel instance ids (0 = no instance) plus the class of each instance.
class InstanceMap {
 public:
  InstanceMap(std::uint32_t width, std::uint32_t height,
              std::vector<InstanceId> instance_ids,
              std::map<InstanceId, ClassId> instance_classes);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::span<const InstanceId> instance_ids() const { return instance_ids_; }
  const std::map<InstanceId, ClassId>& instance_classes() const {
    return instance_classes_;
  }
  bool empty() const { return instance_classes_.empty(); }

  friend bool operator==(const InstanceMap&, const InstanceMap&) = default;

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<InstanceId> instance_ids_;
  std::map<InstanceId, ClassId> instance_classes_;
};

struct ConfusionCell {
  Count tp = 0;
  Count fp = 0;
  Count fn = 0;

  ConfusionCell& operator+=(const ConfusionCell& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCell&, const ConfusionCell&) = default;
};

/// A score in [0, 1] or NULL. There is no implicit conversion to double: an
/// aggregation has to decide explicitly what to do with NULL.
class Score {
 public:
  static Score null() { return Score(); }
  // Throws std::invalid_argument when v is outside [0, 1].
  static Score of(double v);

  bool is_null() const { return !value_.has_value(); }
  bool has_value() const { return value_.has_value(); }
  // Throws std::bad_optional_access on NULL.
  double value() const { return value_.value(); }
  const std::optional<double>& optional() const { return value_; }

  friend bool operator==(const Score&, const Score&) = default;

 private:
  Score() = default;
  explicit Score(double v) : value_(v) {}
  std::optional<double> value_;
};

/// Mean of the non-NULL scores; NULL when every entry is NULL.
Score mean_of_values(std::span<const Score> scores);

/// I x C grid of per-image-per-class scores, row-major by image.
class ScoreMatrix {
 public:
  ScoreMatrix() : ScoreMatrix(std::size_t{0}, std::size_t{0}) {}
  ScoreMatrix(std::size_t num_images, std::size_t num_classes);
  ScoreMatrix(std::vector<std::string> image_ids, std::size_t num_classes);

  std::size_t num_images() const { return num_images_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<std::string>& image_ids() const { return image_ids_; }

  const Score& at(std::size_t image, std::size_t cls) const {
    return entries_[image * num_classes_ + cls];
  }
  void set(std::size_t image, std::size_t cls, Score s) {
    entries_[image * num_classes_ + cls] = s;
  }
  std::span<const Score> row(std::size_t image) const {
    return std::span<const Score>(entries_).subspan(image * num_classes_,
                                                    num_classes_);
  }
  std::vector<Score> column(std::size_t cls) const;

 private:
  std::size_t num_images_;
  std::size_t num_classes_;
  std::vector<std::string> image_ids_;
  std::vector<Score> entries_;
};

enum class NullSemantics { kOurs, kCsurka };

const char* to_string(NullSemantics s);
// Accepts "ours" / "csurka"; throws ParseError otherwise.
NullSemantics parse_null_semantics(const std::string& s);

}  // namespace segmetrics
