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

#include "segmetrics/types.hpp"

#include <string>
#include <utility>

namespace segmetrics {

LabelMap::LabelMap(std::uint32_t width, std::uint32_t height,
                   std::vector<ClassId> labels, std::optional<ClassId> ignore_id)
    : width_(width), height_(height), labels_(std::move(labels)), ignore_id_(ignore_id) {
  if (static_cast<std::size_t>(width_) * height_ == 0) {
    throw ValidationError("label map must have at least one pixel");
  }
  if (labels_.size() != static_cast<std::size_t>(width_) * height_) {
    throw ValidationError("label map payload has " + std::to_string(labels_.size()) +
                          " pixels, expected " + shape_string());
  }
}

void LabelMap::validate(ClassId num_classes) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const ClassId v = labels_[i];
    if (v >= num_classes && !is_ignore(v)) {
      throw ValidationError("label " + std::to_string(v) + " at (x=" +
                            std::to_string(i % width_) + ", y=" +
                            std::to_string(i / width_) + ") is out of range for " +
                            std::to_string(num_classes) + " classes");
    }
  }
}

std::string LabelMap::shape_string() const {
  return std::to_string(width_) + "x" + std::to_string(height_);
}

InstanceMap::InstanceMap(std::uint32_t width, std::uint32_t height,
                         std::vector<InstanceId> instance_ids,
                         std::map<InstanceId, ClassId> instance_classes)
    : width_(width),
      height_(height),
      instance_ids_(std::move(instance_ids)),
      instance_classes_(std::move(instance_classes)) {
  if (instance_ids_.size() != static_cast<std::size_t>(width_) * height_) {
    throw ValidationError("instance map payload does not match " +
                          std::to_string(width_) + "x" + std::to_string(height_));
  }
  for (InstanceId id : instance_ids_) {
    if (id != 0 && !instance_classes_.contains(id)) {
      throw ValidationError("instance id " + std::to_string(id) +
                            " has no class entry");
    }
  }
}

Score Score::of(double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("score " + std::to_string(v) + " outside [0, 1]");
  }
  return Score(v);
}

Score mean_of_values(std::span<const Score> scores) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const Score& s : scores) {
    if (s.has_value()) {
      sum += s.value();
      ++n;
    }
  }
  if (n == 0) return Score::null();
  // Clamp guards the last-ulp excursion of a mean of values equal to 1.
  const double m = sum / static_cast<double>(n);
  return Score::of(m > 1.0 ? 1.0 : m);
}

ScoreMatrix::ScoreMatrix(std::size_t num_images, std::size_t num_classes)
    : num_images_(num_images),
      num_classes_(num_classes),
      entries_(num_images * num_classes, Score::null()) {
  image_ids_.reserve(num_images);
  for (std::size_t i = 0; i < num_images; ++i) image_ids_.push_back(std::to_string(i));
}

ScoreMatrix::ScoreMatrix(std::vector<std::string> image_ids, std::size_t num_classes)
    : num_images_(image_ids.size()),
      num_classes_(num_classes),
      image_ids_(std::move(image_ids)),
      entries_(num_images_ * num_classes, Score::null()) {}

std::vector<Score> ScoreMatrix::column(std::size_t cls) const {
  std::vector<Score> out;
  out.reserve(num_images_);
  for (std::size_t i = 0; i < num_images_; ++i) out.push_back(at(i, cls));
  return out;
}

const char* to_string(NullSemantics s) {
  return s == NullSemantics::kOurs ? "ours" : "csurka";
}

NullSemantics parse_null_semantics(const std::string& s) {
  if (s == "ours") return NullSemantics::kOurs;
  if (s == "csurka") return NullSemantics::kCsurka;
  throw ParseError("null_semantics: expected \"ours\" or \"csurka\", got \"" + s + "\"");
}

}  // namespace segmetrics
