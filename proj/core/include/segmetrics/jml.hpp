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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace segmetrics::jml {

/// A vector with every component in [0, 1].
class SoftVector {
 public:
  SoftVector() = default;
  // Throws std::invalid_argument for components outside [0, 1].
  explicit SoftVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

// Jaccard metric loss
//
//   JML(x, y) = 1 - (|x + y|_1 - |x - y|_1) / (|x + y|_1 + |x - y|_1)
//
// Both-all-zero inputs give 0. Throws std::invalid_argument on length
// mismatch.
double forward(std::span<const double> x, std::span<const double> y);
double forward(const SoftVector& x, const SoftVector& y);

// Partial derivatives of forward() with respect to x. Coordinates with
// x_i == y_i use the subgradient sign(0) = 0.
std::vector<double> gradient(std::span<const double> x, std::span<const double> y);
std::vector<double> gradient(const SoftVector& x, const SoftVector& y);

// Soft Jaccard loss 1 - <x,y> / (|x| + |y| - <x,y>).
double soft_jaccard(std::span<const double> x, std::span<const double> y);

/// Weights on the dataset, image and class terms.
struct Aggregation {
  double w_d = 1.0;
  double w_i = 0.0;
  double w_c = 0.0;

  // Throws std::invalid_argument unless all weights are >= 0 and sum to 1
  // within 1e-12.
  void validate() const;
};

/// Soft predictions and labels for one image, one vector per class, all of
/// the same length (the image's pixel count).
struct ImageSample {
  std::vector<SoftVector> pred;
  std::vector<SoftVector> label;
};

// w_d * D + w_i * I + w_c * C where
//   D: mean over classes of JML on the class vectors concatenated over all
//      images (classes with no mass in either are skipped);
//   I: mean over images of the mean over present classes;
//   C: mean over classes of the mean over images where the class is present.
// A class is present in an image when its label vector has positive mass.
// Throws std::invalid_argument on empty input or inconsistent shapes.
double dataset_loss(std::span<const ImageSample> images, const Aggregation& agg);

struct CheckOptions {
  std::uint64_t seed = 0;
  std::size_t trials = 100000;
  std::size_t gradient_trials = 1000;
  // Test hook: added to every analytic gradient component.
  double gradient_perturbation = 0.0;
};

struct CheckResult {
  std::string property;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::size_t trials = 0;
};

// Range, symmetry, binary-label equivalence with the soft Jaccard loss,
// triangle inequality and finite-difference gradient agreement.
std::vector<CheckResult> run_checks(const CheckOptions& options);

}  // namespace segmetrics::jml
