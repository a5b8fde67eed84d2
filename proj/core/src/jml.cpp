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

#include "segmetrics/jml.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace segmetrics::jml {
namespace {

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("length mismatch: " + std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()));
  }
}

struct Norms {
  double sum_norm = 0.0;   // |x + y|_1
  double diff_norm = 0.0;  // |x - y|_1
};

Norms norms(std::span<const double> x, std::span<const double> y) {
  Norms n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    n.sum_norm += std::abs(x[i] + y[i]);
    n.diff_norm += std::abs(x[i] - y[i]);
  }
  return n;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

bool has_mass(const SoftVector& v) {
  return std::any_of(v.values().begin(), v.values().end(), [](double a) { return a > 0.0; });
}

}  // namespace

SoftVector::SoftVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("soft vector component " + std::to_string(v) +
                                  " outside [0, 1]");
    }
  }
}

double forward(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  const Norms n = norms(x, y);
  const double denom = n.sum_norm + n.diff_norm;
  if (denom == 0.0) return 0.0;
  return 1.0 - (n.sum_norm - n.diff_norm) / denom;
}

double forward(const SoftVector& x, const SoftVector& y) { return forward(x.values(), y.values()); }

std::vector<double> gradient(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  std::vector<double> g(x.size(), 0.0);
  const Norms n = norms(x, y);
  const double denom = n.sum_norm + n.diff_norm;
  if (denom == 0.0) return g;
  // JML = 2B / (A + B) with A = |x + y|_1, B = |x - y|_1:
  //   dJML/dx_i = 2 (dB_i * A - B * dA_i) / (A + B)^2
  const double scale = 2.0 / (denom * denom);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d_a = sign(x[i] + y[i]);
    const double d_b = sign(x[i] - y[i]);
    g[i] = scale * (d_b * n.sum_norm - n.diff_norm * d_a);
  }
  return g;
}

std::vector<double> gradient(const SoftVector& x, const SoftVector& y) {
  return gradient(x.values(), y.values());
}

double soft_jaccard(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  double inter = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += x[i] * y[i];
    sx += x[i];
    sy += y[i];
  }
  const double uni = sx + sy - inter;
  if (uni == 0.0) return 0.0;
  return 1.0 - inter / uni;
}

void Aggregation::validate() const {
  if (w_d < 0.0 || w_i < 0.0 || w_c < 0.0) {
    throw std::invalid_argument("aggregation weights must be non-negative");
  }
  if (std::abs(w_d + w_i + w_c - 1.0) > 1e-12) {
    throw std::invalid_argument("aggregation weights must sum to 1");
  }
}

double dataset_loss(std::span<const ImageSample> images, const Aggregation& agg) {
  agg.validate();
  if (images.empty()) throw std::invalid_argument("dataset_loss of an empty dataset");
  const std::size_t num_classes = images.front().pred.size();
  if (num_classes == 0) throw std::invalid_argument("dataset_loss needs at least one class");
  for (const ImageSample& img : images) {
    if (img.pred.size() != num_classes || img.label.size() != num_classes) {
      throw std::invalid_argument("every image needs one pred and label vector per class");
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (img.pred[c].size() != img.pred[0].size() || img.label[c].size() != img.pred[0].size()) {
        throw std::invalid_argument("class vectors of one image must share a length");
      }
    }
  }

  // Per-image-per-class losses and presence, in a fixed order.
  const std::size_t num_images = images.size();
  std::vector<double> loss(num_images * num_classes);
  std::vector<bool> present(num_images * num_classes);
  for (std::size_t i = 0; i < num_images; ++i) {
    for (std::size_t c = 0; c < num_classes; ++c) {
      loss[i * num_classes + c] = forward(images[i].pred[c], images[i].label[c]);
      present[i * num_classes + c] = has_mass(images[i].label[c]);
    }
  }

  double d_term = 0.0;
  if (agg.w_d > 0.0) {
    double sum = 0.0;
    std::size_t n = 0;
    std::vector<double> xs, ys;
    for (std::size_t c = 0; c < num_classes; ++c) {
      xs.clear();
      ys.clear();
      for (const ImageSample& img : images) {
        xs.insert(xs.end(), img.pred[c].values().begin(), img.pred[c].values().end());
        ys.insert(ys.end(), img.label[c].values().begin(), img.label[c].values().end());
      }
      const Norms nm = norms(xs, ys);
      if (nm.sum_norm == 0.0) continue;  // zero union
      sum += forward(xs, ys);
      ++n;
    }
    d_term = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }

  double i_term = 0.0;
  if (agg.w_i > 0.0) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < num_images; ++i) {
      double row = 0.0;
      std::size_t k = 0;
      for (std::size_t c = 0; c < num_classes; ++c) {
        if (!present[i * num_classes + c]) continue;
        row += loss[i * num_classes + c];
        ++k;
      }
      if (k == 0) continue;
      sum += row / static_cast<double>(k);
      ++n;
    }
    i_term = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }

  double c_term = 0.0;
  if (agg.w_c > 0.0) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      double col = 0.0;
      std::size_t k = 0;
      for (std::size_t i = 0; i < num_images; ++i) {
        if (!present[i * num_classes + c]) continue;
        col += loss[i * num_classes + c];
        ++k;
      }
      if (k == 0) continue;
      sum += col / static_cast<double>(k);
      ++n;
    }
    c_term = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }

  return agg.w_d * d_term + agg.w_i * i_term + agg.w_c * c_term;
}

std::vector<CheckResult> run_checks(const CheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim(1, 16);
  std::bernoulli_distribution coin(0.5);

  auto random_soft = [&](std::size_t p) {
    std::vector<double> v(p);
    for (double& a : v) a = unit(rng);
    return v;
  };

  CheckResult range{"range", true, 0.0, 0.0, options.trials};
  CheckResult symmetry{"symmetry", true, 0.0, 1e-15, options.trials};
  CheckResult binary{"binary_label_equivalence", true, 0.0, 1e-12, options.trials};
  CheckResult triangle{"triangle_inequality", true, 0.0, 1e-12, options.trials};
  CheckResult grad{"gradient_finite_difference", true, 0.0, 1e-5, options.gradient_trials};

  for (std::size_t t = 0; t < options.trials; ++t) {
    const std::size_t p = dim(rng);
    const auto x = random_soft(p);
    const auto y = random_soft(p);
    const auto z = random_soft(p);

    const double fxy = forward(x, y);
    const double excess = std::max({0.0, -fxy, fxy - 1.0});
    range.max_error = std::max(range.max_error, excess);

    symmetry.max_error = std::max(symmetry.max_error, std::abs(fxy - forward(y, x)));

    std::vector<double> yb(p);
    for (double& a : yb) a = coin(rng) ? 1.0 : 0.0;
    binary.max_error = std::max(binary.max_error, std::abs(forward(x, yb) - soft_jaccard(x, yb)));

    const double violation = fxy + forward(y, z) - forward(x, z);
    triangle.max_error = std::max(triangle.max_error, std::max(0.0, -violation));
  }

  // Central differences, h = 1e-6, on points kept well away from the kinks
  // x_i = y_i and from the box boundary.
  constexpr double kStep = 1e-6;
  constexpr double kMargin = 1e-3;
  std::uniform_real_distribution<double> interior(kMargin, 1.0 - kMargin);
  for (std::size_t t = 0; t < options.gradient_trials; ++t) {
    const std::size_t p = dim(rng);
    std::vector<double> x(p), y(p);
    for (std::size_t i = 0; i < p; ++i) {
      do {
        x[i] = interior(rng);
        y[i] = coin(rng) ? std::round(unit(rng)) : interior(rng);
      } while (std::abs(x[i] - y[i]) < kMargin);
    }
    std::vector<double> g = gradient(x, y);
    for (double& gi : g) gi += options.gradient_perturbation;

    double max_diff = 0.0, max_mag = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      std::vector<double> xp = x, xm = x;
      xp[i] += kStep;
      xm[i] -= kStep;
      const double fd = (forward(xp, y) - forward(xm, y)) / (2.0 * kStep);
      max_diff = std::max(max_diff, std::abs(g[i] - fd));
      max_mag = std::max({max_mag, std::abs(g[i]), std::abs(fd)});
    }
    const double rel = max_mag > 0.0 ? max_diff / max_mag : max_diff;
    grad.max_error = std::max(grad.max_error, rel);
  }

  std::vector<CheckResult> out{range, symmetry, binary, triangle, grad};
  for (CheckResult& r : out) r.passed = r.max_error <= r.tolerance;
  return out;
}

}  // namespace segmetrics::jml
