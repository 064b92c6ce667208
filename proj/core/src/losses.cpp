// Copyright 2026 The stainbench Authors.
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

#include "stainbench/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "stainbench/error.hpp"

namespace stainbench {
namespace {

void check_pair(const Grid& pred, const Grid& target) {
  if (pred.width != target.width || pred.height != target.height || pred.data.size() != target.data.size()) {
    throw ValidationError("shape mismatch between prediction and target");
  }
  if (pred.data.size() != static_cast<std::size_t>(pred.width) * static_cast<std::size_t>(pred.height) ||
      pred.data.empty()) {
    throw ValidationError("grid size does not match its dimensions");
  }
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double p = pred.data[i];
    const double y = target.data[i];
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("predictions must be in [0, 1]");
    if (y != 0.0 && y != 1.0) throw ValidationError("targets must be 0 or 1");
  }
}

void check_same_shape(const FeatureMap& a, const FeatureMap& b) {
  validate(a);
  validate(b);
  if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
    throw ValidationError("shape mismatch between feature maps");
  }
}

double clamp_probability(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

}  // namespace

void validate(const FeatureMap& f) {
  if (f.channels < 1 || f.height < 1 || f.width < 1) throw ValidationError("feature map extents must be >= 1");
  if (f.data.size() != static_cast<std::size_t>(f.channels) * f.spatial_size()) {
    throw ValidationError("feature map size does not match its shape");
  }
  for (const double v : f.data) {
    if (!std::isfinite(v)) throw ValidationError("feature map values must be finite");
  }
}

double bce(const Grid& pred, const Grid& target) {
  check_pair(pred, target);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double p = clamp_probability(pred.data[i]);
    const double y = target.data[i];
    sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return sum / static_cast<double>(pred.data.size());
}

double dice_loss(const Grid& pred, const Grid& target, double smooth) {
  check_pair(pred, target);
  if (!(smooth >= 0.0)) throw ValidationError("dice smoothing must be >= 0");
  double intersection = 0.0;
  double sum_p = 0.0;
  double sum_y = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    intersection += pred.data[i] * target.data[i];
    sum_p += pred.data[i];
    sum_y += target.data[i];
  }
  const double denom = sum_p + sum_y + smooth;
  if (denom == 0.0) return 0.0;
  return 1.0 - (2.0 * intersection + smooth) / denom;
}

double focal_loss(const Grid& pred, const Grid& target, double gamma, double alpha) {
  check_pair(pred, target);
  if (!(gamma >= 0.0)) throw ValidationError("focal gamma must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("focal alpha must be in [0, 1]");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double p = clamp_probability(pred.data[i]);
    const bool positive = target.data[i] == 1.0;
    const double pt = positive ? p : 1.0 - p;
    const double at = positive ? alpha : 1.0 - alpha;
    sum += at * std::pow(1.0 - pt, gamma) * -std::log(pt);
  }
  return sum / static_cast<double>(pred.data.size());
}

double combined_loss(const Grid& pred, const Grid& target, const LossWeights& weights) {
  if (weights.bce < 0.0 || weights.dice < 0.0 || weights.focal < 0.0) {
    throw ValidationError("loss weights must be non-negative");
  }
  return weights.bce * bce(pred, target) + weights.dice * dice_loss(pred, target) +
         weights.focal * focal_loss(pred, target);
}

Eigen::MatrixXd gram_matrix(const FeatureMap& f) {
  validate(f);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> features(
      f.data.data(), f.channels, static_cast<Eigen::Index>(f.spatial_size()));
  return features * features.transpose();
}

double style_loss(const FeatureMap& a, const FeatureMap& b) {
  check_same_shape(a, b);
  const double c = a.channels;
  const auto m = static_cast<double>(a.spatial_size());
  return (gram_matrix(a) - gram_matrix(b)).squaredNorm() / (4.0 * c * c * m * m);
}

double content_loss(const FeatureMap& a, const FeatureMap& b) {
  check_same_shape(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  return 0.5 * sum;
}

double cycle_consistency_loss(const RasterImage& original, const RasterImage& reconstructed) {
  if (original.width() != reconstructed.width() || original.height() != reconstructed.height()) {
    throw ValidationError("shape mismatch between original and reconstructed images");
  }
  if (original.empty()) throw ValidationError("empty image");
  const auto a = original.data();
  const auto b = reconstructed.data();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) total += static_cast<std::uint64_t>(std::abs(int{a[i]} - int{b[i]}));
  return static_cast<double>(total) / 255.0 / static_cast<double>(a.size());
}

}  // namespace stainbench
