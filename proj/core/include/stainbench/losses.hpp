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

#pragma once

#include <Eigen/Core>
#include <vector>

#include "stainbench/raster.hpp"

namespace stainbench {

/// Dense 2-D real grid (predictions or targets), row-major.
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<double> data;
};

/// Channel-major feature tensor: value of channel c at spatial index s is
/// data[c * height * width + s].
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  std::size_t spatial_size() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
};

/// Throws ValidationError unless channels >= 1, extents >= 1, sizes agree
/// and every value is finite.
void validate(const FeatureMap& f);

inline constexpr double kProbabilityClamp = 1e-7;

/// Pixel-mean binary cross entropy, predictions clamped to
/// [1e-7, 1 - 1e-7].
double bce(const Grid& pred, const Grid& target);

/// 1 - (2 sum(p y) + smooth) / (sum(p) + sum(y) + smooth). Predictions are
/// used unclamped.
double dice_loss(const Grid& pred, const Grid& target, double smooth = 1.0);

/// Pixel-mean focal loss -a_t (1 - p_t)^gamma ln(p_t), with p_t = p and
/// a_t = alpha for positives, p_t = 1 - p and a_t = 1 - alpha for
/// negatives. Same clamp as bce.
double focal_loss(const Grid& pred, const Grid& target, double gamma = 2.0, double alpha = 0.25);

struct LossWeights {
  double bce = 1.0;
  double dice = 1.0;
  double focal = 10.0;
};

/// Weighted sum of bce, dice_loss (smooth 1) and focal_loss (gamma 2,
/// alpha 0.25). Negative weights are rejected.
double combined_loss(const Grid& pred, const Grid& target, const LossWeights& weights = {});

/// G(i, j) = sum over spatial positions of f_i * f_j.
Eigen::MatrixXd gram_matrix(const FeatureMap& f);

/// sum((G_a - G_b)^2) / (4 C^2 M^2), M = spatial size.
double style_loss(const FeatureMap& a, const FeatureMap& b);

/// sum((a - b)^2) / 2.
double content_loss(const FeatureMap& a, const FeatureMap& b);

/// Mean absolute per-channel difference with intensities scaled to [0, 1].
double cycle_consistency_loss(const RasterImage& original, const RasterImage& reconstructed);

}  // namespace stainbench
