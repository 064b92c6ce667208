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
#include <array>
#include <span>
#include <string>
#include <vector>

#include "stainbench/raster.hpp"

namespace stainbench {

/// A scanner's colour fingerprint: two unit-norm, non-negative OD directions
/// (column 0 haematoxylin, column 1 eosin) and a robust concentration
/// ceiling for each stain.
struct StainProfile {
  Eigen::Matrix<double, 3, 2> stain_matrix = Eigen::Matrix<double, 3, 2>::Zero();
  std::array<double, 2> max_concentrations{};
};

/// Throws ValidationError if the profile breaks any StainProfile invariant
/// (unit columns within 1e-9, non-negative entries, columns more than 1
/// degree apart, haematoxylin first, positive ceilings).
void validate(const StainProfile& profile);

/// Angle in degrees between two 3-vectors.
double angle_degrees(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

struct StainFitOptions {
  double beta = 0.15;                // pixels with any channel OD <= beta are background
  double alpha = 1.0;                // percentile of the extreme projection angles
  double ceiling_percentile = 99.0;  // per-stain concentration ceiling
  double i0 = kDefaultReferenceWhite;
  unsigned threads = 0;
};

/// Fits a Macenko stain profile to the pooled tissue pixels of `images`.
///
/// Tissue pixels (every channel OD > beta) of all images are pooled. The
/// stain plane is spanned by the two leading right-singular vectors of the
/// pooled OD matrix. Each pixel is projected onto that plane and the
/// alpha-th / (100 - alpha)-th percentile angles (linear interpolation)
/// give the two stain directions. Ceilings are the `ceiling_percentile`
/// of each stain's concentration over the tissue pixels.
///
/// Throws ValidationError with one of:
///   "insufficient tissue"        fewer than 100 tissue pixels
///   "degenerate stain plane"     sigma_2 < 1e-9, or extreme directions within 1 degree
///   "non-physical stain vector"  a direction has negative entries under either sign
///   "ambiguous stain order"      equal red-channel components
StainProfile fit_stain_profile(std::span<const RasterImage> images, const StainFitOptions& options = {});

/// Per-pixel (haematoxylin, eosin) concentrations, row-major.
struct ConcentrationMap {
  int width = 0;
  int height = 0;
  std::vector<std::array<double, 2>> values;
};

/// Least-squares deconvolution of a single OD vector; negatives clamped to 0.
std::array<double, 2> deconvolve(const StainProfile& profile, const Eigen::Vector3d& od);

ConcentrationMap concentrations(const RasterImage& img, const StainProfile& profile,
                                double i0 = kDefaultReferenceWhite);

/// Normalization in OD space (before 8-bit quantization): concentrations
/// against `source`, rescaled per stain by target/source ceilings, recomposed
/// through target.stain_matrix.
OdImage normalize_od(const RasterImage& img, const StainProfile& source, const StainProfile& target,
                     double i0 = kDefaultReferenceWhite, unsigned threads = 0);

/// normalize_od followed by conversion back to 8-bit RGB.
RasterImage normalize(const RasterImage& img, const StainProfile& source, const StainProfile& target,
                      double i0 = kDefaultReferenceWhite, unsigned threads = 0);

/// {"stain_matrix": [[h_r, e_r], [h_g, e_g], [h_b, e_b]], "max_concentrations": [c_h, c_e]}
/// with every number rounded to 15 significant digits.
std::string stain_profile_to_json(const StainProfile& profile);
/// Parses and validates a profile.
StainProfile stain_profile_from_json(const std::string& text);

}  // namespace stainbench
