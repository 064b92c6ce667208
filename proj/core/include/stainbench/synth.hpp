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
#include <cstdint>
#include <string>
#include <vector>

#include "stainbench/formats.hpp"
#include "stainbench/postproc.hpp"
#include "stainbench/raster.hpp"

namespace stainbench {

/// A stained disk: raised-cosine concentration profile
/// c(r) = peak * (1 + cos(pi r / radius)) / 2 for r < radius.
struct Blob {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 8.0;
  std::array<double, 2> concentration{1.0, 0.0};  // (haematoxylin, eosin) peak
};

/// Everything needed to render one synthetic image and its oracle.
struct SynthSpec {
  std::string image_id = "synth";
  std::string scanner = "synthetic";
  int width = 512;
  int height = 512;
  Eigen::Matrix<double, 3, 2> stain_matrix;  // unit columns
  std::array<double, 3> background_od{0.0, 0.0, 0.0};
  std::vector<Blob> blobs;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  double noise_sigma = 0.005;  // per-channel OD noise, at most 0.02
  std::uint64_t seed = 0;
  /// Spurious probability bumps are kept at least this far from every blob
  /// centre, so each one is unambiguously a false positive.
  double spurious_clearance = 31.0;
  /// If > 0, spurious bumps stay inside one tile of this size (with a margin
  /// of their radius), so per-crop bookkeeping is exact.
  int tile_size = 0;

  SynthSpec();
};

/// Throws ValidationError if blobs leave the image, rates leave [0, 1],
/// noise exceeds 0.02, or the stain matrix is not unit-column non-negative.
void validate(const SynthSpec& spec);

struct StainedImage {
  RasterImage image;
  std::vector<AnnotationPoint> annotations;  // blob centres
};

/// OD = background_od + stain_matrix * c(x, y) + N(0, noise_sigma^2) per
/// channel, clamped at 0 and converted to RGB with i0 = 255.
StainedImage make_stained(const SynthSpec& spec);

/// Peak 0.95 at the probability-map bump centre, width chosen so the 0.5
/// level set is a disk of the blob radius.
inline constexpr double kBumpPeak = 0.95;

struct SynthProbabilityMap {
  ProbabilityMap map;
  std::vector<std::size_t> kept;      // blob indices rendered as bumps
  std::vector<std::size_t> dropped;   // blob indices omitted (planted misses)
  std::vector<Blob> spurious;         // planted false positives
};

/// Gaussian bumps for kept blobs plus spurious bumps. Each blob is dropped
/// with probability fn_rate and, independently, spawns a spurious bump of
/// its radius with probability fp_rate (rejection-sampled placement; a bump
/// that cannot be placed is skipped). Bumps combine by maximum.
SynthProbabilityMap make_probability_map(const SynthSpec& spec);

/// Random corpus description expanded into per-image SynthSpecs.
struct CorpusSpec {
  std::string scanner = "synthetic";
  std::string id_prefix;  // defaults to scanner
  int count = 1;
  int width = 512;
  int height = 512;
  int tile_size = kDefaultTileSize;
  Eigen::Matrix<double, 3, 2> stain_matrix;
  std::array<double, 3> background_od{0.0, 0.0, 0.0};
  int blobs_per_image = 8;
  double radius_min = 7.0;
  double radius_max = 12.0;
  std::array<double, 2> concentration_min{0.5, 0.5};
  std::array<double, 2> concentration_max{1.5, 1.5};
  /// Probability that a blob carries a single stain (split evenly between
  /// haematoxylin and eosin); the rest carry both.
  double pure_fraction = 0.5;
  double min_separation = 61.0;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  double noise_sigma = 0.005;
  std::uint64_t seed = 0;

  CorpusSpec();
};

/// Blobs are placed uniformly inside tiles (kept radius_max + 1 px clear of
/// tile edges) with pairwise centre distance >= min_separation. Placement
/// gives up on a blob after a bounded number of attempts.
std::vector<SynthSpec> make_corpus(const CorpusSpec& corpus);

/// Exact counts the evaluation protocol must reproduce for a spec whose
/// blobs and spurious bumps all sit inside tiles.
Counts expected_counts(const SynthProbabilityMap& pm);

/// The common H&E reference basis (columns haematoxylin, eosin).
Eigen::Matrix<double, 3, 2> reference_stain_matrix();

/// JSON forms. A spec file holds one SynthSpec object, {"images": [...]},
/// or a corpus object (recognized by its "count" key).
SynthSpec synth_spec_from_json(const std::string& text);
std::vector<SynthSpec> synth_specs_from_json(const std::string& text);
CorpusSpec corpus_spec_from_json(const std::string& text);

}  // namespace stainbench
