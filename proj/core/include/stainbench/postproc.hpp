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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stainbench {

/// Detector output: row-major probabilities in [0, 1].
struct ProbabilityMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  double at(int x, int y) const noexcept {
    return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
};

/// Throws ValidationError unless dimensions match the data and every value
/// is finite and in [0, 1].
void validate(const ProbabilityMap& pm);

/// Row-major 0/1 mask.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// A connected foreground object, holes included.
struct Region {
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;  // inclusive
  int max_y = 0;  // inclusive
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  std::vector<std::uint32_t> pixels;  // row-major indices

  int bbox_width() const noexcept { return max_x - min_x + 1; }
  int bbox_height() const noexcept { return max_y - min_y + 1; }
};

struct DetectionBox {
  double center_x = 0.0;
  double center_y = 0.0;
  double width = 0.0;
  double height = 0.0;
  std::optional<double> score;

  friend bool operator==(const DetectionBox&, const DetectionBox&) = default;
};

struct PostprocessOptions {
  double threshold = 0.5;
  double box_size = 50.0;
  int min_extent = 10;
};

/// mask[i] = pm[i] >= t. Throws ValidationError unless 0 <= t <= 1.
BinaryMask threshold_map(const ProbabilityMap& pm, double t);

/// External-contour objects: 8-connected foreground components after
/// filling every background pocket not 4-connected to the image border.
/// A pocket's pixels (and anything nested inside it) belong to the
/// surrounding region. Centroid is the mean of the region's pixel
/// coordinates. Regions are returned in raster order of their first pixel.
std::vector<Region> extract_regions(const BinaryMask& mask);

/// Drops regions whose bbox width or height is below `min_extent`, and
/// places a box_size x box_size box on each survivor's centroid. When
/// `source` is given, score is the mean probability over region pixels.
/// Output sorted by (center_y, center_x).
std::vector<DetectionBox> regions_to_detections(const std::vector<Region>& regions, double box_size,
                                                int min_extent, const ProbabilityMap* source = nullptr);

/// threshold_map -> extract_regions -> regions_to_detections (scored).
std::vector<DetectionBox> postprocess(const ProbabilityMap& pm, const PostprocessOptions& options = {});

/// Probability map from a grayscale PNG; 16-bit values map to v / 65535.
ProbabilityMap read_probability_map_png(const std::filesystem::path& path);
/// Quantizes to 16 bits: round(p * 65535).
void write_probability_map_png(const std::filesystem::path& path, const ProbabilityMap& pm);

/// JSON probability map: either {"width": w, "height": h, "data": [...]}
/// (row-major) or an array of equal-length rows.
ProbabilityMap probability_map_from_json(const std::string& text);
std::string probability_map_to_json(const ProbabilityMap& pm);

}  // namespace stainbench
