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

#include <filesystem>
#include <string>
#include <vector>

#include "stainbench/match.hpp"
#include "stainbench/postproc.hpp"

namespace stainbench {

/// Ground truth of one image:
/// {"image_id": s, "width": w, "height": h, "scanner": s?, "points": [{"x":…, "y":…}]}
/// "scanner" is optional and defaults to "unknown".
struct AnnotationSet {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::string scanner = "unknown";
  std::vector<AnnotationPoint> points;
};

/// {"image_id": s, "detections": [{"x":…, "y":…, "w":…, "h":…, "score":…}]}
/// x, y are box centres; "score" is omitted when absent.
struct DetectionSet {
  std::string image_id;
  std::vector<DetectionBox> detections;
};

/// Files hold either one object or an array of objects.
std::vector<AnnotationSet> annotation_sets_from_json(const std::string& text);
std::vector<DetectionSet> detection_sets_from_json(const std::string& text);

std::string annotation_set_to_json(const AnnotationSet& set);
std::string detection_set_to_json(const DetectionSet& set);

std::vector<AnnotationSet> read_annotation_files(const std::vector<std::filesystem::path>& paths);
std::vector<DetectionSet> read_detection_files(const std::vector<std::filesystem::path>& paths);

}  // namespace stainbench
