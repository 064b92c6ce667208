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

#include "stainbench/formats.hpp"

#include <cmath>

#include "json.hpp"
#include "stainbench/error.hpp"
#include "stainbench/tensor_io.hpp"

namespace stainbench {
namespace {

using nlohmann::json;

template <typename Fn>
auto each_object(const std::string& text, const char* what, Fn&& fn) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
  using T = decltype(fn(j));
  std::vector<T> out;
  try {
    if (j.is_array()) {
      for (const auto& item : j) out.push_back(fn(item));
    } else {
      out.push_back(fn(j));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
  return out;
}

double finite(const json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ValidationError(std::string("non-finite value for ") + key);
  return v;
}

AnnotationSet parse_annotations(const json& j) {
  AnnotationSet set;
  set.image_id = j.at("image_id").get<std::string>();
  set.width = j.at("width").get<int>();
  set.height = j.at("height").get<int>();
  if (j.contains("scanner")) set.scanner = j.at("scanner").get<std::string>();
  if (set.width < 1 || set.height < 1) throw ValidationError("annotations: image dimensions must be >= 1");
  for (const auto& p : j.at("points")) {
    AnnotationPoint a{finite(p, "x"), finite(p, "y"), set.image_id};
    if (a.x < 0 || a.y < 0 || a.x > set.width || a.y > set.height) {
      throw ValidationError("annotations: point outside image bounds in " + set.image_id);
    }
    set.points.push_back(std::move(a));
  }
  return set;
}

DetectionSet parse_detections(const json& j) {
  DetectionSet set;
  set.image_id = j.at("image_id").get<std::string>();
  for (const auto& d : j.at("detections")) {
    DetectionBox box{finite(d, "x"), finite(d, "y"), finite(d, "w"), finite(d, "h"), std::nullopt};
    if (!(box.width > 0.0 && box.height > 0.0)) throw ValidationError("detections: box extents must be > 0");
    if (d.contains("score") && !d.at("score").is_null()) {
      const double s = finite(d, "score");
      if (s < 0.0 || s > 1.0) throw ValidationError("detections: score outside [0, 1]");
      box.score = s;
    }
    set.detections.push_back(box);
  }
  return set;
}

}  // namespace

std::vector<AnnotationSet> annotation_sets_from_json(const std::string& text) {
  return each_object(text, "annotations", parse_annotations);
}

std::vector<DetectionSet> detection_sets_from_json(const std::string& text) {
  return each_object(text, "detections", parse_detections);
}

std::string annotation_set_to_json(const AnnotationSet& set) {
  nlohmann::ordered_json j;
  j["image_id"] = set.image_id;
  j["width"] = set.width;
  j["height"] = set.height;
  j["scanner"] = set.scanner;
  auto& points = j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : set.points) points.push_back({{"x", p.x}, {"y", p.y}});
  return j.dump(2);
}

std::string detection_set_to_json(const DetectionSet& set) {
  nlohmann::ordered_json j;
  j["image_id"] = set.image_id;
  auto& dets = j["detections"] = nlohmann::ordered_json::array();
  for (const auto& d : set.detections) {
    nlohmann::ordered_json e;
    e["x"] = d.center_x;
    e["y"] = d.center_y;
    e["w"] = d.width;
    e["h"] = d.height;
    if (d.score) e["score"] = *d.score;
    dets.push_back(std::move(e));
  }
  return j.dump(2);
}

std::vector<AnnotationSet> read_annotation_files(const std::vector<std::filesystem::path>& paths) {
  std::vector<AnnotationSet> out;
  for (const auto& p : paths) {
    auto sets = annotation_sets_from_json(read_text_file(p));
    out.insert(out.end(), std::make_move_iterator(sets.begin()), std::make_move_iterator(sets.end()));
  }
  return out;
}

std::vector<DetectionSet> read_detection_files(const std::vector<std::filesystem::path>& paths) {
  std::vector<DetectionSet> out;
  for (const auto& p : paths) {
    auto sets = detection_sets_from_json(read_text_file(p));
    out.insert(out.end(), std::make_move_iterator(sets.begin()), std::make_move_iterator(sets.end()));
  }
  return out;
}

}  // namespace stainbench
