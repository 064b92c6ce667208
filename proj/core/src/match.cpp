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

#include "stainbench/match.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "stainbench/error.hpp"

namespace stainbench {

MatchResult match(const std::vector<DetectionBox>& detections, const std::vector<AnnotationPoint>& annotations,
                  double radius) {
  if (!(radius > 0.0)) throw ValidationError("match radius must be > 0");
  for (const auto& a : annotations) {
    if (a.image_id != annotations.front().image_id) throw ValidationError("annotations from mixed image_id");
  }

  struct Candidate {
    double d2;
    std::size_t det;
    std::size_t ann;
  };
  const double r2 = radius * radius;
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (std::size_t k = 0; k < annotations.size(); ++k) {
      const double dx = detections[i].center_x - annotations[k].x;
      const double dy = detections[i].center_y - annotations[k].y;
      const double d2 = dx * dx + dy * dy;
      if (d2 <= r2) candidates.push_back({d2, i, k});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.d2, a.det, a.ann) < std::tie(b.d2, b.det, b.ann);
  });

  MatchResult result;
  std::vector<bool> det_used(detections.size(), false);
  std::vector<bool> ann_used(annotations.size(), false);
  for (const auto& c : candidates) {
    if (det_used[c.det] || ann_used[c.ann]) continue;
    det_used[c.det] = true;
    ann_used[c.ann] = true;
    result.pairs.push_back({c.det, c.ann, std::sqrt(c.d2)});
  }
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (!det_used[i]) result.false_positives.push_back(i);
  }
  for (std::size_t k = 0; k < annotations.size(); ++k) {
    if (!ann_used[k]) result.false_negatives.push_back(k);
  }
  return result;
}

Counts counts_of(const MatchResult& result) noexcept {
  return {result.pairs.size(), result.false_positives.size(), result.false_negatives.size()};
}

double f1_from(double precision, double recall) noexcept {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

Scores prf1(std::size_t tp, std::size_t fp, std::size_t fn) noexcept {
  Scores s;
  const auto t = static_cast<double>(tp);
  if (tp + fp > 0) s.precision = t / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = t / static_cast<double>(tp + fn);
  s.f1 = f1_from(s.precision, s.recall);
  return s;
}

}  // namespace stainbench
