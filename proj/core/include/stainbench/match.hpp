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

#include <cstddef>
#include <string>
#include <vector>

#include "stainbench/postproc.hpp"

namespace stainbench {

/// Centre of an annotated mitotic figure.
struct AnnotationPoint {
  double x = 0.0;
  double y = 0.0;
  std::string image_id;

  friend bool operator==(const AnnotationPoint&, const AnnotationPoint&) = default;
};

struct MatchPair {
  std::size_t detection;
  std::size_t annotation;
  double distance;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> false_positives;   // unmatched detection indices
  std::vector<std::size_t> false_negatives;   // unmatched annotation indices
};

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts& operator+=(const Counts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend Counts operator+(Counts a, const Counts& b) noexcept { return a += b; }
  friend bool operator==(const Counts&, const Counts&) = default;
};

inline constexpr double kDefaultMatchRadius = 30.0;

/// Greedy one-to-one matching on centre distance. Every (detection,
/// annotation) pair with distance <= radius is a candidate; candidates are
/// consumed in order of (distance, detection index, annotation index).
/// Detection scores are ignored. Throws ValidationError if radius <= 0 or
/// the annotations name more than one image.
MatchResult match(const std::vector<DetectionBox>& detections, const std::vector<AnnotationPoint>& annotations,
                  double radius = kDefaultMatchRadius);

Counts counts_of(const MatchResult& result) noexcept;

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Zero denominators yield 0.
Scores prf1(std::size_t tp, std::size_t fp, std::size_t fn) noexcept;
inline Scores prf1(const Counts& c) noexcept { return prf1(c.tp, c.fp, c.fn); }

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_from(double precision, double recall) noexcept;

}  // namespace stainbench
