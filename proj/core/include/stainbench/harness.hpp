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
#include <optional>
#include <string>
#include <vector>

#include "stainbench/bootstrap.hpp"
#include "stainbench/formats.hpp"
#include "stainbench/raster.hpp"

namespace stainbench {

enum class ResampleUnit { kCrop, kImage };

const char* to_string(ResampleUnit unit) noexcept;
ResampleUnit resample_unit_from_string(const std::string& name);

struct EvalConfig {
  double radius = kDefaultMatchRadius;
  int tile_size = kDefaultTileSize;
  /// When set, these origins are used for every image instead of tiling by
  /// tile_size.
  std::optional<TileGrid> manifest;
  std::size_t n_resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  ResampleUnit resample_unit = ResampleUnit::kCrop;
  /// How the detections were produced; recorded in reports only.
  PostprocessOptions postprocess;
  unsigned threads = 0;
};

/// Counts for one evaluation crop.
struct CropCounts {
  std::string scanner;
  std::string image_id;
  int tile_index = 0;
  Counts counts;
};

struct EvalReport {
  std::string scanner;  // "all" for the pooled report
  Counts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_crops = 0;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
};

/// One fold of the leave-one-scanner-out design: the held-out scanner is
/// the external domain, the remaining scanners form the training domain.
struct HeldOutFold {
  std::string held_out;
  EvalReport external;
  EvalReport training_domain;
};

struct RunReport {
  EvalConfig config;
  std::vector<CropCounts> crops;
  std::vector<EvalReport> reports;  // pooled first, then scanners in name order
  std::vector<HeldOutFold> leave_one_scanner_out;
  std::vector<std::string> warnings;
};

/// Per-crop matching over a corpus.
///
/// Each annotated image is cut into crops (config.manifest, or tile() by
/// tile_size). Annotations and detections are assigned to the crop holding
/// their centre; points outside every crop are dropped with a warning.
/// Images without a detection set contribute only false negatives.
/// Throws ValidationError for a detection set whose image_id has no
/// annotations, duplicate image ids, or a manifest that does not fit.
std::vector<CropCounts> count_crops(const std::vector<DetectionSet>& detections,
                                    const std::vector<AnnotationSet>& annotations, const EvalConfig& config,
                                    std::vector<std::string>* warnings = nullptr);

/// Pooled scores plus bootstrap CI over the given crops.
EvalReport summarize(const std::string& label, const std::vector<const CropCounts*>& crops, const EvalConfig& config);

/// count_crops, then one report for all crops, one per scanner, and the
/// leave-one-scanner-out folds (when there are at least two scanners).
RunReport evaluate_run(const std::vector<DetectionSet>& detections, const std::vector<AnnotationSet>& annotations,
                       const EvalConfig& config);

/// Full report with the resolved configuration and tool version.
std::string run_report_to_json(const RunReport& report);
/// Columns: scanner,tp,fp,fn,precision,recall,f1,ci_low,ci_high,n_crops,seed,
/// preceded by a single '#' provenance line.
std::string run_report_to_csv(const RunReport& report);

}  // namespace stainbench
