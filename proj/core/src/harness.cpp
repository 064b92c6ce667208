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

#include "stainbench/harness.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <map>
#include <set>

#include "json.hpp"
#include "stainbench/error.hpp"
#include "stainbench/version.hpp"

namespace stainbench {
namespace {

constexpr const char* kPooledLabel = "all";

nlohmann::ordered_json config_json(const EvalConfig& c) {
  nlohmann::ordered_json j;
  j["radius"] = c.radius;
  j["tile_size"] = c.manifest ? c.manifest->tile_size : c.tile_size;
  j["tile_source"] = c.manifest ? "manifest" : "grid";
  j["n_resamples"] = c.n_resamples;
  j["seed"] = c.seed;
  j["resample_unit"] = to_string(c.resample_unit);
  j["confidence"] = 0.95;
  j["threshold"] = c.postprocess.threshold;
  j["box_size"] = c.postprocess.box_size;
  j["min_extent"] = c.postprocess.min_extent;
  return j;
}

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["scanner"] = r.scanner;
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["fn"] = r.counts.fn;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["n_crops"] = r.n_crops;
  j["n_resamples"] = r.n_resamples;
  j["seed"] = r.seed;
  return j;
}

}  // namespace

const char* to_string(ResampleUnit unit) noexcept { return unit == ResampleUnit::kCrop ? "crop" : "image"; }

ResampleUnit resample_unit_from_string(const std::string& name) {
  if (name == "crop") return ResampleUnit::kCrop;
  if (name == "image") return ResampleUnit::kImage;
  throw ValidationError("unknown resample unit '" + name + "' (expected crop or image)");
}

std::vector<CropCounts> count_crops(const std::vector<DetectionSet>& detections,
                                    const std::vector<AnnotationSet>& annotations, const EvalConfig& config,
                                    std::vector<std::string>* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  std::map<std::string, const AnnotationSet*> by_id;
  for (const auto& a : annotations) {
    if (!by_id.emplace(a.image_id, &a).second) throw ValidationError("duplicate annotations for image_id " + a.image_id);
  }
  std::map<std::string, const DetectionSet*> dets_by_id;
  for (const auto& d : detections) {
    if (!by_id.count(d.image_id)) throw ValidationError("unknown image_id in detections: " + d.image_id);
    if (!dets_by_id.emplace(d.image_id, &d).second) throw ValidationError("duplicate detections for image_id " + d.image_id);
  }

  std::vector<CropCounts> crops;
  for (const auto& ann : annotations) {
    TileGrid grid;
    if (config.manifest) {
      grid = *config.manifest;
      for (const auto& o : grid.origins) {
        if (o.x + grid.tile_size > ann.width || o.y + grid.tile_size > ann.height) {
          throw ValidationError("tile manifest does not fit image " + ann.image_id);
        }
      }
    } else {
      grid = tile(ann.width, ann.height, config.tile_size);
    }

    std::vector<std::vector<AnnotationPoint>> tile_anns(grid.origins.size());
    std::vector<std::vector<DetectionBox>> tile_dets(grid.origins.size());
    for (const auto& p : ann.points) {
      const int t = grid.tile_containing(p.x, p.y);
      if (t < 0) {
        warn(fmt::format("annotation ({}, {}) in {} lies outside all tiles; dropped", p.x, p.y, ann.image_id));
        continue;
      }
      tile_anns[static_cast<std::size_t>(t)].push_back(p);
    }
    if (auto it = dets_by_id.find(ann.image_id); it != dets_by_id.end()) {
      for (const auto& d : it->second->detections) {
        const int t = grid.tile_containing(d.center_x, d.center_y);
        if (t < 0) {
          warn(fmt::format("detection ({}, {}) in {} lies outside all tiles; dropped", d.center_x, d.center_y,
                           ann.image_id));
          continue;
        }
        tile_dets[static_cast<std::size_t>(t)].push_back(d);
      }
    } else {
      warn("no detections supplied for " + ann.image_id + "; all its annotations count as misses");
    }

    for (std::size_t t = 0; t < grid.origins.size(); ++t) {
      const auto result = match(tile_dets[t], tile_anns[t], config.radius);
      crops.push_back({ann.scanner, ann.image_id, static_cast<int>(t), counts_of(result)});
    }
  }
  return crops;
}

EvalReport summarize(const std::string& label, const std::vector<const CropCounts*>& crops, const EvalConfig& config) {
  if (crops.empty()) throw ValidationError("no crops to summarize for " + label);
  std::vector<Counts> units;
  if (config.resample_unit == ResampleUnit::kCrop) {
    for (const auto* c : crops) units.push_back(c->counts);
  } else {
    std::map<std::string, Counts> per_image;
    for (const auto* c : crops) per_image[c->image_id] += c->counts;
    for (const auto& [id, counts] : per_image) units.push_back(counts);
  }

  EvalReport r;
  r.scanner = label;
  for (const auto& u : units) r.counts += u;
  const Scores s = prf1(r.counts);
  r.precision = s.precision;
  r.recall = s.recall;
  r.f1 = s.f1;
  const auto ci = bootstrap_f1(units, {config.n_resamples, config.seed, 0.95, config.threads});
  r.ci_low = ci.ci_low;
  r.ci_high = ci.ci_high;
  r.n_crops = crops.size();
  r.n_resamples = config.n_resamples;
  r.seed = config.seed;
  return r;
}

RunReport evaluate_run(const std::vector<DetectionSet>& detections, const std::vector<AnnotationSet>& annotations,
                       const EvalConfig& config) {
  if (!(config.radius > 0.0)) throw ValidationError("match radius must be > 0");
  if (config.n_resamples == 0) throw ValidationError("n_resamples must be >= 1");
  if (annotations.empty()) throw ValidationError("no annotation sets supplied");

  RunReport run;
  run.config = config;
  run.crops = count_crops(detections, annotations, config, &run.warnings);

  std::vector<const CropCounts*> all;
  std::set<std::string> scanners;
  for (const auto& c : run.crops) {
    all.push_back(&c);
    scanners.insert(c.scanner);
  }
  run.reports.push_back(summarize(kPooledLabel, all, config));

  auto select = [&](auto&& keep) {
    std::vector<const CropCounts*> out;
    for (const auto& c : run.crops) {
      if (keep(c.scanner)) out.push_back(&c);
    }
    return out;
  };
  for (const auto& s : scanners) {
    run.reports.push_back(summarize(s, select([&](const std::string& x) { return x == s; }), config));
  }
  if (scanners.size() >= 2) {
    for (const auto& s : scanners) {
      HeldOutFold fold;
      fold.held_out = s;
      fold.external = summarize(s, select([&](const std::string& x) { return x == s; }), config);
      fold.training_domain =
          summarize("all_except:" + s, select([&](const std::string& x) { return x != s; }), config);
      run.leave_one_scanner_out.push_back(std::move(fold));
    }
  }
  return run;
}

std::string run_report_to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["tool"] = kName;
  j["version"] = kVersion;
  j["config"] = config_json(report.config);
  auto& reports = j["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : report.reports) reports.push_back(report_json(r));
  auto& folds = j["leave_one_scanner_out"] = nlohmann::ordered_json::array();
  for (const auto& f : report.leave_one_scanner_out) {
    nlohmann::ordered_json e;
    e["held_out"] = f.held_out;
    e["external"] = report_json(f.external);
    e["training_domain"] = report_json(f.training_domain);
    folds.push_back(std::move(e));
  }
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string run_report_to_csv(const RunReport& report) {
  const auto& c = report.config;
  std::string out = fmt::format(
      "# {} {} radius={} tile_size={} n_resamples={} seed={} resample_unit={} threshold={} box_size={} "
      "min_extent={}\n",
      kName, kVersion, c.radius, c.manifest ? c.manifest->tile_size : c.tile_size, c.n_resamples, c.seed,
      to_string(c.resample_unit), c.postprocess.threshold, c.postprocess.box_size, c.postprocess.min_extent);
  out += "scanner,tp,fp,fn,precision,recall,f1,ci_low,ci_high,n_crops,seed\n";
  auto row = [&](const EvalReport& r) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.scanner, r.counts.tp, r.counts.fp, r.counts.fn,
                       r.precision, r.recall, r.f1, r.ci_low, r.ci_high, r.n_crops, r.seed);
  };
  for (const auto& r : report.reports) row(r);
  for (const auto& f : report.leave_one_scanner_out) row(f.training_domain);
  return out;
}

}  // namespace stainbench
