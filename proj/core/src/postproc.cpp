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

#include "stainbench/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "stainbench/error.hpp"
#include "stainbench/png_io.hpp"

namespace stainbench {
namespace {

std::size_t area(int w, int h) { return static_cast<std::size_t>(w) * static_cast<std::size_t>(h); }

// Marks background pixels 4-connected to the border. Everything else is
// either foreground or an enclosed pocket.
std::vector<std::uint8_t> outside_background(const BinaryMask& mask) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<std::uint8_t> outside(mask.data.size(), 0);
  std::vector<std::uint32_t> queue;
  auto seed = [&](int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
    if (!mask.data[i] && !outside[i]) {
      outside[i] = 1;
      queue.push_back(static_cast<std::uint32_t>(i));
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int x = static_cast<int>(queue[head] % static_cast<std::uint32_t>(w));
    const int y = static_cast<int>(queue[head] / static_cast<std::uint32_t>(w));
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }
  return outside;
}

struct DisjointSet {
  std::vector<std::uint32_t> parent;

  std::uint32_t make() {
    parent.push_back(static_cast<std::uint32_t>(parent.size()));
    return parent.back();
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent[b] = a;
    else parent[a] = b;
  }
};

}  // namespace

void validate(const ProbabilityMap& pm) {
  if (pm.width < 1 || pm.height < 1) throw ValidationError("probability map dimensions must be >= 1");
  if (pm.data.size() != area(pm.width, pm.height)) throw ValidationError("probability map size mismatch");
  for (const double v : pm.data) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw ValidationError("probability map values must be in [0, 1]");
  }
}

BinaryMask threshold_map(const ProbabilityMap& pm, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("threshold must be in [0, 1]");
  validate(pm);
  BinaryMask mask{pm.width, pm.height, std::vector<std::uint8_t>(pm.data.size())};
  std::transform(pm.data.begin(), pm.data.end(), mask.data.begin(),
                 [t](double p) { return static_cast<std::uint8_t>(p >= t ? 1 : 0); });
  return mask;
}

std::vector<Region> extract_regions(const BinaryMask& mask) {
  const int w = mask.width;
  const int h = mask.height;
  if (w < 1 || h < 1 || mask.data.size() != area(w, h)) throw ValidationError("invalid mask");
  const auto outside = outside_background(mask);

  // Two-pass 8-connected labeling of the hole-filled mask.
  constexpr std::uint32_t kNone = UINT32_MAX;
  std::vector<std::uint32_t> label(mask.data.size(), kNone);
  DisjointSet sets;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      if (outside[i]) continue;
      std::uint32_t current = kNone;
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || nx >= w || ny < 0) return;
        const std::uint32_t l = label[static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx)];
        if (l == kNone) return;
        if (current == kNone) current = l;
        else sets.unite(current, l);
      };
      visit(x - 1, y);
      visit(x - 1, y - 1);
      visit(x, y - 1);
      visit(x + 1, y - 1);
      label[i] = current == kNone ? sets.make() : current;
    }
  }

  // Resolve roots and number regions in raster order of first pixel.
  std::vector<std::uint32_t> region_of_root(sets.parent.size(), kNone);
  std::vector<Region> regions;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] == kNone) continue;
    const std::uint32_t root = sets.find(label[i]);
    if (region_of_root[root] == kNone) {
      region_of_root[root] = static_cast<std::uint32_t>(regions.size());
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      regions.push_back(Region{x, y, x, y, 0.0, 0.0, {}});
    }
    Region& r = regions[region_of_root[root]];
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    r.min_x = std::min(r.min_x, x);
    r.max_x = std::max(r.max_x, x);
    r.min_y = std::min(r.min_y, y);
    r.max_y = std::max(r.max_y, y);
    r.centroid_x += x;
    r.centroid_y += y;
    r.pixels.push_back(static_cast<std::uint32_t>(i));
  }
  for (auto& r : regions) {
    const auto n = static_cast<double>(r.pixels.size());
    r.centroid_x /= n;
    r.centroid_y /= n;
  }
  return regions;
}

std::vector<DetectionBox> regions_to_detections(const std::vector<Region>& regions, double box_size, int min_extent,
                                                const ProbabilityMap* source) {
  if (!(box_size > 0.0)) throw ValidationError("box_size must be > 0");
  if (min_extent < 0) throw ValidationError("min_extent must be >= 0");
  std::vector<DetectionBox> boxes;
  for (const auto& r : regions) {
    if (r.bbox_width() < min_extent || r.bbox_height() < min_extent) continue;
    DetectionBox box{r.centroid_x, r.centroid_y, box_size, box_size, std::nullopt};
    if (source != nullptr) {
      double sum = 0.0;
      for (const auto i : r.pixels) sum += source->data[i];
      box.score = sum / static_cast<double>(r.pixels.size());
    }
    boxes.push_back(box);
  }
  std::sort(boxes.begin(), boxes.end(), [](const DetectionBox& a, const DetectionBox& b) {
    if (a.center_y != b.center_y) return a.center_y < b.center_y;
    return a.center_x < b.center_x;
  });
  return boxes;
}

std::vector<DetectionBox> postprocess(const ProbabilityMap& pm, const PostprocessOptions& options) {
  const BinaryMask mask = threshold_map(pm, options.threshold);
  return regions_to_detections(extract_regions(mask), options.box_size, options.min_extent, &pm);
}

ProbabilityMap read_probability_map_png(const std::filesystem::path& path) {
  const Gray16Image g = read_png_gray16(path);
  ProbabilityMap pm{g.width, g.height, std::vector<double>(g.data.size())};
  std::transform(g.data.begin(), g.data.end(), pm.data.begin(), [](std::uint16_t v) { return v / 65535.0; });
  return pm;
}

void write_probability_map_png(const std::filesystem::path& path, const ProbabilityMap& pm) {
  validate(pm);
  Gray16Image g{pm.width, pm.height, std::vector<std::uint16_t>(pm.data.size())};
  std::transform(pm.data.begin(), pm.data.end(), g.data.begin(),
                 [](double p) { return static_cast<std::uint16_t>(std::lround(p * 65535.0)); });
  write_png_gray16(path, g);
}

ProbabilityMap probability_map_from_json(const std::string& text) {
  ProbabilityMap pm;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.is_object()) {
      pm.width = j.at("width").get<int>();
      pm.height = j.at("height").get<int>();
      pm.data = j.at("data").get<std::vector<double>>();
    } else if (j.is_array()) {
      pm.height = static_cast<int>(j.size());
      for (const auto& row : j) {
        auto values = row.get<std::vector<double>>();
        if (pm.width == 0) pm.width = static_cast<int>(values.size());
        if (static_cast<int>(values.size()) != pm.width) throw ValidationError("probability map rows differ in length");
        pm.data.insert(pm.data.end(), values.begin(), values.end());
      }
    } else {
      throw ValidationError("probability map JSON must be an object or an array of rows");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("probability map: ") + e.what());
  }
  validate(pm);
  return pm;
}

std::string probability_map_to_json(const ProbabilityMap& pm) {
  nlohmann::ordered_json j;
  j["width"] = pm.width;
  j["height"] = pm.height;
  j["data"] = pm.data;
  return j.dump();
}

}  // namespace stainbench
