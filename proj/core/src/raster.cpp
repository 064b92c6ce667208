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

#include "stainbench/raster.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "json.hpp"
#include "stainbench/error.hpp"

namespace stainbench {

RasterImage::RasterImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ValidationError("image dimensions must be >= 1");
  data_.assign(pixel_count() * kChannels, fill);
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) throw ValidationError("image dimensions must be >= 1");
  if (data_.size() != pixel_count() * kChannels) throw ValidationError("image buffer size does not match dimensions");
}

RasterImage RasterImage::crop(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > width_ || y + h > height_) {
    throw ValidationError("crop rectangle outside image");
  }
  RasterImage out(w, h);
  const auto row_bytes = static_cast<std::size_t>(w) * kChannels;
  for (int r = 0; r < h; ++r) std::copy_n(pixel(x, y + r), row_bytes, out.pixel(0, r));
  return out;
}

OdImage::OdImage(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ValidationError("image dimensions must be >= 1");
  data_.assign(pixel_count() * 3, 0.0);
}

double intensity_to_od(std::uint8_t v, double i0) noexcept {
  const double od = -std::log10(std::max(1.0, static_cast<double>(v)) / i0);
  return od > 0.0 ? od : 0.0;
}

std::uint8_t od_to_intensity(double od, double i0) noexcept {
  const double v = std::round(i0 * std::pow(10.0, -od));
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

std::array<double, 256> od_lookup_table(double i0) {
  if (!(i0 > 0.0)) throw ValidationError("reference white i0 must be > 0");
  std::array<double, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = intensity_to_od(static_cast<std::uint8_t>(v), i0);
  return lut;
}

OdImage rgb_to_od(const RasterImage& img, double i0) {
  const auto lut = od_lookup_table(i0);
  OdImage od(img.width(), img.height());
  auto src = img.data();
  auto dst = od.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lut[src[i]];
  return od;
}

RasterImage od_to_rgb(const OdImage& od, double i0) {
  if (!(i0 > 0.0)) throw ValidationError("reference white i0 must be > 0");
  RasterImage img(od.width(), od.height());
  auto src = od.data();
  auto dst = img.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = od_to_intensity(src[i], i0);
  return img;
}

int TileGrid::tile_containing(double x, double y) const noexcept {
  for (std::size_t i = 0; i < origins.size(); ++i) {
    const auto& o = origins[i];
    if (x >= o.x && x < o.x + tile_size && y >= o.y && y < o.y + tile_size) return static_cast<int>(i);
  }
  return -1;
}

TileGrid tile(int width, int height, int tile_size) {
  if (tile_size < 1) throw ValidationError("tile_size must be >= 1");
  if (tile_size > width || tile_size > height) throw ValidationError("tile_size exceeds image extent: no full tile fits");
  TileGrid grid;
  grid.tile_size = tile_size;
  const int cols = width / tile_size;
  const int rows = height / tile_size;
  grid.origins.reserve(static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) grid.origins.push_back({c * tile_size, r * tile_size});
  }
  return grid;
}

TileGrid tile(const RasterImage& img, int tile_size) { return tile(img.width(), img.height(), tile_size); }

std::string tile_manifest_to_json(const TileGrid& grid) {
  nlohmann::ordered_json j;
  j["tile_size"] = grid.tile_size;
  auto& origins = j["origins"] = nlohmann::ordered_json::array();
  for (const auto& o : grid.origins) origins.push_back({o.x, o.y});
  return j.dump();
}

TileGrid tile_manifest_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("tile manifest: ") + e.what());
  }
  TileGrid grid;
  try {
    grid.tile_size = j.at("tile_size").get<int>();
    for (const auto& o : j.at("origins")) {
      if (!o.is_array() || o.size() != 2) throw ValidationError("tile manifest: origin must be [x, y]");
      grid.origins.push_back({o[0].get<int>(), o[1].get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("tile manifest: ") + e.what());
  }
  if (grid.tile_size < 1) throw ValidationError("tile manifest: tile_size must be >= 1");
  const int s = grid.tile_size;
  for (std::size_t i = 0; i < grid.origins.size(); ++i) {
    const auto& a = grid.origins[i];
    if (a.x < 0 || a.y < 0) throw ValidationError("tile manifest: negative origin");
    for (std::size_t k = i + 1; k < grid.origins.size(); ++k) {
      const auto& b = grid.origins[k];
      const bool disjoint = a.x + s <= b.x || b.x + s <= a.x || a.y + s <= b.y || b.y + s <= a.y;
      if (!disjoint) throw ValidationError("tile manifest: overlapping tiles");
    }
  }
  return grid;
}

}  // namespace stainbench
