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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stainbench {

/// Row-major interleaved 8-bit RGB image.
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage() = default;
  /// Filled with `fill` in every channel. Throws ValidationError if either
  /// dimension is < 1.
  RasterImage(int width, int height, std::uint8_t fill = 0);
  /// Takes ownership of `data`; its size must be width * height * 3.
  RasterImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t* pixel(int x, int y) noexcept { return data_.data() + offset(x, y); }
  const std::uint8_t* pixel(int x, int y) const noexcept { return data_.data() + offset(x, y); }

  /// Copy of the rectangle [x, x + w) x [y, y + h); must lie inside the image.
  RasterImage crop(int x, int y, int w, int h) const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
           kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Per-pixel optical density, 3 channels, row-major interleaved.
/// Values are finite and >= 0.
class OdImage {
 public:
  OdImage() = default;
  OdImage(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::array<double, 3> at(std::size_t index) const noexcept {
    return {data_[3 * index], data_[3 * index + 1], data_[3 * index + 2]};
  }
  void set(std::size_t index, const std::array<double, 3>& od) noexcept {
    data_[3 * index] = od[0];
    data_[3 * index + 1] = od[1];
    data_[3 * index + 2] = od[2];
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

inline constexpr double kDefaultReferenceWhite = 255.0;

/// Beer-Lambert transform: -log10(max(v, 1) / i0) per channel, clamped at 0
/// so intensities brighter than i0 map to zero density.
/// Throws ValidationError unless i0 > 0.
OdImage rgb_to_od(const RasterImage& img, double i0 = kDefaultReferenceWhite);

/// Inverse transform: round(i0 * 10^-od), clamped to [0, 255].
RasterImage od_to_rgb(const OdImage& od, double i0 = kDefaultReferenceWhite);

/// Optical density of a single 8-bit intensity (floor of 1 applied).
double intensity_to_od(std::uint8_t v, double i0 = kDefaultReferenceWhite) noexcept;

/// Intensity of a single optical density value, rounded and clamped.
std::uint8_t od_to_intensity(double od, double i0 = kDefaultReferenceWhite) noexcept;

/// 256-entry lookup of intensity_to_od for a fixed i0.
std::array<double, 256> od_lookup_table(double i0 = kDefaultReferenceWhite);

struct TileOrigin {
  int x;
  int y;
  friend bool operator==(const TileOrigin&, const TileOrigin&) = default;
};

/// Non-overlapping square crops in row-major order.
struct TileGrid {
  int tile_size = 512;
  std::vector<TileOrigin> origins;

  /// Index of the tile containing (x, y), or -1 if the point falls in the
  /// dropped remainder or outside the image.
  int tile_containing(double x, double y) const noexcept;

  friend bool operator==(const TileGrid&, const TileGrid&) = default;
};

inline constexpr int kDefaultTileSize = 512;

/// floor(w / s) x floor(h / s) origins; remainder pixels are dropped.
/// Throws ValidationError if tile_size < 1 or no full tile fits.
TileGrid tile(int width, int height, int tile_size = kDefaultTileSize);
TileGrid tile(const RasterImage& img, int tile_size = kDefaultTileSize);

/// {"tile_size": s, "origins": [[x, y], ...]}
std::string tile_manifest_to_json(const TileGrid& grid);
/// Parses and validates a manifest (unique, non-overlapping origins).
TileGrid tile_manifest_from_json(const std::string& text);

}  // namespace stainbench
