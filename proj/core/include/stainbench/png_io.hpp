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
#include <vector>

#include "stainbench/raster.hpp"

namespace stainbench {

/// Reads any PNG as 8-bit RGB (gray is expanded, alpha stripped, 16-bit
/// channels reduced). Throws IoError.
RasterImage read_png_rgb(const std::filesystem::path& path);

/// Writes 8-bit RGB. Output bytes depend only on the pixels.
void write_png_rgb(const std::filesystem::path& path, const RasterImage& img);

/// Single-channel 16-bit grayscale plane.
struct Gray16Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> data;
};

/// Reads a PNG as 16-bit grayscale (8-bit gray is scaled by 257).
/// Throws IoError, or ValidationError for color images.
Gray16Image read_png_gray16(const std::filesystem::path& path);
void write_png_gray16(const std::filesystem::path& path, const Gray16Image& img);

}  // namespace stainbench
