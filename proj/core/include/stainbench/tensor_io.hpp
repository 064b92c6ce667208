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
#include <string>

#include "stainbench/fid.hpp"
#include "stainbench/losses.hpp"

namespace stainbench {

/// Bulk tensor blob: 16-byte little-endian header {magic, C, H, W} (uint32
/// each) followed by C*H*W little-endian float32 values, channel-major.
inline constexpr std::uint32_t kTensorBlobMagic = 0x31544253;  // "SBT1"

FeatureMap read_feature_map_blob(const std::filesystem::path& path);
void write_feature_map_blob(const std::filesystem::path& path, const FeatureMap& f);

/// {"channels": C, "height": H, "width": W, "data": [...]} or a nested
/// [C][H][W] array.
FeatureMap feature_map_from_json(const std::string& text);
std::string feature_map_to_json(const FeatureMap& f);

/// {"width": W, "height": H, "data": [...]} or an array of equal rows.
Grid grid_from_json(const std::string& text);

/// Feature sets: JSON array of rows or {"vectors": [[...], ...]}; blobs use
/// C = 1, H = n, W = d.
FeatureSet feature_set_from_json(const std::string& text);
FeatureSet read_feature_set_blob(const std::filesystem::path& path);
void write_feature_set_blob(const std::filesystem::path& path, const FeatureSet& set);

/// Dispatches on extension: ".json" parses JSON, anything else is a blob.
FeatureSet read_feature_set(const std::filesystem::path& path);

/// Whole-file read. Throws IoError.
std::string read_text_file(const std::filesystem::path& path);
/// Whole-file write (truncating). Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace stainbench
