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

#include "stainbench/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "stainbench/error.hpp"

namespace stainbench {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint32_t load_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32_le(unsigned char* p, std::uint32_t v) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

struct Blob {
  std::uint32_t c = 0;
  std::uint32_t h = 0;
  std::uint32_t w = 0;
  std::vector<double> values;
};

Blob read_blob(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < 16) throw ValidationError("tensor blob too short: " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (load_u32_le(p) != kTensorBlobMagic) throw ValidationError("bad tensor blob magic: " + path.string());
  Blob blob{load_u32_le(p + 4), load_u32_le(p + 8), load_u32_le(p + 12), {}};
  const std::uint64_t count = std::uint64_t{blob.c} * blob.h * blob.w;
  if (bytes.size() != 16 + count * 4) throw ValidationError("tensor blob size does not match header: " + path.string());
  blob.values.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t bits = load_u32_le(p + 16 + 4 * i);
    blob.values[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return blob;
}

void write_blob(const std::filesystem::path& path, std::uint32_t c, std::uint32_t h, std::uint32_t w,
                const auto& value_at) {
  const std::uint64_t count = std::uint64_t{c} * h * w;
  std::string bytes(16 + count * 4, '\0');
  auto* p = reinterpret_cast<unsigned char*>(bytes.data());
  store_u32_le(p, kTensorBlobMagic);
  store_u32_le(p + 4, c);
  store_u32_le(p + 8, h);
  store_u32_le(p + 12, w);
  for (std::uint64_t i = 0; i < count; ++i) {
    store_u32_le(p + 16 + 4 * i, std::bit_cast<std::uint32_t>(static_cast<float>(value_at(i))));
  }
  write_text_file(path, bytes);
}

nlohmann::json parse(const std::string& text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

FeatureMap read_feature_map_blob(const std::filesystem::path& path) {
  Blob blob = read_blob(path);
  FeatureMap f{static_cast<int>(blob.c), static_cast<int>(blob.h), static_cast<int>(blob.w), std::move(blob.values)};
  validate(f);
  return f;
}

void write_feature_map_blob(const std::filesystem::path& path, const FeatureMap& f) {
  validate(f);
  write_blob(path, static_cast<std::uint32_t>(f.channels), static_cast<std::uint32_t>(f.height),
             static_cast<std::uint32_t>(f.width), [&](std::uint64_t i) { return f.data[i]; });
}

FeatureMap feature_map_from_json(const std::string& text) {
  const auto j = parse(text, "feature map");
  FeatureMap f;
  try {
    if (j.is_object()) {
      f.channels = j.at("channels").get<int>();
      f.height = j.at("height").get<int>();
      f.width = j.at("width").get<int>();
      f.data = j.at("data").get<std::vector<double>>();
    } else if (j.is_array()) {
      f.channels = static_cast<int>(j.size());
      for (const auto& channel : j) {
        const int h = static_cast<int>(channel.size());
        if (f.height == 0) f.height = h;
        if (h != f.height) throw ValidationError("feature map: ragged channel heights");
        for (const auto& row : channel) {
          auto values = row.get<std::vector<double>>();
          if (f.width == 0) f.width = static_cast<int>(values.size());
          if (static_cast<int>(values.size()) != f.width) throw ValidationError("feature map: ragged rows");
          f.data.insert(f.data.end(), values.begin(), values.end());
        }
      }
    } else {
      throw ValidationError("feature map JSON must be an object or a nested array");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("feature map: ") + e.what());
  }
  validate(f);
  return f;
}

std::string feature_map_to_json(const FeatureMap& f) {
  nlohmann::ordered_json j;
  j["channels"] = f.channels;
  j["height"] = f.height;
  j["width"] = f.width;
  j["data"] = f.data;
  return j.dump();
}

Grid grid_from_json(const std::string& text) {
  const auto j = parse(text, "grid");
  Grid g;
  try {
    if (j.is_object()) {
      g.width = j.at("width").get<int>();
      g.height = j.at("height").get<int>();
      g.data = j.at("data").get<std::vector<double>>();
    } else if (j.is_array()) {
      g.height = static_cast<int>(j.size());
      for (const auto& row : j) {
        auto values = row.get<std::vector<double>>();
        if (g.width == 0) g.width = static_cast<int>(values.size());
        if (static_cast<int>(values.size()) != g.width) throw ValidationError("grid: ragged rows");
        g.data.insert(g.data.end(), values.begin(), values.end());
      }
    } else {
      throw ValidationError("grid JSON must be an object or an array of rows");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("grid: ") + e.what());
  }
  if (g.width < 1 || g.height < 1 ||
      g.data.size() != static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height)) {
    throw ValidationError("grid size does not match its dimensions");
  }
  return g;
}

FeatureSet feature_set_from_json(const std::string& text) {
  const auto j = parse(text, "feature set");
  const nlohmann::json& rows = j.is_object() && j.contains("vectors") ? j.at("vectors") : j;
  if (!rows.is_array() || rows.empty()) throw ValidationError("feature set must be a non-empty array of vectors");
  FeatureSet set;
  try {
    const auto d = static_cast<Eigen::Index>(rows.front().size());
    set.vectors.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto values = rows[r].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(values.size()) != d) throw ValidationError("feature set: vectors differ in dimension");
      for (Eigen::Index c = 0; c < d; ++c) set.vectors(static_cast<Eigen::Index>(r), c) = values[static_cast<std::size_t>(c)];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("feature set: ") + e.what());
  }
  return set;
}

FeatureSet read_feature_set_blob(const std::filesystem::path& path) {
  const Blob blob = read_blob(path);
  if (blob.c != 1) throw ValidationError("feature set blob must have C = 1: " + path.string());
  FeatureSet set;
  set.vectors.resize(blob.h, blob.w);
  for (std::uint32_t r = 0; r < blob.h; ++r) {
    for (std::uint32_t c = 0; c < blob.w; ++c) set.vectors(r, c) = blob.values[std::size_t{r} * blob.w + c];
  }
  return set;
}

void write_feature_set_blob(const std::filesystem::path& path, const FeatureSet& set) {
  const auto d = static_cast<std::uint64_t>(set.d());
  write_blob(path, 1, static_cast<std::uint32_t>(set.n()), static_cast<std::uint32_t>(set.d()),
             [&](std::uint64_t i) { return set.vectors(static_cast<Eigen::Index>(i / d), static_cast<Eigen::Index>(i % d)); });
}

FeatureSet read_feature_set(const std::filesystem::path& path) {
  if (path.extension() == ".json") return feature_set_from_json(read_text_file(path));
  return read_feature_set_blob(path);
}

}  // namespace stainbench
