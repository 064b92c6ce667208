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

#include "stainbench/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>

#include "stainbench/error.hpp"

namespace stainbench {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  auto* path = static_cast<const std::string*>(png_get_error_ptr(png));
  throw IoError("png " + (path ? *path : std::string()) + ": " + msg);
}

void png_warning_fn(png_structp, png_const_charp) {}

// libpng longjmp-free error handling: errors are thrown as C++ exceptions
// from the error callback, so the handle must be destroyed on unwind.
class PngReader {
 public:
  explicit PngReader(const std::filesystem::path& path) : name_(path.string()), file_(open_file(path, "rb")) {
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
      throw IoError("not a PNG file: " + name_);
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, &name_, png_error_fn, png_warning_fn);
    if (!png_) throw IoError("png_create_read_struct failed");
    info_ = png_create_info_struct(png_);
    if (!info_) {
      png_destroy_read_struct(&png_, nullptr, nullptr);
      throw IoError("png_create_info_struct failed");
    }
    png_init_io(png_, file_.get());
    png_set_sig_bytes(png_, 8);
    png_read_info(png_, info_);
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

  void read_rows(std::uint8_t* data, std::size_t row_bytes, int height) {
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = data + static_cast<std::size_t>(y) * row_bytes;
    png_read_image(png_, rows.data());
    png_read_end(png_, nullptr);
  }

 private:
  std::string name_;
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngWriter {
 public:
  explicit PngWriter(const std::filesystem::path& path) : name_(path.string()), file_(open_file(path, "wb")) {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, &name_, png_error_fn, png_warning_fn);
    if (!png_) throw IoError("png_create_write_struct failed");
    info_ = png_create_info_struct(png_);
    if (!info_) {
      png_destroy_write_struct(&png_, nullptr);
      throw IoError("png_create_info_struct failed");
    }
    png_init_io(png_, file_.get());
    // Fast deflate: these are intermediate artifacts, not archives.
    png_set_compression_level(png_, 1);
  }
  ~PngWriter() { png_destroy_write_struct(&png_, &info_); }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;

  void write(int width, int height, int bit_depth, int color_type, const std::uint8_t* data, std::size_t row_bytes,
             bool swap16) {
    png_set_IHDR(png_, info_, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png_, info_);
    if (swap16) png_set_swap(png_);
    for (int y = 0; y < height; ++y) {
      png_write_row(png_, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * row_bytes));
    }
    png_write_end(png_, nullptr);
    if (std::fflush(file_.get()) != 0) throw IoError("write failed: " + name_);
  }

 private:
  std::string name_;
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

bool host_is_little_endian() {
  const std::uint16_t probe = 1;
  return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

}  // namespace

RasterImage read_png_rgb(const std::filesystem::path& path) {
  PngReader r(path);
  auto* png = r.png();
  auto* info = r.info();
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  RasterImage img(width, height);
  r.read_rows(img.data().data(), static_cast<std::size_t>(width) * 3, height);
  return img;
}

void write_png_rgb(const std::filesystem::path& path, const RasterImage& img) {
  if (img.empty()) throw ValidationError("cannot write an empty image");
  PngWriter w(path);
  w.write(img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB, img.data().data(),
          static_cast<std::size_t>(img.width()) * 3, false);
}

Gray16Image read_png_gray16(const std::filesystem::path& path) {
  PngReader r(path);
  auto* png = r.png();
  auto* info = r.info();
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA) {
    throw ValidationError("probability map must be a grayscale PNG: " + path.string());
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  if (depth == 16 && host_is_little_endian()) png_set_swap(png);
  png_read_update_info(png, info);

  Gray16Image img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  const auto n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.data.resize(n);
  if (depth == 16) {
    r.read_rows(reinterpret_cast<std::uint8_t*>(img.data.data()), static_cast<std::size_t>(img.width) * 2, img.height);
  } else {
    std::vector<std::uint8_t> bytes(n);
    r.read_rows(bytes.data(), static_cast<std::size_t>(img.width), img.height);
    for (std::size_t i = 0; i < n; ++i) img.data[i] = static_cast<std::uint16_t>(bytes[i] * 257);
  }
  return img;
}

void write_png_gray16(const std::filesystem::path& path, const Gray16Image& img) {
  if (img.width < 1 || img.height < 1 ||
      img.data.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
    throw ValidationError("invalid 16-bit gray image");
  }
  PngWriter w(path);
  w.write(img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, reinterpret_cast<const std::uint8_t*>(img.data.data()),
          static_cast<std::size_t>(img.width) * 2, host_is_little_endian());
}

}  // namespace stainbench
