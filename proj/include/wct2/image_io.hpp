/*
 * Copyright 2026 The WCT2 Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <png.h>
#include <jpeglib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "wct2/errors.hpp"
#include "wct2/stylize.hpp"
#include "wct2/tensor.hpp"

namespace wct2 {

/// Interleaved 8-bit RGB.
struct ImageBuffer {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> rgb;

  ImageBuffer() = default;
  ImageBuffer(std::size_t h, std::size_t w) : height(h), width(w), rgb(h * w * 3, 0) {}

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) {
    return rgb[(y * width + x) * 3 + c];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
    return rgb[(y * width + x) * 3 + c];
  }
  bool operator==(const ImageBuffer&) const = default;
};

inline FeatureMap to_feature_map(const ImageBuffer& img) {
  FeatureMap f(3, img.height, img.width);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x)
        f.at(c, y, x) = static_cast<float>(img.at(y, x, c) / 255.0);
  return f;
}

/// Clamps to [0,1] (NaN maps to 0) and rounds to the nearest 8-bit level.
inline ImageBuffer to_image_buffer(const FeatureMap& f) {
  detail::require(f.channels() == 3, "to_image_buffer: expected 3 channels, got " + shape_string(f));
  ImageBuffer img(f.height(), f.width());
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < f.height(); ++y)
      for (std::size_t x = 0; x < f.width(); ++x) {
        double v = f.at(c, y, x);
        v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
        img.at(y, x, c) = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
  return img;
}

namespace detail {

inline bool has_png_signature(const std::vector<std::uint8_t>& head) {
  static constexpr std::array<std::uint8_t, 8> sig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return head.size() >= 8 && std::equal(sig.begin(), sig.end(), head.begin());
}

inline bool has_jpeg_signature(const std::vector<std::uint8_t>& head) {
  return head.size() >= 3 && head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw PipelineError("cannot decode PNG '" + name + "': " + image.message);
  image.format = PNG_FORMAT_RGB;
  ImageBuffer img(image.height, image.width);
  const png_color black{0, 0, 0};
  if (!png_image_finish_read(&image, &black, img.rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw PipelineError("cannot decode PNG '" + name + "': " + image.message);
  }
  return img;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline ImageBuffer decode_jpeg(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  // Everything touched after setjmp lives outside this frame's locals.
  auto img = std::make_unique<ImageBuffer>();
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw PipelineError("cannot decode JPEG '" + name + "': " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  *img = ImageBuffer(cinfo.output_height, cinfo.output_width);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img->rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * img->width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return std::move(*img);
}

}  // namespace detail

/// Reads a PNG or JPEG file (detected by signature) as 8-bit RGB.
inline ImageBuffer read_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  ImageBuffer img;
  if (detail::has_png_signature(bytes))
    img = detail::decode_png(bytes, path.string());
  else if (detail::has_jpeg_signature(bytes))
    img = detail::decode_jpeg(bytes, path.string());
  else
    throw PipelineError("'" + path.string() + "' is neither PNG nor JPEG");
  if (img.height == 0 || img.width == 0)
    throw PipelineError("'" + path.string() + "' has a zero dimension");
  return img;
}

inline void write_png(const std::filesystem::path& path, const ImageBuffer& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.rgb.data(), 0, nullptr))
    throw PipelineError("cannot write PNG '" + path.string() + "': " + image.message);
}

/// Grayscale PNG holding one label per pixel (value = label id). RGB files
/// are accepted only when every pixel is gray.
inline SegmentationMap read_segmentation(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (!detail::has_png_signature(bytes))
    throw PipelineError("segmentation map '" + path.string() + "' is not a PNG");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw PipelineError("cannot decode PNG '" + path.string() + "': " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t ch = color ? 3 : 1;
  std::vector<std::uint8_t> px(static_cast<std::size_t>(image.width) * image.height * ch);
  const png_color black{0, 0, 0};
  if (!png_image_finish_read(&image, &black, px.data(), 0, nullptr)) {
    png_image_free(&image);
    throw PipelineError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  if (image.width == 0 || image.height == 0)
    throw PipelineError("segmentation map '" + path.string() + "' has a zero dimension");
  std::vector<std::int32_t> labels(static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (color && (px[3 * i] != px[3 * i + 1] || px[3 * i] != px[3 * i + 2]))
      throw PipelineError("segmentation map '" + path.string() + "' must be grayscale");
    labels[i] = px[i * ch];
  }
  return SegmentationMap(image.height, image.width, std::move(labels));
}

inline void write_segmentation(const std::filesystem::path& path, const SegmentationMap& seg) {
  std::vector<std::uint8_t> px(seg.labels.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    detail::require(seg.labels[i] <= 255, "write_segmentation: labels above 255 do not fit");
    px[i] = static_cast<std::uint8_t>(seg.labels[i]);
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(seg.width);
  image.height = static_cast<png_uint_32>(seg.height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, px.data(), 0, nullptr))
    throw PipelineError("cannot write PNG '" + path.string() + "': " + image.message);
}

}  // namespace wct2
